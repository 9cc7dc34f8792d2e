# %% [markdown]
# # Recovering a cost vector on a two-variable integer program
#
# The polytope below has eight integer points. We observe the point (4, 2)
# and want a cost close to c_ring = (3, 1) under which (4, 2) is optimal.
# Under c_ring itself the best integer point is (2, 4), so c_ring has to move.

# %%
import numpy as np

from invopt.closed_form import iop2_closed_form
from invopt.cutting_plane import run
from invopt.generators import ex1
from invopt.inverse_mip import (scale_cost, shift_epsilon, solve_biobjective_model,
                                solve_concise_model, solve_tolerance_model)
from invopt.oracle import brute_force_forward, certify_inverse
from invopt.problem import attach_observation

p = ex1()
obs = attach_observation(p, (4, 2))
c_ring = np.array([3.0, 1.0])
print("slacks at x_hat:", obs.sigma_hat)
print("integer points:", brute_force_forward(p, c_ring).points.tolist())
print("best point under c_ring:", brute_force_forward(p, c_ring).argmin.tolist())

# %% [markdown]
# ## Plain norm objective
# Without any pressure on the optimality gap the cheapest answer is to keep
# c_ring and accept a large gap eps.

# %%
sol = solve_concise_model(p, obs, c_ring)
print("c_hat", sol.c_struct, "norm", sol.l1_deviation, "gap", round(sol.eps_total, 4))

# %% [markdown]
# ## Weighting the gap
# With unit weights on eps the model pays for both. The recovered cost
# (4/3, 1) shrinks the LP gap to 1; x_hat is still not the integer optimum,
# which is (2, 4) with value 20/3.

# %%
bi = solve_biobjective_model(p, obs, c_ring, np.ones(6))
print("c_hat", bi.c_struct, "master", bi.master_objective, "gap", bi.eps_total)
print("LP value", bi.lp_certificate.z_lp, "forward optimum", bi.forward.objective,
      "at", bi.forward.x[:2])

# %% [markdown]
# ## Trading gap for cost
# Two thirds of the gap sitting on the first slack can be turned into a
# slack cost and folded back onto the structural columns.

# %%
sh = shift_epsilon(p, obs, bi, 2, 2 / 3)
print("c_hat", sh.c_struct, "c'x_hat", sh.c_hat @ obs.x_hat, "optimum", sh.forward.objective,
      "norm", sh.l1_deviation)

# %% [markdown]
# ## Bounding the gap by a fraction of the deviation
# A small tau forces a small gap but the cost collapses towards zero.
# Rescaling the answer recovers most of the distance to c_ring.

# %%
tol = solve_tolerance_model(p, obs, c_ring, 1e-3)
print("c_hat", tol.c_struct.round(5), "norm", round(tol.l1_deviation, 4))
sc = scale_cost(tol.c_struct, c_ring)
print("scaled by", round(sc.factor, 2), "->", sc.c_hat.round(4), "norm", round(sc.l1_deviation, 4))

# %% [markdown]
# ## Cutting planes
# Each integer point that beats x_hat under the current cost becomes a cut.
# Two cuts suffice here: the loop ends at c_hat = (1, 1), norm 2, and the
# enumeration oracle confirms x_hat is optimal (tied with two other points).

# %%
res = run(p, obs, c_ring)
print(res.status, "iterations", res.iterations, "c_hat", res.solution.c_struct,
      "norm", res.solution.l1_deviation)
for rec in res.state.log:
    print(rec.as_dict())
print("certified:", certify_inverse(p, obs, res.solution.c_struct).optimal)

# %% [markdown]
# ## Closed form for the unit-norm model
# For strictly interior points the closest-to-optimal normalized cost is a
# negated, normalized constraint row (or a unit vector).

# %%
for x in [(4, 2), (2, 4), (4, 5), (3, 5)]:
    cf = iop2_closed_form(p, attach_observation(p, x))
    print(x, cf.case_tag, "objective", cf.objective_exact, "c", cf.c.round(3))
