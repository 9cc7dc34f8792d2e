"""Closed-form optima of the unit-norm inverse problems.

Two models are covered. The equality-form model works on the full standard
form (slacks are ordinary columns):

    min  sum(eps)
    s.t. a_j'y + eps_j / x_j - c_j = 0      (x_j > 0)
         a_j'y + s_j - c_j = 0              (x_j = 0)
         ||c||_1 = 1,  eps, s >= 0

The inequality-form model keeps slack costs at zero and normalizes only the
structural cost. For rows ``a_i x <= b_i`` with slack values ``sigma_i``:

    min  sum(eps) + sum(eps_sigma)
    s.t. a_j'y + eps_j / x_j - c_j = 0      (x_j > 0)
         a_j'y + s_j - c_j = 0              (x_j = 0)
         y_i + eps_sigma_i / sigma_i = 0    (sigma_i > 0)
         y_i + t_i = 0                      (sigma_i = 0)
         ||c||_1 = 1,  eps, eps_sigma, s, t >= 0

``>=`` rows carry a -1 slack; they are handled by flipping the row (and the
sign of its dual) so the formulas above apply unchanged.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvOptError, SchemaError, SizeLimitError
from .lp import LpModel, solve_lp
from .problem import SUPPORT_TOL, ForwardProblem, Observation, partition_support

CASE_ROW = "row"                  # c = a_p / ||a_p||_1 (equality form)
CASE_ZERO_VARIABLE = "zero-variable"
CASE_ZERO_SLACK = "zero-slack"
CASE_CONSTRAINT = "interior-constraint"   # c = -a_p / ||a_p||_1
CASE_VARIABLE = "interior-variable"       # c = e_p


class DegenerateMatrixError(InvOptError):
    pass


@dataclass(frozen=True, eq=False)
class ClosedFormSolution:
    y: np.ndarray
    c: np.ndarray
    s: np.ndarray
    eps: np.ndarray
    eps_sigma: np.ndarray
    objective: float
    p: int
    case_tag: str
    objective_exact: Fraction = None
    t: np.ndarray = None   # dual of y_i + t_i = 0 on tight rows (inequality form only)


def _exact(v) -> Fraction:
    return Fraction(float(v))


def iop_closed_form(p: ForwardProblem, obs: Observation, row: int = None) -> ClosedFormSolution:
    """Optimal solution of the equality-form model (objective 0).

    With a zero entry ``x_q`` the solution is ``y = 0, c = e_q, s_q = 1``;
    otherwise ``y = e_p / ||a_p||_1`` and ``c = a_p / ||a_p||_1`` for row ``p``
    (default: first nonzero row).
    """
    A, x = p.A, obs.x_hat
    m, n = A.shape
    zeros = np.flatnonzero(x <= SUPPORT_TOL)
    eps = np.zeros(n)
    s = np.zeros(n)
    if zeros.size and row is None:
        q = int(zeros[0])
        c = np.zeros(n)
        c[q] = 1.0
        s[q] = 1.0
        return ClosedFormSolution(np.zeros(m), c, s, eps, np.zeros(0), 0.0, q,
                                  CASE_ZERO_VARIABLE, Fraction(0))
    norms = np.abs(A).sum(axis=1)
    if row is None:
        nz = np.flatnonzero(norms > 0)
        if nz.size == 0:
            raise DegenerateMatrixError("every row of A is zero")
        row = int(nz[0])
    if norms[row] == 0:
        raise DegenerateMatrixError(f"row {row} is zero")
    y = np.zeros(m)
    y[row] = 1.0 / norms[row]
    c = A[row] / norms[row]
    return ClosedFormSolution(y, c, s, eps, np.zeros(0), 0.0, row, CASE_ROW, Fraction(0))


def _inequality_view(p: ForwardProblem):
    """Rows flipped to ``<=`` form; returns (A_le, sign per row)."""
    if len(p.slack_map) != p.m:
        raise SchemaError("inequality-form model needs a slack on every row")
    sign = np.array([p.slack_sign[i] for i in range(p.m)])
    return p.A_struct * sign[:, None], sign


def iop2_closed_form_values(A_le, x, sigma) -> ClosedFormSolution:
    """Inequality-form closed form from raw data ``A x + sigma = b`` (rows in ``<=`` form).

    Boundary points (some ``x_j = 0`` or ``sigma_i = 0``) have objective 0.
    Strictly interior points have objective
    ``min(min_j x_j, min_i sigma_i / ||a_i||_1)``; ties go to the constraint
    case, and argmin ties to the lowest index. ``y`` is reported for the
    ``<=`` orientation of the rows.
    """
    A_le = np.atleast_2d(np.asarray(A_le, dtype=float))
    x = np.asarray(x, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    m, n_s = A_le.shape
    if x.shape != (n_s,) or sigma.shape != (m,):
        raise SchemaError("x and sigma do not match the matrix shape")
    norms = np.abs(A_le).sum(axis=1)
    y = np.zeros(m)
    c = np.zeros(n_s)
    s = np.zeros(n_s)
    eps = np.zeros(n_s)
    eps_sigma = np.zeros(m)
    t = np.zeros(m)

    zx = np.flatnonzero(x <= SUPPORT_TOL)
    if zx.size:
        q = int(zx[0])
        c[q] = 1.0
        s[q] = 1.0
        return ClosedFormSolution(y, c, s, eps, eps_sigma, 0.0, q, CASE_ZERO_VARIABLE,
                                  Fraction(0), t)
    zs = [int(i) for i in np.flatnonzero(sigma <= SUPPORT_TOL) if norms[i] > 0]
    if zs:
        q = zs[0]
        y[q] = -1.0 / norms[q]
        c = -A_le[q] / norms[q]
        t[q] = 1.0 / norms[q]
        return ClosedFormSolution(y, c, s, eps, eps_sigma, 0.0, q, CASE_ZERO_SLACK,
                                  Fraction(0), t)
    if np.any(sigma <= SUPPORT_TOL):
        raise DegenerateMatrixError("tight rows are all zero rows")

    finite = [(_exact(sigma[i]) / _exact(norms[i]), i) for i in range(m) if norms[i] > 0]
    x_exact = [_exact(v) for v in x]
    min_x = min(x_exact)
    q_var = x_exact.index(min_x)
    min_ratio, q_row = min(finite) if finite else (None, -1)

    if min_ratio is not None and min_x >= min_ratio:
        y[q_row] = -1.0 / norms[q_row]
        c = -A_le[q_row] / norms[q_row]
        eps_sigma[q_row] = sigma[q_row] / norms[q_row]
        return ClosedFormSolution(y, c, s, eps, eps_sigma, float(min_ratio), q_row,
                                  CASE_CONSTRAINT, min_ratio, t)
    c[q_var] = 1.0
    eps[q_var] = x[q_var]
    return ClosedFormSolution(y, c, s, eps, eps_sigma, float(min_x), q_var, CASE_VARIABLE,
                              min_x, t)


def _sigma_of(p: ForwardProblem, obs: Observation):
    return np.array([obs.x_hat[p.slack_map[i]] for i in range(p.m)])


def iop2_closed_form(p: ForwardProblem, obs: Observation) -> ClosedFormSolution:
    """Closed-form optimum of the inequality-form model for an observation.

    ``>=`` rows are flipped internally; the returned ``y`` uses the original
    row orientation.
    """
    A_le, sign = _inequality_view(p)
    sol = iop2_closed_form_values(A_le, obs.x_struct, _sigma_of(p, obs))
    return dataclasses.replace(sol, y=sol.y * sign)


def iop_residuals(p: ForwardProblem, obs: Observation, sol: ClosedFormSolution) -> float:
    """Largest constraint violation of an equality-form solution."""
    x = obs.x_hat
    sup = partition_support(obs)
    lhs = p.A.T @ sol.y - sol.c
    lhs[sup.I] += sol.eps[sup.I] / x[sup.I]
    lhs[sup.I_bar] += sol.s[sup.I_bar]
    viol = [np.max(np.abs(lhs), initial=0.0), abs(np.abs(sol.c).sum() - 1.0),
            max(0.0, -np.min(sol.eps, initial=0.0)), max(0.0, -np.min(sol.s, initial=0.0))]
    return float(max(viol))


def iop2_residuals_values(A_le, x, sigma, sol: ClosedFormSolution) -> float:
    """Largest constraint violation of an inequality-form solution (``<=`` orientation)."""
    A_le = np.atleast_2d(np.asarray(A_le, dtype=float))
    x = np.asarray(x, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    pos = x > SUPPORT_TOL
    lhs = A_le.T @ sol.y - sol.c
    lhs[pos] += sol.eps[pos] / x[pos]
    lhs[~pos] += sol.s[~pos]
    spos = sigma > SUPPORT_TOL
    t = sol.t if sol.t is not None else np.zeros(sigma.size)
    row = sol.y.copy()
    row[spos] += sol.eps_sigma[spos] / sigma[spos]
    row[~spos] += t[~spos]
    nonneg = np.concatenate([sol.eps, sol.eps_sigma, sol.s, t])
    viol = [np.max(np.abs(lhs), initial=0.0), np.max(np.abs(row), initial=0.0),
            abs(np.abs(sol.c).sum() - 1.0), max(0.0, -np.min(nonneg, initial=0.0))]
    return float(max(viol))


def iop2_residuals(p: ForwardProblem, obs: Observation, sol: ClosedFormSolution) -> float:
    """Residual replay for :func:`iop2_closed_form` output (original row signs)."""
    A_le, sign = _inequality_view(p)
    return iop2_residuals_values(A_le, obs.x_struct, _sigma_of(p, obs),
                                 dataclasses.replace(sol, y=sol.y * sign))


def iop2_objective_oracle_values(A_le, x, sigma, max_rows=8, max_structural=6) -> float:
    """Optimal objective of the inequality-form model by sign-pattern enumeration.

    For each sign pattern of ``c`` the constraint ``||c||_1 = 1`` is linear, so
    the model restricted to that orthant is an LP. The minimum over all
    ``2**n`` orthants is the global optimum. ``y`` needs no enumeration since
    it enters every constraint linearly.
    """
    A_le = np.atleast_2d(np.asarray(A_le, dtype=float))
    x = np.asarray(x, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    m, n_s = A_le.shape
    if m > max_rows or n_s > max_structural:
        raise SizeLimitError(f"oracle limited to m <= {max_rows}, n_s <= {max_structural}")
    xpos = x > SUPPORT_TOL
    spos = sigma > SUPPORT_TOL
    # variables: y (m, free) | c (n_s) | w (n_s: eps or s) | v (m: eps_sigma or t)
    nv = m + 2 * n_s + m
    obj = np.zeros(nv)
    obj[m + n_s:m + 2 * n_s][xpos] = 1.0
    obj[m + 2 * n_s:][spos] = 1.0
    rows = []
    for j in range(n_s):
        r = np.zeros(nv)
        r[:m] = A_le[:, j]
        r[m + j] = -1.0
        r[m + n_s + j] = 1.0 / x[j] if xpos[j] else 1.0
        rows.append(r)
    for i in range(m):
        r = np.zeros(nv)
        r[i] = 1.0
        r[m + 2 * n_s + i] = 1.0 / sigma[i] if spos[i] else 1.0
        rows.append(r)
    rhs = np.zeros(len(rows) + 1)
    rhs[-1] = 1.0
    best = np.inf
    for pattern in itertools.product((1.0, -1.0), repeat=n_s):
        pattern = np.array(pattern)
        norm_row = np.zeros(nv)
        norm_row[m:m + n_s] = pattern
        lb = np.concatenate([np.full(m, -np.inf), np.where(pattern > 0, 0.0, -np.inf),
                             np.zeros(n_s + m)])
        ub = np.concatenate([np.full(m, np.inf), np.where(pattern > 0, np.inf, 0.0),
                             np.full(n_s + m, np.inf)])
        model = LpModel(obj, np.vstack(rows + [norm_row]), ("=",) * len(rhs), rhs, lb, ub)
        sol = solve_lp(model)
        if sol.is_optimal:
            best = min(best, sol.objective)
    return float(best)


def iop2_objective_oracle(p: ForwardProblem, obs: Observation, max_rows=8,
                          max_structural=6) -> float:
    """Oracle objective for an observation; see :func:`iop2_objective_oracle_values`."""
    A_le, _ = _inequality_view(p)
    return iop2_objective_oracle_values(A_le, obs.x_struct, _sigma_of(p, obs),
                                        max_rows, max_structural)
