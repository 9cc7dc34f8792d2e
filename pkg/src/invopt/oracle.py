"""Brute-force ground truth for small instances.

Everything here is deliberately naive: integer points are enumerated on the
lattice of a bounding box, and the forward optimum is the minimum over that
list. Costs given as :class:`fractions.Fraction` are evaluated exactly on
pure-integer problems.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .errors import SizeLimitError
from .lp import LpModel, solve_lp
from .problem import FEAS_TOL, ForwardProblem, Observation

DEFAULT_BOX_LIMIT = 10 ** 6


def bounding_box(p: ForwardProblem):
    """Per-variable ``[lo, hi]`` of the LP relaxation over structural columns."""
    n_s = p.structural_count
    lo, hi = np.zeros(n_s), np.zeros(n_s)
    for j in range(n_s):
        for sense, out in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(p.n)
            c[j] = sense
            # presolve can report an unbounded LP as infeasible; keep it off
            res = linprog(c, A_eq=p.A, b_eq=p.b, bounds=[(0, None)] * p.n, method="highs",
                          options={"presolve": False})
            if res.status == 2:
                return None
            if res.status == 3:
                raise SizeLimitError(f"variable {j} is unbounded; cannot enumerate")
            if res.status != 0:
                raise SizeLimitError(f"bounding LP failed: {res.message}")
            out[j] = sense * res.fun
    return lo, hi


def _lattice(p: ForwardProblem, box_limit):
    box = bounding_box(p)
    n_s = p.structural_count
    int_mask = np.asarray(p.integrality[:n_s], dtype=bool)
    if box is None:
        return int_mask, np.zeros((0, int(int_mask.sum())))
    lo, hi = box
    ranges = []
    for j in np.flatnonzero(int_mask):
        a = int(np.ceil(lo[j] - 1e-7))
        b = int(np.floor(hi[j] + 1e-7))
        ranges.append(np.arange(a, b + 1))
    size = 1
    for r in ranges:
        size *= max(len(r), 0)
    if size > box_limit:
        raise SizeLimitError(f"lattice has {size} points, limit is {box_limit}")
    if not ranges:
        return int_mask, np.zeros((1, 0))
    if size == 0:
        return int_mask, np.zeros((0, len(ranges)))
    grid = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(len(ranges), -1).T
    return int_mask, grid.astype(float)


def _feasible_pure(p: ForwardProblem, pts):
    """Rows of ``pts`` (structural values) that satisfy every constraint."""
    resid = p.b[None, :] - pts @ p.A_struct.T
    ok = np.ones(len(pts), dtype=bool)
    scale = FEAS_TOL * (1.0 + np.abs(p.b))
    for i in range(p.m):
        if i in p.slack_map:
            ok &= resid[:, i] / p.slack_sign[i] >= -scale[i]
        else:
            ok &= np.abs(resid[:, i]) <= scale[i]
    return pts[ok]


def _profile(p: ForwardProblem, int_mask, assignment, c_cont):
    """LP over the continuous structural variables (and slacks) for fixed integers."""
    n_s = p.structural_count
    cont = np.flatnonzero(~int_mask)
    cols = np.concatenate([cont, np.arange(n_s, p.n)]).astype(int)
    rhs = p.b - p.A[:, np.flatnonzero(int_mask)] @ assignment
    c = np.zeros(cols.size)
    c[:cont.size] = c_cont
    sol = solve_lp(LpModel(c, p.A[:, cols], ("=",) * p.m, rhs))
    if not sol.is_optimal:
        return None, None
    return sol.objective, sol.x[:cont.size]


def enumerate_integer_points(p: ForwardProblem, box_limit: int = DEFAULT_BOX_LIMIT):
    """Integer-feasible structural points in lexicographic order.

    For mixed problems each returned row holds the integer values with the
    continuous entries filled from a feasible completion.
    """
    int_mask, grid = _lattice(p, box_limit)
    n_s = p.structural_count
    if int_mask.all():
        return _feasible_pure(p, grid)
    out = []
    for a in grid:
        val, xc = _profile(p, int_mask, a, np.zeros(int((~int_mask).sum())))
        if val is None:
            continue
        x = np.zeros(n_s)
        x[int_mask] = a
        x[~int_mask] = xc
        out.append(x)
    return np.array(out).reshape(-1, n_s)


@dataclass(frozen=True, eq=False)
class ForwardOptimum:
    value: object            # float, or Fraction when computed exactly
    argmin: np.ndarray       # rows are optimal structural points
    points: np.ndarray       # all enumerated points (integer part for mixed problems)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0


def _exact_costs(c):
    return all(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in c)


def _dot_exact(c, x):
    return sum((Fraction(ci) * Fraction(int(round(xi))) for ci, xi in zip(c, x)), Fraction(0))


def brute_force_forward(p: ForwardProblem, c, box_limit: int = DEFAULT_BOX_LIMIT,
                        rel_tol: float = 1e-9) -> ForwardOptimum:
    """Forward optimum by enumeration; ``c`` covers the structural variables."""
    c = list(c)[:p.structural_count] if len(c) >= p.structural_count else list(c)
    if len(c) != p.structural_count:
        raise ValueError("cost must cover the structural variables")
    int_mask, grid = _lattice(p, box_limit)
    n_s = p.structural_count
    if int_mask.all():
        pts = _feasible_pure(p, grid)
        if len(pts) == 0:
            return ForwardOptimum(None, pts, pts)
        if _exact_costs(c):
            vals = [_dot_exact(c, x) for x in pts]
            best = min(vals)
            arg = pts[[v == best for v in vals]]
            return ForwardOptimum(best, arg, pts)
        vals = pts @ np.asarray(c, dtype=float)
        best = float(vals.min())
        arg = pts[vals <= best + rel_tol * max(1.0, abs(best))]
        return ForwardOptimum(best, arg, pts)
    cf = np.asarray([float(v) for v in c])
    rows, vals = [], []
    for a in grid:
        val, xc = _profile(p, int_mask, a, cf[~int_mask])
        if val is None:
            continue
        x = np.zeros(n_s)
        x[int_mask] = a
        x[~int_mask] = xc
        rows.append(x)
        vals.append(val + float(cf[int_mask] @ a))
    pts = np.array(rows).reshape(-1, n_s)
    if not vals:
        return ForwardOptimum(None, pts, pts)
    vals = np.array(vals)
    best = float(vals.min())
    return ForwardOptimum(best, pts[vals <= best + rel_tol * max(1.0, abs(best))], pts)


@dataclass(frozen=True)
class Certificate:
    optimal: bool
    gap: object              # c'x_hat - forward optimum (>= 0), exact when possible
    value: object


def certify_inverse(p: ForwardProblem, obs: Observation, c_hat, tol: float = 1e-9,
                    box_limit: int = DEFAULT_BOX_LIMIT) -> Certificate:
    """Is ``x_hat`` a forward optimum under ``c_hat``? Returns the exact gap otherwise."""
    c = list(c_hat)[:p.structural_count]
    opt = brute_force_forward(p, c, box_limit)
    x = obs.x_struct
    if _exact_costs(c) and p.integrality[:p.structural_count].all():
        own = _dot_exact(c, x)
        gap = own - opt.value
        return Certificate(gap == 0, gap, opt.value)
    own = float(np.asarray([float(v) for v in c]) @ x)
    gap = own - float(opt.value)
    return Certificate(gap <= tol * max(1.0, abs(own)), max(gap, 0.0), opt.value)


def vertex_enumeration(p: ForwardProblem, tol: float = 1e-9) -> np.ndarray:
    """Vertices of the LP relaxation of a problem with two structural variables."""
    if p.structural_count != 2:
        raise SizeLimitError("vertex enumeration supports two structural variables only")
    lines = []   # (a, rhs, is_equality)
    for i in range(p.m):
        lines.append((p.A_struct[i], p.b[i]))
    lines.append((np.array([1.0, 0.0]), 0.0))
    lines.append((np.array([0.0, 1.0]), 0.0))
    verts = []
    for (a1, r1), (a2, r2) in itertools.combinations(lines, 2):
        M = np.array([a1, a2])
        if abs(np.linalg.det(M)) < tol:
            continue
        v = np.linalg.solve(M, [r1, r2])
        if np.any(v < -1e-9):
            continue
        ok = True
        resid = p.b - p.A_struct @ v
        for i in range(p.m):
            s = 1e-9 * (1.0 + abs(p.b[i]))
            if i in p.slack_map:
                ok &= resid[i] / p.slack_sign[i] >= -s
            else:
                ok &= abs(resid[i]) <= s
        if ok and not any(np.allclose(v, w, atol=1e-9) for w in verts):
            verts.append(v)
    verts.sort(key=lambda v: (v[0], v[1]))
    return np.array(verts).reshape(-1, 2)


def lp_min_by_vertices(p: ForwardProblem, c) -> float:
    """Minimum of ``c'x`` over the vertices of a bounded 2-D relaxation."""
    v = vertex_enumeration(p)
    return float(np.min(v @ np.asarray(c, dtype=float)[:2]))
