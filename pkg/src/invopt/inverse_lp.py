"""Inverse linear optimization: basis model, complementarity model and min-gap LP.

All l1 objectives use the split ``c = c_ring + f - g`` with ``f, g >= 0``.
Slack costs are held at zero by giving their ``f``/``g`` an upper bound of 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasisError, NotExtremeError, NotInteriorError, SolverError
from .lp import LpModel, solve_lp
from .problem import (SUPPORT_TOL, ForwardProblem, Observation, SupportSets,
                      forward_model, partition_support)


@dataclass(frozen=True, eq=False)
class InverseLpResult:
    c_hat: np.ndarray
    deviation: float
    y: np.ndarray = None
    basis: tuple = ()


@dataclass(frozen=True, eq=False)
class GapResult:
    """Lower-level optimum for a fixed cost: ``min sum(eps)`` over dual-feasible ``y``."""

    y: np.ndarray
    eps: np.ndarray  # full length, zero outside I
    s: np.ndarray    # full length, zero outside I_bar
    gap: float


def _fg_bounds(p: ForwardProblem, fix_slack_costs: bool):
    ub = np.full(p.n, np.inf)
    if fix_slack_costs:
        ub[p.structural_count:] = 0.0
    return ub


def _solve_or_raise(model, what):
    sol = solve_lp(model)
    if not sol.is_optimal:
        raise SolverError(f"{what}: LP status {sol.status}")
    return sol


def complete_basis(A, support, tol=1e-9):
    """Columns of ``A`` on ``support``, completed with further columns by ascending index."""
    m, n = A.shape
    support = [int(j) for j in support]
    if support and np.linalg.matrix_rank(A[:, support], tol=tol) < len(support):
        raise NotExtremeError("columns on the support are linearly dependent; "
                              "the observation is not a vertex")
    if len(support) > m:
        raise NotExtremeError("support larger than the row count; not a vertex")
    basis = list(support)
    rank = len(basis)
    for j in range(n):
        if rank == m:
            break
        if j in basis:
            continue
        trial = basis + [j]
        if np.linalg.matrix_rank(A[:, trial], tol=tol) > rank:
            basis = trial
            rank += 1
    if rank < m:
        raise DegenerateBasisError("no invertible basis completion exists")
    return tuple(basis)


def inverse_lp_basis(p: ForwardProblem, obs: Observation, c_ring, *,
                     fix_slack_costs=True, support_tol=SUPPORT_TOL) -> InverseLpResult:
    """Closest cost (l1) under which the vertex ``obs`` is LP-optimal, via reduced costs."""
    c_ring = p.full_cost(c_ring)
    sup = partition_support(obs, support_tol)
    basis = complete_basis(p.A, sup.I)
    nonbasic = [j for j in range(p.n) if j not in basis]
    n = p.n
    B = p.A[:, list(basis)]
    # reduced cost of column j: c_j - (B^-1 a_j)' c_B >= 0
    W = np.linalg.solve(B, p.A[:, nonbasic]) if nonbasic else np.zeros((p.m, 0))
    rows = np.zeros((len(nonbasic), n))
    for k, j in enumerate(nonbasic):
        rows[k, j] = 1.0
        rows[k, list(basis)] -= W[:, k]
    # variables (f, g): rows @ (c_ring + f - g) >= 0
    A = np.hstack([rows, -rows])
    rhs = -rows @ c_ring
    ub = _fg_bounds(p, fix_slack_costs)
    model = LpModel(np.ones(2 * n), A, (">=",) * len(nonbasic), rhs,
                    np.zeros(2 * n), np.concatenate([ub, ub]))
    sol = _solve_or_raise(model, "inverse basis LP")
    f, g = sol.x[:n], sol.x[n:]
    c_hat = c_ring + f - g
    return InverseLpResult(c_hat, float(np.sum(f + g)), basis=basis)


def inverse_lp_complementarity(p: ForwardProblem, obs: Observation, c_ring, *,
                               fix_slack_costs=True,
                               support_tol=SUPPORT_TOL) -> InverseLpResult:
    """Closest cost (l1) making ``obs`` LP-optimal, via complementary slackness.

    Solves ``min ||c - c_ring||_1`` subject to ``a_j'y = c_j`` on the support
    and ``a_j'y <= c_j`` off it. Works for any boundary point, vertex or not.
    """
    c_ring = p.full_cost(c_ring)
    sup = partition_support(obs, support_tol)
    m, n = p.m, p.n
    # variables: y (free, m), f (n), g (n); rows: a_j'y - f_j + g_j (= | <=) c_ring_j
    A = np.hstack([p.A.T, -np.eye(n), np.eye(n)])
    senses = tuple("=" if j in set(sup.I.tolist()) else "<=" for j in range(n))
    ub = _fg_bounds(p, fix_slack_costs)
    lb = np.concatenate([np.full(m, -np.inf), np.zeros(2 * n)])
    obj = np.concatenate([np.zeros(m), np.ones(2 * n)])
    model = LpModel(obj, A, senses, c_ring, lb, np.concatenate([np.full(m, np.inf), ub, ub]))
    sol = solve_lp(model)
    if not sol.is_optimal:
        raise SolverError(f"complementarity model returned {sol.status}")
    y = sol.x[:m]
    f, g = sol.x[m:m + n], sol.x[m + n:]
    return InverseLpResult(c_ring + f - g, float(np.sum(f + g)), y=y)


def lower_level_gap(p: ForwardProblem, obs: Observation, c, supports: SupportSets = None,
                    support_tol=SUPPORT_TOL) -> GapResult:
    """Smallest total gap ``sum(eps)`` of ``obs`` over dual-feasible ``y`` for cost ``c``.

    ``a_j'y + eps_j / x_j = c_j`` on the support, ``a_j'y + s_j = c_j`` off it.
    By LP duality the optimum equals ``c'x - z_LP(c)``.
    """
    c = p.full_cost(c)
    sup = supports if supports is not None else partition_support(obs, support_tol)
    x = obs.x_hat
    m, n = p.m, p.n
    # variables: y (m, free), w_j (n, >= 0) with w_j = eps_j on I and s_j on I_bar
    scale = np.ones(n)
    scale[sup.I] = 1.0 / x[sup.I]
    A = np.hstack([p.A.T, np.diag(scale)])
    obj = np.concatenate([np.zeros(m), np.zeros(n)])
    obj[m + sup.I] = 1.0
    lb = np.concatenate([np.full(m, -np.inf), np.zeros(n)])
    model = LpModel(obj, A, ("=",) * n, c, lb)
    sol = solve_lp(model)
    if not sol.is_optimal:
        raise SolverError(f"lower-level gap LP returned {sol.status}")
    y = sol.x[:m]
    w = sol.x[m:]
    eps = np.zeros(n)
    s = np.zeros(n)
    eps[sup.I] = w[sup.I]
    s[sup.I_bar] = w[sup.I_bar]
    return GapResult(y, eps, s, float(eps.sum()))


def min_gap_lp(p: ForwardProblem, obs: Observation, c, support_tol=SUPPORT_TOL):
    """Interior-point gap: ``min e'eps`` s.t. ``A'y + X^-1 eps = c``, ``eps >= 0``.

    Returns ``(y, eps, gap)``; ``obs`` is within ``gap`` of LP optimality.
    """
    if np.any(obs.x_hat <= support_tol):
        raise NotInteriorError("min_gap_lp needs a strictly positive observation")
    res = lower_level_gap(p, obs, c, support_tol=support_tol)
    return res.y, res.eps, res.gap


def lp_optimality_gap(p: ForwardProblem, obs: Observation, c) -> float:
    """``c'x_hat - z_LP(c)`` computed from the forward relaxation."""
    c = p.full_cost(c)
    sol = solve_lp(forward_model(p, c))
    if not sol.is_optimal:
        raise SolverError(f"forward relaxation returned {sol.status}")
    return float(c @ obs.x_hat - sol.objective)
