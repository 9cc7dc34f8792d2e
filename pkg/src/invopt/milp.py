"""Depth-first branch and bound on top of :func:`invopt.lp.solve_lp`."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LpModel, primal_violation, solve_lp

LIMIT = "limit"

INT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MilpSolution:
    """Result of a (possibly capped) branch-and-bound run.

    ``pool`` holds every improving incumbent in the order found, so objectives
    strictly decrease along it. A caller-supplied starting incumbent is not
    part of the pool.
    """

    status: str
    x: Optional[np.ndarray]
    upper_bound: float
    lower_bound: float
    pool: tuple = ()
    pool_objectives: tuple = ()
    node_count: int = 0
    wall_time: float = 0.0

    @property
    def objective(self) -> float:
        return self.upper_bound

    def gap(self) -> float:
        return self.upper_bound - self.lower_bound


@dataclass
class _Node:
    lb: np.ndarray
    ub: np.ndarray
    bound: float


def _most_fractional(x, int_idx, tol):
    vals = x[int_idx]
    frac = np.abs(vals - np.round(vals))
    k = int(np.argmax(frac))  # argmax picks the lowest index on ties
    if frac[k] <= tol:
        return None
    return int(int_idx[k])


def solve_milp(model: LpModel, integrality, *, node_limit: Optional[int] = None,
               time_limit: Optional[float] = None, incumbent=None,
               int_tol: float = INT_TOL) -> MilpSolution:
    """Minimize ``model`` with the integrality mask enforced.

    Branching picks the most fractional variable and explores the down branch
    first. ``incumbent`` seeds the upper bound with a known feasible point.
    Status is ``optimal`` when the search completes with an incumbent,
    ``infeasible`` when it completes without one, and ``limit`` when a node or
    time cap stops it early (bounds and incumbent are still reported).
    """
    t0 = time.perf_counter()
    integrality = np.asarray(integrality, dtype=bool)
    int_idx = np.flatnonzero(integrality)

    best_x, best_obj = None, math.inf
    if incumbent is not None:
        best_x = np.asarray(incumbent, dtype=float).copy()
        best_obj = float(model.c @ best_x)
    pool, pool_obj = [], []

    lb0 = model.lb.copy()
    ub0 = model.ub.copy()
    lb0[int_idx] = np.ceil(lb0[int_idx] - int_tol)
    ub0[int_idx] = np.floor(ub0[int_idx] + int_tol)
    stack = [_Node(lb0, ub0, -math.inf)]
    nodes = 0
    limited = False
    unbounded = False

    def prune_level():
        return best_obj - 1e-9 * max(1.0, abs(best_obj))

    while stack:
        if node_limit is not None and nodes >= node_limit:
            limited = True
            break
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            limited = True
            break
        node = stack.pop()
        if node.bound >= prune_level():
            continue
        nodes += 1
        sol = solve_lp(model.with_bounds(node.lb, node.ub))
        if sol.status == INFEASIBLE:
            continue
        if sol.status == UNBOUNDED:
            unbounded = True
            break
        if sol.objective >= prune_level():
            continue
        j = _most_fractional(sol.x, int_idx, int_tol)
        if j is None:
            x = sol.x.copy()
            x[int_idx] = np.round(x[int_idx])
            obj = float(model.c @ x)
            if obj < best_obj:
                best_x, best_obj = x, obj
                pool.append(x)
                pool_obj.append(obj)
            continue
        v = sol.x[j]
        up = _Node(node.lb.copy(), node.ub.copy(), sol.objective)
        up.lb[j] = math.ceil(v)
        down = _Node(node.lb.copy(), node.ub.copy(), sol.objective)
        down.ub[j] = math.floor(v)
        stack.append(up)
        stack.append(down)

    wall = time.perf_counter() - t0
    if unbounded:
        return MilpSolution(UNBOUNDED, best_x, best_obj, -math.inf, tuple(pool),
                            tuple(pool_obj), nodes, wall)
    if limited:
        open_bounds = [nd.bound for nd in stack]
        lower = min([best_obj] + open_bounds)
        return MilpSolution(LIMIT, best_x, best_obj, lower, tuple(pool), tuple(pool_obj),
                            nodes, wall)
    if best_x is None:
        return MilpSolution(INFEASIBLE, None, math.inf, math.inf, (), (), nodes, wall)
    return MilpSolution(OPTIMAL, best_x, best_obj, best_obj, tuple(pool), tuple(pool_obj),
                        nodes, wall)


def is_integer_feasible(model: LpModel, integrality, x, feas_tol=1e-7, int_tol=INT_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    idx = np.flatnonzero(np.asarray(integrality, dtype=bool))
    if idx.size and np.max(np.abs(x[idx] - np.round(x[idx]))) > int_tol:
        return False
    scale = 1.0 + np.max(np.abs(model.rhs), initial=0.0)
    return primal_violation(model, x) <= feas_tol * scale
