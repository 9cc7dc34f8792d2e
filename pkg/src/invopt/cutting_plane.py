"""Cutting-plane refinement of the tolerance model.

A master tolerance LP proposes ``c_hat``; a capped forward MILP under
``c_hat`` (seeded with ``x_hat``) returns every point it found that beats
``x_hat``. Each such point ``x_bar`` yields the cut ``c'(x_hat - x_bar) <= 0``,
valid for every cost under which ``x_hat`` is optimal. The tolerance ``tau``
alternates up and down between iterations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvOptError, SolverError, ToleranceInfeasibleError
from .inverse_mip import InverseSolution, solution_for_cost, solve_tolerance_model
from .lp import LpModel
from .milp import is_integer_feasible
from .problem import ForwardProblem, Observation, reference_cost

CONVERGED = "converged"
ITER_LIMIT = "iter-limit"
TIME_LIMIT = "time-limit"


@dataclass(frozen=True)
class CutPlaneConfig:
    tau_init: float = 0.01
    tau_restart: float = 1.0
    tau_up: float = 1.25
    tau_down: float = 0.75
    forward_time_cap: float = 30.0
    forward_node_cap: Optional[int] = None
    total_time_cap: float = 3600.0
    max_iters: int = 1000
    abs_gap_stop: float = 1e-2
    infeasible_tau_factor: float = 4.0

    def __post_init__(self):
        if not (self.tau_init > 0 and self.tau_restart > 0):
            raise ValueError("tau values must be positive")
        if not self.tau_up > 1.0 > self.tau_down > 0.0:
            raise ValueError("need tau_up > 1 > tau_down > 0")
        if not (self.forward_time_cap > 0 and self.total_time_cap > 0):
            raise ValueError("time caps must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


@dataclass
class IterationRecord:
    k: int
    tau: float
    master_norm: float
    forward_gap: float
    cpu: float
    cuts: int
    master_status: str = "optimal"

    def as_dict(self) -> dict:
        return {"k": self.k, "tau": self.tau, "master_norm": self.master_norm,
                "forward_gap": self.forward_gap, "cpu": self.cpu, "cuts": self.cuts,
                "master_status": self.master_status}


@dataclass
class CutPlaneState:
    """Cut pool (distinct points), iteration log and best cost so far."""

    x_hat: np.ndarray
    cut_pool: list = field(default_factory=list)
    log: list = field(default_factory=list)
    best: Optional[InverseSolution] = None
    _keys: set = field(default_factory=set, repr=False)

    @property
    def iterations(self) -> int:
        return sum(1 for r in self.log if r.k >= 1)

    def cut_matrix(self) -> np.ndarray:
        """Rows ``x_hat - x_bar``; cut ``i`` reads ``row_i' c <= 0``."""
        if not self.cut_pool:
            return np.zeros((0, self.x_hat.size))
        return self.x_hat[None, :] - np.array(self.cut_pool)


def _point_key(x, decimals=9):
    return tuple(np.round(np.asarray(x, dtype=float), decimals).tolist())


def add_optimality_cut(state: CutPlaneState, x_bar, *, model: LpModel = None,
                       integrality=None) -> bool:
    """Add the cut for ``x_bar``; returns False when the point is a duplicate or ``x_hat``.

    When ``model`` is given the point is checked for integer feasibility first.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    if x_bar.shape != state.x_hat.shape:
        raise ValueError("cut point has the wrong length")
    if model is not None:
        mask = integrality if integrality is not None else np.zeros(x_bar.size, bool)
        if not is_integer_feasible(model, mask, x_bar):
            raise InvOptError("cut point is not feasible for the forward problem")
    if np.allclose(x_bar, state.x_hat, atol=1e-9, rtol=0.0):
        return False
    key = _point_key(x_bar)
    if key in state._keys:
        return False
    state._keys.add(key)
    state.cut_pool.append(x_bar.copy())
    return True


def tau_schedule(k: int, tau_prev: float, up: float = 1.25, down: float = 0.75) -> float:
    """``up * tau_prev`` for odd ``k``, ``down * tau_prev`` for even ``k`` (``k >= 1``)."""
    if k < 1:
        raise ValueError("iterations are numbered from 1")
    return tau_prev * (up if k % 2 == 1 else down)


@dataclass(frozen=True, eq=False)
class CutPlaneResult:
    solution: InverseSolution
    state: CutPlaneState
    status: str

    @property
    def iterations(self) -> int:
        return self.state.iterations


def _master(p, obs, c_ring, tau, cuts, cfg, deadline):
    remaining = max(1e-3, min(cfg.forward_time_cap, deadline - time.perf_counter()))
    return solve_tolerance_model(p, obs, c_ring, tau, cuts=cuts, evaluate=True,
                                 node_limit=cfg.forward_node_cap, time_limit=remaining)


def run(p: ForwardProblem, obs: Observation, c_ring, cfg: CutPlaneConfig = None,
        on_iteration: Callable[[IterationRecord], None] = None) -> CutPlaneResult:
    """Cutting-plane loop.

    The reference cost is checked first; if it already makes ``x_hat``
    optimal the loop stops at iteration 1 with zero deviation. Otherwise the
    bootstrap master at ``tau_init`` only seeds the cut pool. Iterations
    ``k = 1, 2, ...`` restart from ``tau_restart`` and follow
    :func:`tau_schedule`; the loop stops when the forward solve under the
    current ``c_hat`` proves ``c_hat'x_hat - lb < abs_gap_stop``, or a limit
    hits. An infeasible master multiplies ``tau`` and retries (each retry
    counts as an iteration).
    """
    cfg = cfg or CutPlaneConfig()
    c_ring = reference_cost(p, c_ring)
    state = CutPlaneState(obs.x_hat.copy())
    t_start = time.perf_counter()
    deadline = t_start + cfg.total_time_cap

    def record(k, tau, sol, status="optimal"):
        gap = float("nan")
        norm = float("nan")
        if sol is not None:
            norm = sol.l1_deviation
            if sol.metrics is not None:
                gap = sol.metrics.objective_at_x_hat - sol.metrics.lower_bound
        rec = IterationRecord(k, float(tau), norm, gap, time.perf_counter() - t_start,
                              len(state.cut_pool), status)
        state.log.append(rec)
        if on_iteration is not None:
            on_iteration(rec)
        return gap

    def harvest(sol):
        if sol.forward is not None:
            for x_bar in sol.forward.pool:
                add_optimality_cut(state, x_bar)

    # the reference cost itself may already make x_hat optimal; when its LP
    # relaxation is unbounded there is no dual certificate and the check is skipped
    try:
        ref = solution_for_cost(p, obs, c_ring, c_ring, node_limit=cfg.forward_node_cap,
                                time_limit=cfg.forward_time_cap)
    except SolverError:
        ref = None
    if ref is not None:
        harvest(ref)
        ref_gap = ref.metrics.objective_at_x_hat - ref.metrics.lower_bound
        if ref_gap < cfg.abs_gap_stop:
            record(1, 0.0, ref, "reference")
            state.best = ref
            return CutPlaneResult(ref, state, CONVERGED)

    sol = _master(p, obs, c_ring, cfg.tau_init, list(state.cut_pool), cfg, deadline)
    harvest(sol)
    record(0, cfg.tau_init, sol)
    state.best = sol

    tau = cfg.tau_restart
    k = 0
    while True:
        if k >= cfg.max_iters:
            return CutPlaneResult(state.best, state, ITER_LIMIT)
        if time.perf_counter() >= deadline:
            return CutPlaneResult(state.best, state, TIME_LIMIT)
        k += 1
        tau = tau_schedule(k, tau, cfg.tau_up, cfg.tau_down)
        try:
            sol = _master(p, obs, c_ring, tau, list(state.cut_pool), cfg, deadline)
        except ToleranceInfeasibleError:
            record(k, tau, None, "infeasible")
            tau *= cfg.infeasible_tau_factor
            continue
        harvest(sol)
        gap = record(k, tau, sol)
        state.best = sol
        if gap < cfg.abs_gap_stop:
            return CutPlaneResult(sol, state, CONVERGED)
