"""Inverse mixed-integer optimization through interior-point optimality gaps.

The observation ``x_hat`` is allowed an optimality gap ``sum(eps)`` with
respect to the LP relaxation of the forward problem. All models share the
rows

    a_i'y + eps_i / x_hat_i - f_i + g_i = c_ring_i     (i in I)
    a_i'y + s_i - f_i + g_i = c_ring_i                (i in I_bar)
    b'y + e'eps - x_hat'f + x_hat'g = c_ring'x_hat

with ``y`` free, ``eps, s, f, g >= 0`` and ``c_hat = c_ring + f - g``. The
last row is implied by the others (weight the first two blocks by
``x_hat`` and use ``A x_hat = b``) but is kept so the model reads as
written. The models differ only in objective and side constraints.

Once the master is solved, ``c_hat`` is fixed and the lower-level LP
``min sum(eps)`` is re-solved; this picks a dual-optimal ``y`` so that
``sum(eps) = c_hat'x_hat - z_LP(c_hat)`` holds exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (BigMTooSmallError, CertificateMismatchError, InvalidShiftError,
                     ScaleError, SolverError, ToleranceInfeasibleError)
from .inverse_lp import lower_level_gap
from .lp import INFEASIBLE, LpModel, primal_violation, solve_lp
from .milp import MilpSolution, solve_milp
from .problem import (SUPPORT_TOL, ForwardProblem, Observation, SupportSets,
                      forward_model, partition_support, reference_cost)

MODEL_CONCISE = "concise"
MODEL_TOLERANCE = "tolerance"
MODEL_BIOBJECTIVE = "biobjective"
MODEL_BIGM = "bigm"

RGAP_E2 = 1e-2
RGAP_E5 = 1e-5
IDENTITY_TOL = 1e-6


@dataclass(frozen=True)
class Metrics:
    """Quality measures of a recovered cost (structural entries only for norms)."""

    rgap: float
    rnorm_diff_of_norms: float
    rnorm_norm_of_diff: float
    eps_total: float
    l1_deviation: float
    cpu_seconds: float
    optimal_at_e2: bool
    optimal_at_e5: bool
    upper_bound: float = math.nan
    lower_bound: float = math.nan
    objective_at_x_hat: float = math.nan


@dataclass(frozen=True, eq=False)
class LpCertificate:
    """Optimal LP relaxation solution under ``c_hat`` and the gap identity check."""

    x_lp: np.ndarray
    y_lp: np.ndarray
    s_lp: np.ndarray
    z_lp: float
    identity_residual: float
    primal_residual: float
    duality_residual: float
    from_delta: bool = False


@dataclass(frozen=True, eq=False)
class InverseSolution:
    """Recovered cost with its dual certificate.

    ``eps`` and ``s`` are full length (zero outside ``I`` and ``I_bar``
    respectively); ``f`` and ``g`` satisfy ``c_hat = c_ring + f - g``.
    """

    c_hat: np.ndarray
    c_ring: np.ndarray
    f: np.ndarray
    g: np.ndarray
    eps: np.ndarray
    s: np.ndarray
    y: np.ndarray
    model_kind: str
    master_objective: float
    supports: SupportSets
    lp_certificate: Optional[LpCertificate] = None
    metrics: Optional[Metrics] = None
    forward: Optional[MilpSolution] = None
    delta: Optional[np.ndarray] = None
    tau: Optional[float] = None
    weights: Optional[np.ndarray] = None
    big_m: Optional[float] = None
    offset: float = 0.0
    cpu_seconds: float = 0.0

    @property
    def c_struct(self) -> np.ndarray:
        return self.c_hat[:self.supports.structural_count]

    @property
    def l1_deviation(self) -> float:
        return float(np.sum(self.f + self.g))

    @property
    def eps_total(self) -> float:
        return float(np.sum(self.eps))


@dataclass(frozen=True)
class ConciseLayout:
    """Column offsets of the concise LP variables."""

    m: int
    n: int
    I: np.ndarray
    I_bar: np.ndarray

    @property
    def y(self) -> slice:
        return slice(0, self.m)

    @property
    def eps(self) -> slice:
        return slice(self.m, self.m + self.I.size)

    @property
    def s(self) -> slice:
        start = self.m + self.I.size
        return slice(start, start + self.I_bar.size)

    @property
    def f(self) -> slice:
        start = self.m + self.I.size + self.I_bar.size
        return slice(start, start + self.n)

    @property
    def g(self) -> slice:
        start = self.m + self.I.size + self.I_bar.size + self.n
        return slice(start, start + self.n)

    @property
    def size(self) -> int:
        return self.m + self.I.size + self.I_bar.size + 2 * self.n


# ---------------------------------------------------------------- parameters

def default_tau(c_ring=None, x_ring_objective: float = 0.0) -> float:
    """Tolerance ladder on the magnitude of the reference objective value."""
    v = abs(float(x_ring_objective))
    if v < 1e3:
        return 1e-3
    if v < 1e4:
        return 1e-4
    if v < 1e5:
        return 1e-5
    return 1e-6


def default_weights(obs, support_tol=SUPPORT_TOL) -> np.ndarray:
    """``w_i = max(x_hat_i, 2)`` over the support ``I`` (in index order)."""
    x = obs.x_hat if isinstance(obs, Observation) else np.asarray(obs, dtype=float)
    return np.maximum(x[x > support_tol], 2.0)


def big_m_default(p: ForwardProblem, obs: Observation, c_ring) -> float:
    c_ring = p.full_cost(c_ring)
    a_inf = float(np.max(np.abs(p.A).sum(axis=1), initial=0.0))
    return 10.0 * (1.0 + float(np.max(obs.x_hat, initial=0.0))
                   + float(np.max(np.abs(c_ring), initial=0.0)) * (1.0 + a_inf))


# ---------------------------------------------------------------- builders

def _check_supports(obs, sup, support_tol):
    if sup.I.size and np.any(obs.x_hat[sup.I] <= support_tol):
        raise SolverError("support set I contains a non-positive entry of x_hat")


def _cut_rows(layout: ConciseLayout, x_hat, c_ring, cuts):
    rows, rhs = [], []
    for x_bar in cuts:
        d = x_hat - np.asarray(x_bar, dtype=float)
        r = np.zeros(layout.size)
        r[layout.f] = d
        r[layout.g] = -d
        rows.append(r)
        rhs.append(-float(d @ c_ring))
    return rows, rhs


def build_concise_lp(p: ForwardProblem, obs: Observation, supports: SupportSets = None,
                     c_ring=None, *, cuts: Sequence = (), tau: Optional[float] = None,
                     weights=None, fix_slack_costs: bool = True,
                     support_tol: float = SUPPORT_TOL):
    """Concise LP plus optional tolerance row, eps weights and optimality cuts.

    Returns ``(model, layout)``. Objective is ``sum(f + g) + sum(w * eps)``
    (``w = 0`` unless ``weights`` is given).
    """
    sup = supports if supports is not None else partition_support(obs, support_tol)
    _check_supports(obs, sup, support_tol)
    c_ring = reference_cost(p, c_ring)
    x = obs.x_hat
    m, n = p.m, p.n
    lay = ConciseLayout(m, n, np.asarray(sup.I), np.asarray(sup.I_bar))
    N = lay.size
    rows = np.zeros((n + 1, N))
    rhs = np.zeros(n + 1)
    rows[:n, lay.y] = p.A.T
    for k, i in enumerate(lay.I):
        rows[i, lay.eps.start + k] = 1.0 / x[i]
    for k, i in enumerate(lay.I_bar):
        rows[i, lay.s.start + k] = 1.0
    rows[:n, lay.f] = -np.eye(n)
    rows[:n, lay.g] = np.eye(n)
    rhs[:n] = c_ring
    rows[n, lay.y] = p.b
    rows[n, lay.eps] = 1.0
    rows[n, lay.f] = -x
    rows[n, lay.g] = x
    rhs[n] = float(c_ring @ x)
    senses = ["="] * (n + 1)

    extra, extra_rhs = _cut_rows(lay, x, c_ring, cuts)
    if tau is not None:
        if not tau > 0:
            raise ValueError("tau must be positive")
        r = np.zeros(N)
        r[lay.eps] = 1.0
        r[lay.f] = -tau
        r[lay.g] = -tau
        extra.append(r)
        extra_rhs.append(0.0)
    if extra:
        rows = np.vstack([rows, np.array(extra)])
        rhs = np.concatenate([rhs, extra_rhs])
        senses += ["<="] * len(extra)

    obj = np.zeros(N)
    obj[lay.f] = 1.0
    obj[lay.g] = 1.0
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (lay.I.size,):
            raise ValueError(f"weights need one entry per support index ({lay.I.size})")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        obj[lay.eps] = w
    lb = np.zeros(N)
    lb[lay.y] = -np.inf
    ub = np.full(N, np.inf)
    if fix_slack_costs:
        ub[lay.f.start + p.structural_count:lay.f.stop] = 0.0
        ub[lay.g.start + p.structural_count:lay.g.stop] = 0.0
    return LpModel(obj, rows, tuple(senses), rhs, lb, ub), lay


@dataclass(frozen=True)
class BigMLayout:
    concise: ConciseLayout
    delta: slice
    z: slice
    size: int


def build_bigm_milp(p: ForwardProblem, obs: Observation, supports: SupportSets = None,
                    c_ring=None, M: Optional[float] = None, *, weights=None,
                    fix_slack_costs: bool = True, support_tol: float = SUPPORT_TOL):
    """Big-M linearization of the complementarity conditions.

    ``delta`` shifts ``x_hat`` to an LP-optimal point ``x_lp = x_hat - delta``;
    binary ``z_i`` selects which of ``eps_i`` (or ``s_i``) and ``x_lp_i`` must
    vanish. Returns ``(model, integrality, layout, M)``.
    """
    sup = supports if supports is not None else partition_support(obs, support_tol)
    _check_supports(obs, sup, support_tol)
    if M is None:
        M = big_m_default(p, obs, c_ring)
    c_ring = reference_cost(p, c_ring)
    base, lay = build_concise_lp(p, obs, sup, c_ring, weights=weights,
                                 fix_slack_costs=fix_slack_costs, support_tol=support_tol)
    x = obs.x_hat
    m, n = p.m, p.n
    nb = lay.size
    N = nb + 2 * n
    dsl = slice(nb, nb + n)
    zsl = slice(nb + n, nb + 2 * n)
    # drop the redundant gap row; big-M rows carry the complementarity instead
    A0 = np.hstack([base.A[:n], np.zeros((n, 2 * n))])
    rows = [A0]
    senses = list(base.senses[:n])
    rhs = list(base.rhs[:n])
    blk = np.zeros((m, N))
    blk[:, dsl] = p.A
    rows.append(blk)
    senses += ["="] * m
    rhs += [0.0] * m
    for k, i in enumerate(lay.I):
        r = np.zeros(N)
        r[dsl.start + i] = 1.0
        r[zsl.start + i] = M
        rows.append(r[None])
        senses.append(">=")
        rhs.append(x[i])
        r = np.zeros(N)
        r[lay.eps.start + k] = 1.0
        r[zsl.start + i] = M
        rows.append(r[None])
        senses.append("<=")
        rhs.append(M)
    for k, i in enumerate(lay.I_bar):
        r = np.zeros(N)
        r[lay.s.start + k] = 1.0
        r[zsl.start + i] = M
        rows.append(r[None])
        senses.append("<=")
        rhs.append(M)
        r = np.zeros(N)
        r[dsl.start + i] = 1.0
        r[zsl.start + i] = M
        rows.append(r[None])
        senses.append(">=")
        rhs.append(0.0)
    obj = np.concatenate([base.c, np.zeros(2 * n)])
    lb = np.concatenate([base.lb, x - M, np.zeros(n)])
    ub = np.concatenate([base.ub, x, np.ones(n)])
    model = LpModel(obj, np.vstack(rows), tuple(senses), np.array(rhs), lb, ub)
    integrality = np.zeros(N, dtype=bool)
    integrality[zsl] = True
    return model, integrality, BigMLayout(lay, dsl, zsl, N), float(M)


# ---------------------------------------------------------------- solution assembly

def _split(vec, lay: ConciseLayout):
    n = lay.n
    y = vec[lay.y].copy()
    eps = np.zeros(n)
    s = np.zeros(n)
    eps[lay.I] = vec[lay.eps]
    s[lay.I_bar] = vec[lay.s]
    return y, eps, s, vec[lay.f].copy(), vec[lay.g].copy()


def _fg_from_cost(c_hat, c_ring):
    d = c_hat - c_ring
    return np.maximum(d, 0.0), np.maximum(-d, 0.0)


def evaluate_forward(p: ForwardProblem, obs: Observation, c_hat, *,
                     node_limit: Optional[int] = None,
                     time_limit: Optional[float] = 30.0) -> MilpSolution:
    """Capped forward MILP under ``c_hat`` seeded with ``x_hat`` as incumbent.

    The pool then holds exactly the points found that beat ``x_hat``.
    """
    return solve_milp(forward_model(p, c_hat), p.integrality, node_limit=node_limit,
                      time_limit=time_limit, incumbent=obs.x_hat)


def relative_gap(objective_at_x_hat: float, lower_bound: float) -> float:
    return abs(objective_at_x_hat - lower_bound) / max(1.0, abs(objective_at_x_hat))


def compute_metrics(c_hat, c_ring, x_hat, bounds, *, structural_count=None,
                    eps_total: float = 0.0, cpu_seconds: float = 0.0) -> Metrics:
    """Relative gap and relative norms from forward bounds ``(ub, lb)``.

    Norms use the first ``structural_count`` entries (all entries if omitted).
    """
    c_hat = np.asarray(c_hat, dtype=float)
    c_ring = np.asarray(c_ring, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    k = c_hat.size if structural_count is None else structural_count
    ub, lb = bounds
    obj = float(c_hat @ x_hat)
    rgap = relative_gap(obj, lb)
    ring_norm = float(np.abs(c_ring[:k]).sum())
    denom = max(1.0, ring_norm)
    l1 = float(np.abs(c_hat[:k] - c_ring[:k]).sum())
    return Metrics(rgap=rgap,
                   rnorm_diff_of_norms=(float(np.abs(c_hat[:k]).sum()) - ring_norm) / denom,
                   rnorm_norm_of_diff=l1 / denom,
                   eps_total=float(eps_total), l1_deviation=l1,
                   cpu_seconds=float(cpu_seconds),
                   optimal_at_e2=rgap <= RGAP_E2, optimal_at_e5=rgap <= RGAP_E5,
                   upper_bound=float(ub), lower_bound=float(lb), objective_at_x_hat=obj)


def recover_lp_certificate(p: ForwardProblem, obs: Observation, sol: InverseSolution,
                           *, tol: float = IDENTITY_TOL) -> LpCertificate:
    """Optimal LP relaxation solution under ``c_hat`` and the gap identity check.

    The forward LP is solved from scratch (independently of the master and of
    the lower-level polish) and ``sum(eps) = c_hat'x_hat - z_LP`` is asserted.
    For big-M solutions ``x_hat - delta`` must also be LP-feasible and attain
    ``z_LP``.
    """
    model = forward_model(p, sol.c_hat)
    lp = solve_lp(model)
    if not lp.is_optimal:
        raise CertificateMismatchError(f"forward LP under c_hat is {lp.status}")
    z = lp.objective
    ident = abs(sol.eps_total - (float(sol.c_hat @ obs.x_hat) - z))
    scale = 1.0 + abs(z)
    if ident > tol * scale:
        raise CertificateMismatchError(
            f"gap identity violated: sum(eps)={sol.eps_total:.12g}, "
            f"c'x_hat - z_LP={float(sol.c_hat @ obs.x_hat) - z:.12g}")
    x_lp, from_delta = lp.x, False
    if sol.delta is not None:
        x_d = obs.x_hat - sol.delta
        if primal_violation(model, x_d) > tol * scale or \
                abs(float(sol.c_hat @ x_d) - z) > tol * scale:
            raise CertificateMismatchError("x_hat - delta is not an optimal LP point")
        x_lp, from_delta = x_d, True
    s_lp = model.c - p.A.T @ lp.y
    primal = primal_violation(model, x_lp)
    duality = max(abs(float(model.c @ x_lp) - float(p.b @ lp.y)),
                  float(np.max(np.abs(x_lp * s_lp), initial=0.0)),
                  max(0.0, -float(np.min(s_lp, initial=0.0))))
    return LpCertificate(x_lp, lp.y, s_lp, z, ident, primal, duality, from_delta)


def _assemble(p, obs, sup, c_ring, c_hat, kind, master_objective, *, t0, delta=None,
              tau=None, weights=None, big_m=None, evaluate=True, node_limit=None,
              time_limit=30.0, y_eps_s=None):
    """Polish the lower level, attach certificate and metrics."""
    c_hat = np.asarray(c_hat, dtype=float).copy()
    c_hat[p.structural_count:][np.abs(c_hat[p.structural_count:]) < 1e-15] = 0.0
    f, g = _fg_from_cost(c_hat, c_ring)
    if y_eps_s is None:
        low = lower_level_gap(p, obs, c_hat, sup)
        y, eps, s = low.y, low.eps, low.s
    else:
        y, eps, s = y_eps_s
    sol = InverseSolution(c_hat, c_ring, f, g, eps, s, y, kind, float(master_objective),
                          sup, delta=delta, tau=tau, weights=weights, big_m=big_m)
    cert = recover_lp_certificate(p, obs, sol)
    sol = replace(sol, lp_certificate=cert)
    fwd = None
    if evaluate:
        fwd = evaluate_forward(p, obs, c_hat, node_limit=node_limit, time_limit=time_limit)
    cpu = time.process_time() - t0
    metrics = None
    if fwd is not None:
        metrics = compute_metrics(c_hat, c_ring, obs.x_hat,
                                  (fwd.upper_bound, fwd.lower_bound),
                                  structural_count=p.structural_count,
                                  eps_total=sol.eps_total, cpu_seconds=cpu)
    return replace(sol, metrics=metrics, forward=fwd, cpu_seconds=cpu)


def _solve_master(model, lay, what):
    lp = solve_lp(model)
    if lp.status == INFEASIBLE:
        return None
    if not lp.is_optimal:
        raise SolverError(f"{what}: LP status {lp.status}")
    return lp


# ---------------------------------------------------------------- models

def solve_concise_model(p, obs, c_ring, *, cuts=(), evaluate=True, node_limit=None,
                        time_limit=30.0, support_tol=SUPPORT_TOL) -> InverseSolution:
    """Concise LP with the plain norm objective (no tolerance, no weights)."""
    t0 = time.process_time()
    c_ring = reference_cost(p, c_ring)
    sup = partition_support(obs, support_tol)
    model, lay = build_concise_lp(p, obs, sup, c_ring, cuts=cuts, support_tol=support_tol)
    lp = _solve_master(model, lay, "concise LP")
    if lp is None:
        raise SolverError("concise LP infeasible")
    _, _, _, f, g = _split(lp.x, lay)
    return _assemble(p, obs, sup, c_ring, c_ring + f - g, MODEL_CONCISE, lp.objective,
                     t0=t0, evaluate=evaluate, node_limit=node_limit, time_limit=time_limit)


def solve_tolerance_model(p, obs, c_ring, tau, *, cuts=(), evaluate=True, node_limit=None,
                          time_limit=30.0, support_tol=SUPPORT_TOL) -> InverseSolution:
    """Concise LP plus ``sum(eps) <= tau * sum(f + g)``."""
    t0 = time.process_time()
    c_ring = reference_cost(p, c_ring)
    sup = partition_support(obs, support_tol)
    model, lay = build_concise_lp(p, obs, sup, c_ring, cuts=cuts, tau=tau,
                                  support_tol=support_tol)
    lp = _solve_master(model, lay, "tolerance model")
    if lp is None:
        raise ToleranceInfeasibleError(f"tolerance model infeasible at tau={tau:g}")
    _, _, _, f, g = _split(lp.x, lay)
    return _assemble(p, obs, sup, c_ring, c_ring + f - g, MODEL_TOLERANCE, lp.objective,
                     t0=t0, tau=float(tau), evaluate=evaluate, node_limit=node_limit,
                     time_limit=time_limit)


def solve_biobjective_model(p, obs, c_ring, weights=None, *, cuts=(), evaluate=True,
                            node_limit=None, time_limit=30.0,
                            support_tol=SUPPORT_TOL) -> InverseSolution:
    """Concise LP with objective ``sum(f + g) + sum(w_i eps_i)``.

    ``weights`` defaults to :func:`default_weights`. The reported ``eps`` is
    the polished lower level at ``c_hat``; ``master_objective`` is the LP value.
    """
    t0 = time.process_time()
    c_ring = reference_cost(p, c_ring)
    sup = partition_support(obs, support_tol)
    w = default_weights(obs, support_tol) if weights is None else np.asarray(weights, float)
    model, lay = build_concise_lp(p, obs, sup, c_ring, cuts=cuts, weights=w,
                                  support_tol=support_tol)
    lp = _solve_master(model, lay, "bi-objective model")
    if lp is None:
        raise ToleranceInfeasibleError("bi-objective model infeasible")
    _, _, _, f, g = _split(lp.x, lay)
    return _assemble(p, obs, sup, c_ring, c_ring + f - g, MODEL_BIOBJECTIVE, lp.objective,
                     t0=t0, weights=w, evaluate=evaluate, node_limit=node_limit,
                     time_limit=time_limit)


def _bigm_capped(vec, blay: BigMLayout, M):
    lay = blay.concise
    band = 1e-6 * M
    caps = np.concatenate([vec[lay.eps], vec[lay.s]])
    if caps.size and np.any(caps >= M - band):
        return True
    return False


def solve_bigm_model(p, obs, c_ring, *, M=None, weights=None, max_retries=3,
                     milp_node_limit=None, milp_time_limit=None, evaluate=True,
                     node_limit=None, time_limit=30.0,
                     support_tol=SUPPORT_TOL) -> InverseSolution:
    """Big-M complementarity MILP; retries with ``10 M`` while a cap is active.

    A cap counts as binding only while enlarging ``M`` still lowers the
    objective: unpriced ``s`` (or ``eps`` without weights) may sit on a dual
    ray at the cap without ``M`` restricting anything.
    """
    t0 = time.process_time()
    c_ring = reference_cost(p, c_ring)
    sup = partition_support(obs, support_tol)
    M = big_m_default(p, obs, c_ring) if M is None else float(M)
    prev_obj = math.inf
    for attempt in range(max_retries + 1):
        model, integ, blay, M = build_bigm_milp(p, obs, sup, c_ring, M, weights=weights,
                                                support_tol=support_tol)
        res = solve_milp(model, integ, node_limit=milp_node_limit,
                         time_limit=milp_time_limit)
        if res.x is None:
            raise SolverError(f"big-M MILP returned {res.status}")
        if not _bigm_capped(res.x, blay, M):
            break
        if res.objective >= prev_obj - 1e-9 * max(1.0, abs(prev_obj)):
            break
        if attempt == max_retries:
            raise BigMTooSmallError(f"big-M cap still active at M={M:g}")
        prev_obj = res.objective
        M *= 10.0
    lay = blay.concise
    y, eps, s, f, g = _split(res.x, lay)
    delta = res.x[blay.delta].copy()
    return _assemble(p, obs, sup, c_ring, c_ring + f - g, MODEL_BIGM, res.objective, t0=t0,
                     delta=delta, weights=weights, big_m=M, evaluate=evaluate,
                     node_limit=node_limit, time_limit=time_limit, y_eps_s=(y, eps, s))


MODEL_REFERENCE = "reference"


def solution_for_cost(p, obs, c_ring, c_hat, *, kind=MODEL_REFERENCE, evaluate=True,
                      node_limit=None, time_limit=30.0,
                      support_tol=SUPPORT_TOL) -> InverseSolution:
    """Wrap a given cost in an :class:`InverseSolution` (certificate and metrics)."""
    t0 = time.process_time()
    c_ring = reference_cost(p, c_ring)
    c_hat = reference_cost(p, c_hat)
    sup = partition_support(obs, support_tol)
    return _assemble(p, obs, sup, c_ring, c_hat, kind, float(np.abs(c_hat - c_ring).sum()),
                     t0=t0, evaluate=evaluate, node_limit=node_limit, time_limit=time_limit)


# ---------------------------------------------------------------- post-processing

def slack_cost_fold(p: ForwardProblem, c_with_slack_costs):
    """Move slack costs onto structural columns.

    With ``u_r = c_sigma_r / d_r`` (``d_r`` the slack coefficient of row ``r``)
    the folded cost is ``c_struct - A_struct' u`` and the constant offset is
    ``b'u``; folded objective plus offset equals the original objective on
    every feasible point. Returns ``(c_struct_folded, offset)``.
    """
    c = p.full_cost(c_with_slack_costs)
    u = np.zeros(p.m)
    for row, col in p.slack_map.items():
        u[row] = c[col] / p.slack_sign[row]
    return c[:p.structural_count] - p.A_struct.T @ u, float(p.b @ u)


def shift_epsilon(p: ForwardProblem, obs: Observation, sol: InverseSolution, i: int,
                  alpha: float, *, evaluate: bool = None, node_limit=None,
                  time_limit=30.0) -> InverseSolution:
    """Trade part of a slack's gap ``eps_i`` for a cost change.

    ``eps_i`` becomes ``(1 - alpha) eps_i`` and the slack receives cost
    ``-alpha eps_i / x_hat_i``, which is then folded onto the structural
    columns. The dual is shifted by the same fold so every dual row still
    holds.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidShiftError("alpha must lie in [0, 1]")
    if not p.is_slack(i) or i >= p.n:
        raise InvalidShiftError(f"column {i} is not a slack column")
    if not sol.eps[i] > 0:
        raise InvalidShiftError(f"eps[{i}] is zero; nothing to shift")
    t0 = time.process_time()
    row = p.row_of_slack(i)
    d = p.slack_sign[row]
    c_sigma = -alpha * sol.eps[i] / obs.x_hat[i]
    u = np.zeros(p.m)
    u[row] = c_sigma / d
    c_new = sol.c_hat - p.A.T @ u
    c_new[i] = 0.0
    eps = sol.eps.copy()
    eps[i] = (1.0 - alpha) * sol.eps[i]
    y = sol.y - u
    f, g = _fg_from_cost(c_new, sol.c_ring)
    out = replace(sol, c_hat=c_new, f=f, g=g, eps=eps, y=y, delta=None,
                  offset=sol.offset + float(p.b @ u), lp_certificate=None, metrics=None,
                  forward=None)
    out = replace(out, lp_certificate=recover_lp_certificate(p, obs, out))
    if evaluate is None:
        evaluate = sol.metrics is not None
    if evaluate:
        fwd = evaluate_forward(p, obs, c_new, node_limit=node_limit, time_limit=time_limit)
        cpu = time.process_time() - t0
        met = compute_metrics(c_new, sol.c_ring, obs.x_hat,
                              (fwd.upper_bound, fwd.lower_bound),
                              structural_count=p.structural_count,
                              eps_total=out.eps_total, cpu_seconds=cpu)
        out = replace(out, metrics=met, forward=fwd)
    return out


@dataclass(frozen=True, eq=False)
class ScaleResult:
    factor: float
    c_hat: np.ndarray
    l1_deviation: float


def scale_cost(c_hat, c_ring) -> ScaleResult:
    """Best positive multiple of ``c_hat`` in l1 distance to ``c_ring``.

    ``phi(lam) = sum |lam c_hat_j - c_ring_j|`` is convex and piecewise linear
    with breakpoints ``c_ring_j / c_hat_j``; the minimum over ``lam > 0`` sits
    on a positive breakpoint. When a whole interval is optimal, the point
    closest to 1 is returned.
    """
    c_hat = np.asarray(c_hat, dtype=float)
    c_ring = np.asarray(c_ring, dtype=float)
    nz = np.abs(c_hat) > 0
    if not np.any(nz):
        raise ScaleError("cannot scale a zero cost vector")
    bps = np.unique(c_ring[nz] / c_hat[nz])
    bps = bps[bps > 0]
    if bps.size == 0:
        raise ScaleError("no positive scaling improves the deviation")
    vals = np.array([np.abs(lam * c_hat - c_ring).sum() for lam in bps])
    best = vals.min()
    ties = bps[vals <= best + 1e-12 * max(1.0, best)]
    lam = float(np.clip(1.0, ties.min(), ties.max()))
    scaled = lam * c_hat
    return ScaleResult(lam, scaled, float(np.abs(scaled - c_ring).sum()))
