"""Dense two-phase primal simplex with primal-dual certificates.

The solver accepts a general model (``<=``, ``=``, ``>=`` rows, arbitrary
bounds, free variables), rewrites it internally as ``A' x' = b', x' >= 0`` and
runs a tableau simplex with Dantzig pricing. Bland's rule takes over after
``5 (m + n)`` consecutive degenerate pivots. Duals are recomputed from the
final basis against the original data, so the returned certificate does not
inherit tableau round-off.

Sign conventions for ``min c'x``: ``y_i <= 0`` on ``<=`` rows, ``y_i >= 0`` on
``>=`` rows, free on ``=`` rows, and reduced costs ``s = c - A'y``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import NumericalFailure, SchemaError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIV_TOL = 1e-9
_OPT_TOL = 1e-9
_FEAS_TOL = 1e-7
_REFACTOR_EVERY = 40


@dataclass(frozen=True, eq=False)
class LpModel:
    """``min c'x`` subject to ``A x (<=|=|>=) rhs`` and ``lb <= x <= ub``.

    ``lb`` defaults to 0 and ``ub`` to +inf. Use ``-inf`` in ``lb`` for free
    variables.
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lb: np.ndarray = None
    ub: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        if n == 0:
            raise SchemaError("LP needs at least one variable")
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = np.zeros((0, n))
        A = np.atleast_2d(A)
        if A.shape[1] != n:
            raise SchemaError(f"A has {A.shape[1]} columns, objective has {n}")
        senses = tuple(self.senses)
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        if len(senses) != A.shape[0] or rhs.size != A.shape[0]:
            raise SchemaError("row data of inconsistent length")
        for s in senses:
            if s not in ("<=", "=", ">="):
                raise SchemaError(f"unknown sense {s!r}")
        lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=float).ravel().copy()
        ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).ravel().copy()
        if lb.size != n or ub.size != n:
            raise SchemaError("bounds of inconsistent length")
        if np.any(lb == np.inf) or np.any(ub == -np.inf):
            raise SchemaError("invalid infinite bound")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_arrays(cls, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None):
        """Build from scipy-style ``A_ub``/``A_eq`` blocks."""
        c = np.asarray(c, dtype=float).ravel()
        blocks, senses, rhs = [], [], []
        if A_ub is not None and np.size(A_ub):
            A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
            blocks.append(A_ub)
            senses += ["<="] * A_ub.shape[0]
            rhs.append(np.asarray(b_ub, dtype=float).ravel())
        if A_eq is not None and np.size(A_eq):
            A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
            blocks.append(A_eq)
            senses += ["="] * A_eq.shape[0]
            rhs.append(np.asarray(b_eq, dtype=float).ravel())
        A = np.vstack(blocks) if blocks else np.zeros((0, c.size))
        rhs = np.concatenate(rhs) if rhs else np.zeros(0)
        return cls(c, A, tuple(senses), rhs, lb, ub)

    def with_bounds(self, lb, ub) -> "LpModel":
        return replace(self, lb=np.asarray(lb, dtype=float), ub=np.asarray(ub, dtype=float))

    def with_objective(self, c) -> "LpModel":
        return replace(self, c=np.asarray(c, dtype=float))

    def add_rows(self, A, senses, rhs) -> "LpModel":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return replace(self, A=np.vstack([self.A, A]), senses=self.senses + tuple(senses),
                       rhs=np.concatenate([self.rhs, np.asarray(rhs, dtype=float).ravel()]))


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    objective: float = np.nan
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class CertificateReport:
    primal_residual: float
    dual_residual: float
    complementarity: float
    duality_gap: float
    primal_objective: float
    dual_objective: float

    def max_residual(self) -> float:
        return max(self.primal_residual, self.dual_residual, self.complementarity,
                   self.duality_gap)


class _Standard:
    """Internal ``A x' = b, x' >= 0`` image of an :class:`LpModel`."""

    def __init__(self, model: LpModel):
        n = model.n
        lb, ub = model.lb, model.ub
        cols = []  # (orig var, sign) for each transformed structural column
        offset = np.zeros(n)
        T = []
        bound_rows = []
        for j in range(n):
            if np.isfinite(lb[j]):
                offset[j] = lb[j]
                cols.append((j, 1.0))
                if np.isfinite(ub[j]):
                    bound_rows.append((len(cols) - 1, ub[j] - lb[j]))
            elif np.isfinite(ub[j]):
                offset[j] = ub[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        nt = len(cols)
        T = np.zeros((n, nt))
        for k, (j, sgn) in enumerate(cols):
            T[j, k] = sgn
        self.T = T
        self.offset = offset
        self.bad_bounds = bool(np.any(ub < lb - 1e-12))

        m0 = model.m
        A1 = model.A @ T
        r1 = model.rhs - model.A @ offset
        senses = list(model.senses)
        if bound_rows:
            Ab = np.zeros((len(bound_rows), nt))
            for r, (k, width) in enumerate(bound_rows):
                Ab[r, k] = 1.0
            A1 = np.vstack([A1, Ab])
            r1 = np.concatenate([r1, [w for _, w in bound_rows]])
            senses += ["<="] * len(bound_rows)
        m = A1.shape[0]
        n_slack = sum(1 for s in senses if s != "=")
        A = np.zeros((m, nt + n_slack))
        A[:, :nt] = A1
        slack_of_row = {}
        k = nt
        for i, s in enumerate(senses):
            if s != "=":
                A[i, k] = 1.0 if s == "<=" else -1.0
                slack_of_row[i] = k
                k += 1
        row_sign = np.where(r1 < 0, -1.0, 1.0)
        A *= row_sign[:, None]
        self.A = A
        self.b = r1 * row_sign
        self.row_sign = row_sign
        self.m_orig = m0
        self.slack_of_row = slack_of_row
        self.c = np.concatenate([model.c @ T, np.zeros(n_slack)])
        self.const = float(model.c @ offset)


class _Tableau:
    def __init__(self, A, b, basis):
        self.A0 = A
        self.b0 = b
        self.basis = list(basis)
        self.rows = list(range(A.shape[0]))
        self.refactor()

    def refactor(self):
        A = self.A0[self.rows]
        B = A[:, self.basis]
        try:
            self.T = np.linalg.solve(B, A)
            self.rhs = np.linalg.solve(B, self.b0[self.rows])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis during refactorization") from exc
        self.rhs[np.abs(self.rhs) < 1e-12] = 0.0

    def pivot(self, r, j):
        piv = self.T[r, j]
        self.T[r] /= piv
        self.rhs[r] /= piv
        col = self.T[:, j].copy()
        col[r] = 0.0
        self.T -= np.outer(col, self.T[r])
        self.rhs -= col * self.rhs[r]
        self.basis[r] = j

    def drop_row(self, position, orig_row):
        """Remove a redundant original row whose artificial is basic at ``position``."""
        self.rows.remove(orig_row)
        del self.basis[position]
        if self.rows:
            self.refactor()
        else:
            self.T = np.zeros((0, self.A0.shape[1]))
            self.rhs = np.zeros(0)


def _run_simplex(tab: _Tableau, c, allowed, max_iter):
    """Minimize ``c'x`` over the tableau. Returns (status, iterations)."""
    m = len(tab.rows)
    ncols = tab.T.shape[1]
    degenerate = 0
    bland = False
    bland_after = 5 * (m + ncols)
    it = 0
    since_refactor = 0
    while True:
        if it >= max_iter:
            raise NumericalFailure(f"simplex did not terminate within {max_iter} pivots")
        cb = c[tab.basis]
        rc = c - cb @ tab.T
        rc[~allowed] = 0.0
        rc[tab.basis] = 0.0
        scale = 1.0 + np.max(np.abs(c)) if c.size else 1.0
        cand = np.flatnonzero(rc < -_OPT_TOL * scale)
        if cand.size == 0:
            if since_refactor:
                tab.refactor()
                since_refactor = 0
                continue
            return OPTIMAL, it
        if bland:
            j = int(cand[0])
        else:
            j = int(cand[np.argmin(rc[cand])])
        col = tab.T[:, j]
        colscale = max(1.0, np.max(np.abs(col)))
        pos = np.flatnonzero(col > _PIV_TOL * colscale)
        if pos.size == 0:
            if since_refactor:
                tab.refactor()
                since_refactor = 0
                continue
            return UNBOUNDED, it
        ratios = np.maximum(tab.rhs[pos], 0.0) / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * (1.0 + best)]
        if bland:
            r = int(min(ties, key=lambda k: tab.basis[k]))
        else:
            # largest pivot among tied rows keeps the basis well conditioned
            r = int(ties[np.argmax(col[ties])])
        step = best
        tab.pivot(r, j)
        it += 1
        since_refactor += 1
        if step <= 1e-12:
            degenerate += 1
            if degenerate > bland_after:
                bland = True
        else:
            degenerate = 0
        if since_refactor >= _REFACTOR_EVERY:
            tab.refactor()
            since_refactor = 0


def solve_lp(model: LpModel, max_iter: Optional[int] = None) -> LpSolution:
    """Solve an :class:`LpModel` and return a primal-dual certificate."""
    std = _Standard(model)
    if std.bad_bounds:
        return LpSolution(INFEASIBLE)
    A, b = std.A, std.b
    m, N = A.shape
    if max_iter is None:
        max_iter = 50 * (m + N) + 1000

    # initial basis: slacks with +1 coefficient, artificials elsewhere
    basis = []
    art_rows = []
    for i in range(m):
        k = std.slack_of_row.get(i)
        if k is not None and A[i, k] > 0:
            basis.append(k)
        else:
            basis.append(None)
            art_rows.append(i)
    n_art = len(art_rows)
    Aext = np.hstack([A, np.zeros((m, n_art))])
    for a, i in enumerate(art_rows):
        Aext[i, N + a] = 1.0
        basis[i] = N + a
    tab = _Tableau(Aext, b, basis)
    iters = 0

    if n_art:
        c1 = np.zeros(N + n_art)
        c1[N:] = 1.0
        allowed = np.ones(N + n_art, dtype=bool)
        status, k = _run_simplex(tab, c1, allowed, max_iter)
        iters += k
        infeas = float(c1[tab.basis] @ tab.rhs)
        if infeas > _FEAS_TOL * (1.0 + np.max(np.abs(b), initial=0.0)):
            return LpSolution(INFEASIBLE, iterations=iters)
        # drive artificials out of the basis
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] >= N:
                row = tab.T[r, :N]
                j = int(np.argmax(np.abs(row)))
                if abs(row[j]) > 1e-7:
                    tab.pivot(r, j)
                    r += 1
                else:
                    tab.drop_row(r, art_rows[tab.basis[r] - N])
            else:
                r += 1
        tab.A0 = tab.A0[:, :N]
        tab.T = tab.T[:, :N]
        if tab.rows:
            tab.refactor()

    c2 = std.c
    if tab.rows:
        status, k = _run_simplex(tab, c2, np.ones(N, dtype=bool), max_iter)
        iters += k
    else:
        # no rows left: optimal iff every cost is non-negative
        status = OPTIMAL if np.all(c2 >= -_OPT_TOL) else UNBOUNDED
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=iters)

    xs = np.zeros(N)
    if tab.rows:
        xs[tab.basis] = np.maximum(tab.rhs, 0.0)
    x = std.offset + std.T @ xs[:std.T.shape[1]]

    ystd = np.zeros(m)
    if tab.rows:
        B = A[np.ix_(tab.rows, tab.basis)]
        try:
            ystd[tab.rows] = np.linalg.solve(B.T, c2[tab.basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular final basis") from exc
    yall = ystd * std.row_sign
    y = yall[:std.m_orig]
    s = model.c - model.A.T @ y
    obj = float(model.c @ x)
    return LpSolution(OPTIMAL, x, y, s, obj, iters)


def primal_violation(model: LpModel, x) -> float:
    x = np.asarray(x, dtype=float)
    ax = model.A @ x
    worst = 0.0
    for i, sense in enumerate(model.senses):
        d = ax[i] - model.rhs[i]
        if sense == "<=":
            v = max(d, 0.0)
        elif sense == ">=":
            v = max(-d, 0.0)
        else:
            v = abs(d)
        worst = max(worst, v)
    lbv = np.where(np.isfinite(model.lb), model.lb - x, 0.0)
    ubv = np.where(np.isfinite(model.ub), x - model.ub, 0.0)
    return float(max(worst, np.max(lbv, initial=0.0), np.max(ubv, initial=0.0)))


def check_certificate(model: LpModel, sol: LpSolution) -> CertificateReport:
    """Residuals of a claimed optimal primal-dual pair (pure report)."""
    x, y = np.asarray(sol.x, dtype=float), np.asarray(sol.y, dtype=float)
    s_claim = np.asarray(sol.s, dtype=float)
    s = model.c - model.A.T @ y
    primal = primal_violation(model, x)

    dual = float(np.max(np.abs(s - s_claim), initial=0.0))
    for i, sense in enumerate(model.senses):
        if sense == "<=":
            dual = max(dual, y[i])
        elif sense == ">=":
            dual = max(dual, -y[i])
    lo_fin, up_fin = np.isfinite(model.lb), np.isfinite(model.ub)
    for j in range(model.n):
        if lo_fin[j] and not up_fin[j]:
            dual = max(dual, -s[j])
        elif up_fin[j] and not lo_fin[j]:
            dual = max(dual, s[j])
        elif not lo_fin[j] and not up_fin[j]:
            dual = max(dual, abs(s[j]))

    slack = model.A @ x - model.rhs
    comp = float(np.max(np.abs(y * slack), initial=0.0))
    s_lo = np.where(lo_fin, np.maximum(s, 0.0), 0.0)
    s_up = np.where(up_fin, np.maximum(-s, 0.0), 0.0)
    comp = max(comp,
               float(np.max(np.abs(s_lo * np.where(lo_fin, x - model.lb, 0.0)), initial=0.0)),
               float(np.max(np.abs(s_up * np.where(up_fin, model.ub - x, 0.0)), initial=0.0)))

    pobj = float(model.c @ x)
    dobj = float(model.rhs @ y
                 + np.sum(np.where(lo_fin, s_lo * np.where(lo_fin, model.lb, 0.0), 0.0))
                 - np.sum(np.where(up_fin, s_up * np.where(up_fin, model.ub, 0.0), 0.0)))
    return CertificateReport(primal, float(max(dual, 0.0)), comp, abs(pobj - dobj), pobj, dobj)
