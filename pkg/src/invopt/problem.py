"""Forward problem data: ingestion, standard form, observations and supports.

Every inverse model works on the standard form ``A x = b, x >= 0`` where the
first ``structural_count`` columns are the user's variables and the remaining
columns are slacks, one per inequality row, appended in row order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .errors import (
    ObservationFractionalError,
    ObservationInfeasibleError,
    SchemaError,
    UnsupportedFormError,
)

if TYPE_CHECKING:
    from .lp import LpModel

FEAS_TOL = 1e-7
INT_TOL = 1e-6
SUPPORT_TOL = 1e-9

RELATIONS = ("<=", "=", ">=")
_RELATION_ALIASES = {"<=": "<=", "=<": "<=", "≤": "<=", "=": "=", "==": "=",
                     ">=": ">=", "=>": ">=", "≥": ">="}


def _frozen(arr, dtype=float):
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


def normalize_relation(rel: str) -> str:
    try:
        return _RELATION_ALIASES[rel.strip()]
    except (KeyError, AttributeError):
        raise SchemaError(f"unknown relation {rel!r}") from None


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    relation: str
    rhs: float


@dataclass(frozen=True)
class RawProblem:
    """A problem as the user writes it: rows with relations, x >= 0, optional upper bounds."""

    name: str
    num_vars: int
    constraints: tuple
    upper_bounds: tuple = ()
    integrality: tuple = ()
    lower_bounds: tuple = ()

    @classmethod
    def from_rows(cls, rows, *, name="problem", num_vars=None, upper_bounds=None,
                  integrality=None, lower_bounds=None):
        """Build from ``[(coeffs, relation, rhs), ...]`` and validate.

        ``integrality`` may be a boolean mask or ``True`` (all integer).
        """
        rows = list(rows)
        if num_vars is None:
            if not rows:
                raise SchemaError("num_vars required when there are no rows")
            num_vars = len(rows[0][0])
        cons = []
        for i, (coeffs, rel, rhs) in enumerate(rows):
            coeffs = tuple(float(v) for v in coeffs)
            if len(coeffs) != num_vars:
                raise SchemaError(
                    f"row {i} has {len(coeffs)} coefficients, expected {num_vars}")
            cons.append(Constraint(coeffs, normalize_relation(rel), float(rhs)))
        if upper_bounds is None:
            upper_bounds = (None,) * num_vars
        if integrality is None:
            integrality = (False,) * num_vars
        elif integrality is True:
            integrality = (True,) * num_vars
        if lower_bounds is None:
            lower_bounds = (0.0,) * num_vars
        raw = cls(name, int(num_vars), tuple(cons),
                  tuple(None if u is None else float(u) for u in upper_bounds),
                  tuple(bool(v) for v in integrality),
                  tuple(float(v) for v in lower_bounds))
        raw.validate()
        return raw

    def validate(self):
        n = self.num_vars
        if n < 1:
            raise SchemaError("problem needs at least one variable")
        for i, con in enumerate(self.constraints):
            if len(con.coeffs) != n:
                raise SchemaError(f"row {i} has {len(con.coeffs)} coefficients, expected {n}")
            if con.relation not in RELATIONS:
                raise SchemaError(f"row {i}: unknown relation {con.relation!r}")
            if not np.all(np.isfinite(con.coeffs)) or not np.isfinite(con.rhs):
                raise SchemaError(f"row {i}: non-finite data")
        for name, seq in (("upper_bounds", self.upper_bounds),
                          ("integrality", self.integrality),
                          ("lower_bounds", self.lower_bounds)):
            if len(seq) != n:
                raise SchemaError(f"{name} has length {len(seq)}, expected {n}")
        for j, lo in enumerate(self.lower_bounds):
            if lo != 0.0:
                raise UnsupportedFormError(
                    f"variable {j} has lower bound {lo}; only x >= 0 is supported")
        for j, up in enumerate(self.upper_bounds):
            if up is not None and (not np.isfinite(up) or up < 0):
                raise SchemaError(f"variable {j}: invalid upper bound {up}")


@dataclass(frozen=True, eq=False)
class ForwardProblem:
    """Standard-form MILP data ``A x = b, x >= 0`` with slack bookkeeping."""

    A: np.ndarray
    b: np.ndarray
    integrality: np.ndarray
    slack_map: Mapping[int, int]
    structural_count: int
    slack_sign: Mapping[int, float] = field(default_factory=dict)
    name: str = "problem"

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def A_struct(self) -> np.ndarray:
        return self.A[:, :self.structural_count]

    @property
    def slack_columns(self) -> np.ndarray:
        return np.array(sorted(self.slack_map.values()), dtype=int)

    def row_of_slack(self, col: int) -> int:
        for row, c in self.slack_map.items():
            if c == col:
                return row
        raise KeyError(col)

    def is_slack(self, col: int) -> bool:
        return col >= self.structural_count

    def full_cost(self, c_struct) -> np.ndarray:
        """Pad a structural cost with zeros on the slack columns."""
        c_struct = np.asarray(c_struct, dtype=float)
        if c_struct.shape == (self.n,):
            return c_struct.copy()
        if c_struct.shape != (self.structural_count,):
            raise SchemaError(
                f"cost has length {c_struct.size}, expected {self.structural_count} or {self.n}")
        out = np.zeros(self.n)
        out[:self.structural_count] = c_struct
        return out


def standardize(raw: RawProblem) -> ForwardProblem:
    """Convert a :class:`RawProblem` to standard form.

    Equalities are kept as they are. Each ``<=`` row gets a slack with
    coefficient +1, each ``>=`` row a slack with coefficient -1 (so ``b`` keeps
    its printed sign), and each finite upper bound becomes an extra ``<=`` row.
    """
    raw.validate()
    n_s = raw.num_vars
    rows, rels, rhs = [], [], []
    for con in raw.constraints:
        rows.append(con.coeffs)
        rels.append(con.relation)
        rhs.append(con.rhs)
    for j, up in enumerate(raw.upper_bounds):
        if up is not None:
            e = [0.0] * n_s
            e[j] = 1.0
            rows.append(tuple(e))
            rels.append("<=")
            rhs.append(up)
    m = len(rows)
    ineq = [i for i, r in enumerate(rels) if r != "="]
    n = n_s + len(ineq)
    A = np.zeros((m, n))
    if m:
        A[:, :n_s] = np.array(rows, dtype=float)
    slack_map, slack_sign = {}, {}
    for k, i in enumerate(ineq):
        col = n_s + k
        sign = 1.0 if rels[i] == "<=" else -1.0
        A[i, col] = sign
        slack_map[i] = col
        slack_sign[i] = sign
    integ = np.zeros(n, dtype=bool)
    integ[:n_s] = raw.integrality
    return ForwardProblem(_frozen(A), _frozen(rhs), _frozen(integ, bool),
                          dict(slack_map), n_s, dict(slack_sign), raw.name)


def problem_from_arrays(A, b, *, relations="<=", integrality=True, upper_bounds=None,
                        name="problem") -> ForwardProblem:
    """Shortcut: ``standardize`` a problem given as dense arrays."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    if isinstance(relations, str):
        relations = [relations] * A.shape[0]
    if integrality is True or integrality is False:
        integrality = [integrality] * A.shape[1]
    raw = RawProblem.from_rows(zip(A.tolist(), relations, b.tolist()), name=name,
                               num_vars=A.shape[1], upper_bounds=upper_bounds,
                               integrality=integrality)
    return standardize(raw)


@dataclass(frozen=True, eq=False)
class Observation:
    """The observed point: structural values plus the slack values they imply."""

    x_hat: np.ndarray
    feasibility_residual: float
    integrality_residual: float
    structural_count: int

    @property
    def x_struct(self) -> np.ndarray:
        return self.x_hat[:self.structural_count]

    @property
    def sigma_hat(self) -> np.ndarray:
        return self.x_hat[self.structural_count:]


def attach_observation(p: ForwardProblem, x_struct, *, feas_tol=FEAS_TOL,
                       int_tol=INT_TOL) -> Observation:
    """Complete structural values with the implied slacks and validate feasibility."""
    x_struct = np.asarray(x_struct, dtype=float).ravel()
    if x_struct.size != p.structural_count:
        raise SchemaError(
            f"observation has {x_struct.size} entries, expected {p.structural_count}")
    if not np.all(np.isfinite(x_struct)):
        raise SchemaError("observation contains non-finite values")
    neg = np.flatnonzero(x_struct < -feas_tol)
    if neg.size:
        j = int(neg[0])
        raise ObservationInfeasibleError(None, float(-x_struct[j]), variable=j)

    resid = p.b - p.A_struct @ x_struct
    x_hat = np.zeros(p.n)
    x_hat[:p.structural_count] = np.maximum(x_struct, 0.0)
    worst = 0.0
    for i in range(p.m):
        scale = 1.0 + abs(p.b[i])
        if i in p.slack_map:
            val = resid[i] / p.slack_sign[i]
            if val < -feas_tol * scale:
                raise ObservationInfeasibleError(i, float(-val))
            x_hat[p.slack_map[i]] = max(val, 0.0)
            worst = max(worst, max(-val, 0.0))
        else:
            if abs(resid[i]) > feas_tol * scale:
                raise ObservationInfeasibleError(i, float(abs(resid[i])))
            worst = max(worst, abs(resid[i]))

    int_idx = np.flatnonzero(p.integrality[:p.structural_count])
    int_res = 0.0
    if int_idx.size:
        frac = np.abs(x_struct[int_idx] - np.round(x_struct[int_idx]))
        k = int(np.argmax(frac))
        int_res = float(frac[k])
        if int_res > int_tol:
            raise ObservationFractionalError(int(int_idx[k]), float(x_struct[int_idx[k]]))
    x_hat.setflags(write=False)
    return Observation(x_hat, float(worst), int_res, p.structural_count)


@dataclass(frozen=True, eq=False)
class SupportSets:
    """Partition of the column indices by the sign of the observation."""

    I: np.ndarray
    I_bar: np.ndarray
    n: int
    structural_count: int

    @property
    def I_sigma(self) -> np.ndarray:
        return self.I[self.I >= self.structural_count]

    @property
    def I_bar_sigma(self) -> np.ndarray:
        return self.I_bar[self.I_bar >= self.structural_count]

    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[self.I] = True
        return out


def partition_support(obs, support_tol: float = SUPPORT_TOL) -> SupportSets:
    """Split indices into ``I = {i : x_i > tol}`` and its complement."""
    x = obs.x_hat if isinstance(obs, Observation) else np.asarray(obs, dtype=float)
    n_s = obs.structural_count if isinstance(obs, Observation) else x.size
    pos = x > support_tol
    return SupportSets(_frozen(np.flatnonzero(pos), int), _frozen(np.flatnonzero(~pos), int),
                       x.size, n_s)


def forward_model(p: ForwardProblem, c) -> "LpModel":
    """The LP relaxation ``min c'x, A x = b, x >= 0`` as an engine model."""
    from .lp import LpModel

    return LpModel(p.full_cost(c), p.A, ("=",) * p.m, p.b)


def reference_cost(p: ForwardProblem, c_struct) -> np.ndarray:
    """Full-length reference cost; slack entries are exactly zero."""
    c = p.full_cost(c_struct)
    c[p.structural_count:] = 0.0
    return c
