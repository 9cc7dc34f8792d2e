"""Worked example and seeded random instances.

Random instances are built around an anchor integer point: every row is
given a small non-negative slack at it, so the region is never empty and some
rows are tight. Upper bounds keep the integer lattice small enough for the
enumeration oracle.

Two observation modes are offered. ``"planted"`` (default) draws a hidden
cost, takes a forward optimum under it as ``x_hat`` and perturbs the hidden
cost to obtain ``c_ring``; this mimics an observed solution produced by a
solver run on a slightly different objective. ``"anchor"`` uses the anchor
point itself with an unrelated ``c_ring``, which gives harder inverse
problems.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .milp import solve_milp
from .problem import (ForwardProblem, Observation, RawProblem, attach_observation,
                      forward_model, standardize)

SEED_ENV = "INVOPT_SEED"
DEFAULT_SEED = 20240917

EX1_ROWS = (((-4, -3), "<=", -19),
            ((-1, -3), "<=", -8),
            ((6, 1), "<=", 30),
            ((-3, 5), "<=", 17))
EX1_REFERENCE = (3.0, 1.0)
EX1_OBSERVATION = (4.0, 2.0)


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    """Seed from ``INVOPT_SEED`` when set, else ``default``."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


def ex1_raw(integer: bool = True) -> RawProblem:
    """Two-variable example polytope with eight integer points."""
    return RawProblem.from_rows(EX1_ROWS, name="ex1", integrality=True if integer else None)


def ex1(integer: bool = True) -> ForwardProblem:
    return standardize(ex1_raw(integer))


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    raw: RawProblem
    problem: ForwardProblem
    observation: Observation
    c_ring: np.ndarray          # structural reference cost
    group: str = ""

    @property
    def x_struct(self) -> np.ndarray:
        return self.observation.x_struct


def _nonzero_cost(rng, n_s, cost):
    c = rng.integers(-cost, cost + 1, size=n_s).astype(float)
    while not c.any():
        c = rng.integers(-cost, cost + 1, size=n_s).astype(float)
    return c


def random_instance(rng: np.random.Generator, n_s: int = 3, m: int = 3, upper: int = 6, *,
                    coef: int = 5, max_slack: int = 3, cost: int = 5, noise: int = 2,
                    mode: str = "planted", name: str = "rand", group: str = "",
                    integer_mask=None) -> Instance:
    """Bounded pure-integer (or mixed) instance with a feasible ``x_hat``.

    Rows have integer coefficients in ``[-coef, coef]``; each row's slack at
    the anchor point is drawn from ``{0, ..., max_slack}``. Every variable
    gets the upper bound ``upper``. Costs have integer entries in
    ``[-cost, cost]``; in planted mode ``c_ring`` adds integer noise in
    ``[-noise, noise]`` to the hidden cost.
    """
    if mode not in ("planted", "anchor"):
        raise ValueError(f"unknown mode {mode!r}")
    x = rng.integers(0, upper + 1, size=n_s).astype(float)
    rows = []
    for _ in range(m):
        a = rng.integers(-coef, coef + 1, size=n_s)
        while not a.any():
            a = rng.integers(-coef, coef + 1, size=n_s)
        slack = int(rng.integers(0, max_slack + 1))
        rows.append((tuple(float(v) for v in a), "<=", float(a @ x + slack)))
    integ = True if integer_mask is None else list(integer_mask)
    raw = RawProblem.from_rows(rows, name=name, num_vars=n_s,
                               upper_bounds=[float(upper)] * n_s, integrality=integ)
    p = standardize(raw)
    if mode == "anchor":
        return Instance(name, raw, p, attach_observation(p, x), _nonzero_cost(rng, n_s, cost),
                        group)
    hidden = _nonzero_cost(rng, n_s, cost)
    res = solve_milp(forward_model(p, hidden), p.integrality, incumbent=None)
    x_opt = res.x[:n_s].copy()
    mask = p.integrality[:n_s]
    x_opt[mask] = np.round(x_opt[mask])
    c_ring = hidden + rng.integers(-noise, noise + 1, size=n_s)
    while not c_ring.any():
        c_ring = hidden + rng.integers(-noise, noise + 1, size=n_s)
    return Instance(name, raw, p, attach_observation(p, x_opt), c_ring.astype(float), group)


SUITE_SIZES = (("small", 3, 3, 6), ("medium", 5, 4, 5), ("large", 7, 5, 4))


def random_suite(count_per_size: int = 20, seed: Optional[int] = None, sizes=SUITE_SIZES,
                 mode: str = "planted"):
    """``count_per_size`` instances for each ``(group, n_s, m, upper)`` in ``sizes``."""
    rng = np.random.default_rng(seed_from_env() if seed is None else seed)
    out = []
    for group, n_s, m, upper in sizes:
        for k in range(count_per_size):
            out.append(random_instance(rng, n_s, m, upper, mode=mode,
                                       name=f"{group}-{k:02d}", group=group))
    return out
