"""Measurement-count planning for restricted isometries over finite
support families, via concentration of i.i.d. ensembles plus a union
bound with Sauer-style family counting.

All log-domain arithmetic runs at extended precision so the final ceiling
is stable against rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from mpmath import mp

__all__ = [
    "SampleSizeQuery",
    "SampleSizePlan",
    "c0",
    "c0_floor",
    "exact_count",
    "sauer_bound",
    "log_sauer_bound",
    "min_measurements",
    "failure_probability",
]

_DPS = 60  # working decimal digits for the planner


def c0(eps: float) -> float:
    """Concentration exponent eps^2/4 - eps^3/6 of the ensemble tail.

    Valid for 0 <= eps <= 0.75.
    """
    if not 0.0 <= eps <= 0.75:
        raise ValueError("eps must lie in [0, 0.75]")
    return eps * eps / 4.0 - eps ** 3 / 6.0


def c0_floor(eps: float) -> float:
    """Quadratic lower envelope eps^2/8 of `c0` on its valid range."""
    if not 0.0 <= eps <= 0.75:
        raise ValueError("eps must lie in [0, 0.75]")
    return eps * eps / 8.0


def exact_count(n: int, d: int) -> int:
    """Number of subsets of an n-set with at most d elements."""
    if n < 0 or d < 0:
        raise ValueError("n and d must be non-negative")
    return sum(math.comb(n, i) for i in range(min(d, n) + 1))


def sauer_bound(n: int, d: int) -> float:
    """Sauer-style upper bound (e*n/d)^d on `exact_count`."""
    return math.exp(log_sauer_bound(n, d))


def log_sauer_bound(n: int, d: int) -> float:
    """Natural log of the Sauer bound: d * (1 + ln n - ln d)."""
    if d < 1 or n < d:
        raise ValueError("need 1 <= d <= n")
    return d * (1.0 + math.log(n) - math.log(d))


@dataclass(frozen=True)
class SampleSizeQuery:
    """Inputs for the measurement planner.

    mode 'pure' counts all supports of size <= k out of n coordinates;
    mode 'group' counts group-sparse supports via (num_groups,
    max_active_groups).
    """

    n: int
    k: int
    delta: float
    zeta: float
    mode: str = "pure"
    num_groups: int | None = None
    max_active: int | None = None

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("need 1 <= k <= n")
        if not 0.0 < self.delta <= 0.75:
            raise ValueError("delta must lie in (0, 0.75]")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError("zeta must lie in (0, 1)")
        if self.mode not in ("pure", "group"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "group":
            if self.num_groups is None or self.max_active is None:
                raise ValueError("group mode needs num_groups and max_active")
            if not 1 <= self.max_active <= self.num_groups:
                raise ValueError("need 1 <= max_active <= num_groups")

    def log_family_bound(self) -> float:
        """Natural log of the Sauer bound on the support-family size."""
        if self.mode == "pure":
            return log_sauer_bound(self.n, self.k)
        return log_sauer_bound(self.num_groups, self.max_active)


@dataclass(frozen=True)
class SampleSizePlan:
    m: int
    value: float
    prefactor: float
    term_order: float
    term_family: float
    term_confidence: float
    log_family_bound: float


def min_measurements(query: SampleSizeQuery) -> SampleSizePlan:
    """Smallest integer m meeting the union-bound isometry guarantee.

    m >= (32/delta^2) * (k*ln(12/delta) + ln|family| + ln(2/zeta)), with
    the family size replaced by its Sauer bound.  Evaluated at extended
    precision; the ceiling is applied exactly once, at the end.
    """
    with mp.workdps(_DPS):
        delta = mp.mpf(query.delta)
        zeta = mp.mpf(query.zeta)
        k = mp.mpf(query.k)
        if query.mode == "pure":
            log_family = k * (1 + mp.log(query.n) - mp.log(query.k))
        else:
            s = mp.mpf(query.max_active)
            log_family = s * (1 + mp.log(query.num_groups) - mp.log(query.max_active))
        term_order = k * mp.log(12 / delta)
        term_conf = mp.log(2 / zeta)
        prefactor = 32 / delta**2
        value = prefactor * (term_order + log_family + term_conf)
        m = int(mp.ceil(value))
    return SampleSizePlan(
        m=m,
        value=float(value),
        prefactor=float(prefactor),
        term_order=float(term_order),
        term_family=float(log_family),
        term_confidence=float(term_conf),
        log_family_bound=float(log_family),
    )


def failure_probability(
    m: int,
    delta: float,
    k: int,
    family_size: float | None = None,
    *,
    log_family_size: float | None = None,
) -> float:
    """Union-bound failure probability 2*|family|*(12/delta)^k*e^(-m*delta^2/32).

    Evaluated in the log domain.  Pass either the family size itself or
    its natural log (for counts too large to represent).
    """
    if m < 1:
        raise ValueError("m must be positive")
    if not 0.0 < delta <= 0.75:
        raise ValueError("delta must lie in (0, 0.75]")
    if (family_size is None) == (log_family_size is None):
        raise ValueError("pass exactly one of family_size, log_family_size")
    if log_family_size is None:
        if family_size < 1:
            raise ValueError("family_size must be at least 1")
        log_family_size = math.log(family_size)
    log_p = (
        math.log(2.0)
        + log_family_size
        + k * math.log(12.0 / delta)
        - m * delta * delta / 32.0
    )
    if log_p > 700.0:
        return math.inf
    return math.exp(log_p)
