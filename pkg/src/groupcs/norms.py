"""Penalty norms: evaluation, proximal operators, dual norms,
decomposability checking, and equivalence constants between norm pairs.

Supported kinds: plain l1, group l2 (sum of per-group Euclidean norms),
sparse-group (convex blend of the two), sorted-weighted l1, and
tree-structured sums of inner norms over a nested set system
(evaluation and decomposability only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import GksFamily, GroupPartition

__all__ = [
    "L1Norm",
    "GroupL2Norm",
    "SparseGroupNorm",
    "SortedL1Norm",
    "TreeNorm",
    "UnsupportedNorm",
    "UnsupportedPair",
    "NotTestable",
    "NormPairConstants",
    "DecomposabilityReport",
    "eval_norm",
    "prox",
    "dual_norm",
    "gamma_of",
    "check_decomposability",
    "pair_constants",
    "parse_norm_spec",
    "load_weights",
    "load_tree",
]


class UnsupportedNorm(ValueError):
    """The requested operation is not available for this norm kind."""


class UnsupportedPair(ValueError):
    """No analytic constants are known for this (approximation, penalty) pair."""


class NotTestable(RuntimeError):
    """The family admits no disjoint member pair, so the property is vacuous."""


@dataclass(frozen=True)
class L1Norm:
    pass


@dataclass(frozen=True)
class GroupL2Norm:
    partition: GroupPartition


@dataclass(frozen=True)
class SparseGroupNorm:
    partition: GroupPartition
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must lie in [0, 1]")


@dataclass(frozen=True)
class SortedL1Norm:
    """Sorted weighted l1: sum of weights[i] * (i-th largest |x| entry).

    Weights must be positive and non-increasing.
    """

    weights: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if not w or w[-1] <= 0.0:
            raise ValueError("weights must be positive")
        if any(w[i] < w[i + 1] for i in range(len(w) - 1)):
            raise ValueError("weights must be non-increasing")


@dataclass(frozen=True)
class TreeNorm:
    """Sum of per-set inner norms over a laminar (nested-or-disjoint) system.

    Each entry of ``sets`` is ``(tag, indices)`` with tag 'l1' or 'l2'.
    The sets must cover {0, ..., n-1} so the sum is a genuine norm.
    """

    n: int
    sets: tuple

    def __post_init__(self):
        norm_sets = []
        for tag, idx in self.sets:
            if tag not in ("l1", "l2"):
                raise ValueError(f"unknown inner norm tag {tag!r}")
            sup = tuple(sorted(int(i) for i in idx))
            if not sup:
                raise ValueError("empty set in tree system")
            if any(not 0 <= i < self.n for i in sup):
                raise ValueError("tree set index out of range")
            norm_sets.append((tag, sup))
        object.__setattr__(self, "sets", tuple(norm_sets))
        covered = set()
        as_sets = [set(s) for _, s in self.sets]
        for i, si in enumerate(as_sets):
            covered |= si
            for sj in as_sets[i + 1:]:
                inter = si & sj
                if inter and not (si <= sj or sj <= si):
                    raise ValueError("sets must be nested or disjoint")
        if covered != set(range(self.n)):
            raise ValueError("tree sets must cover every index")

    def maximal_partition(self) -> GroupPartition:
        """Partition of {0,...,n-1} into the maximal sets of the system."""
        as_sets = [set(s) for _, s in self.sets]
        maximal = []
        for i, si in enumerate(as_sets):
            if not any(j != i and si < sj for j, sj in enumerate(as_sets)):
                if si not in maximal:
                    maximal.append(si)
        return GroupPartition(self.n, tuple(tuple(sorted(s)) for s in maximal))


def _check_vector(norm, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a one-dimensional vector")
    n = _dim_of(norm)
    if n is not None and x.shape[0] != n:
        raise ValueError(f"vector has length {x.shape[0]}, norm expects {n}")
    return x


def _dim_of(norm):
    if isinstance(norm, (GroupL2Norm, SparseGroupNorm)):
        return norm.partition.n
    if isinstance(norm, SortedL1Norm):
        return len(norm.weights)
    if isinstance(norm, TreeNorm):
        return norm.n
    return None


def eval_norm(norm, x) -> float:
    """Evaluate the norm at ``x``."""
    x = _check_vector(norm, x)
    if isinstance(norm, L1Norm):
        return float(np.sum(np.abs(x)))
    if isinstance(norm, GroupL2Norm):
        return float(
            sum(np.linalg.norm(x[list(g)]) for g in norm.partition.groups)
        )
    if isinstance(norm, SparseGroupNorm):
        l1 = float(np.sum(np.abs(x)))
        gl = float(sum(np.linalg.norm(x[list(g)]) for g in norm.partition.groups))
        return (1.0 - norm.mu) * l1 + norm.mu * gl
    if isinstance(norm, SortedL1Norm):
        mags = np.sort(np.abs(x))[::-1]
        return float(np.dot(mags, norm.weights))
    if isinstance(norm, TreeNorm):
        total = 0.0
        for tag, sup in norm.sets:
            block = x[list(sup)]
            total += float(
                np.sum(np.abs(block)) if tag == "l1" else np.linalg.norm(block)
            )
        return total
    raise UnsupportedNorm(f"unknown norm kind {type(norm).__name__}")


def dual_norm(norm, w) -> float:
    """Evaluate the dual norm at ``w`` (not available for tree norms)."""
    w = _check_vector(norm, w)
    if isinstance(norm, L1Norm):
        return float(np.max(np.abs(w), initial=0.0))
    if isinstance(norm, GroupL2Norm):
        return float(
            max(np.linalg.norm(w[list(g)]) for g in norm.partition.groups)
        )
    if isinstance(norm, SparseGroupNorm):
        return max(
            _blend_dual_1d(w[list(g)], norm.mu) for g in norm.partition.groups
        )
    if isinstance(norm, SortedL1Norm):
        mags = np.sort(np.abs(w))[::-1]
        num = np.cumsum(mags)
        den = np.cumsum(norm.weights)
        return float(np.max(num / den))
    raise UnsupportedNorm(f"dual norm not available for {type(norm).__name__}")


def _blend_dual_1d(w, mu) -> float:
    """Dual norm of (1-mu)*l1 + mu*l2 on one block.

    The dual unit ball is the Minkowski sum (1-mu)*B_inf + mu*B_2, so
    w has dual norm <= r iff the l2 distance from w to the box of radius
    r*(1-mu) is at most r*mu.  Solved by bisection on r (monotone).
    """
    w = np.abs(np.asarray(w, dtype=float))
    if not w.size or not w.any():
        return 0.0
    if mu == 0.0:
        return float(w.max())
    if mu == 1.0:
        return float(np.linalg.norm(w))

    def feasible(r):
        excess = np.maximum(w - r * (1.0 - mu), 0.0)
        return np.linalg.norm(excess) <= r * mu

    lo = 0.0
    hi = min(float(w.max()) / (1.0 - mu), float(np.linalg.norm(w)) / mu)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def gamma_of(norm) -> float:
    """Decomposability constant: 1 for fully decomposable kinds, and the
    smallest-to-largest weight ratio for the sorted weighted l1 norm."""
    if isinstance(norm, SortedL1Norm):
        return norm.weights[-1] / norm.weights[0]
    if isinstance(norm, (L1Norm, GroupL2Norm, SparseGroupNorm, TreeNorm)):
        return 1.0
    raise UnsupportedNorm(f"unknown norm kind {type(norm).__name__}")


# ---------------------------------------------------------------------------
# proximal operators


def prox(norm, v, t: float) -> np.ndarray:
    """Proximal operator argmin_z 0.5*||z - v||_2^2 + t * norm(z).

    Supported for the l1, group-l2, sparse-group, and sorted-l1 kinds;
    tree norms raise UnsupportedNorm.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    v = _check_vector(norm, v)
    if isinstance(norm, L1Norm):
        return _soft_threshold(v, t)
    if isinstance(norm, GroupL2Norm):
        return _group_shrink(v, norm.partition, t)
    if isinstance(norm, SparseGroupNorm):
        z = _soft_threshold(v, (1.0 - norm.mu) * t)
        return _group_shrink(z, norm.partition, norm.mu * t)
    if isinstance(norm, SortedL1Norm):
        return _sorted_l1_prox(v, np.asarray(norm.weights) * t)
    raise UnsupportedNorm(f"prox not available for {type(norm).__name__}")


def _soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _group_shrink(v, partition, t):
    out = np.zeros_like(v)
    if t == 0.0:
        return v.copy()
    for g in partition.groups:
        idx = list(g)
        nv = np.linalg.norm(v[idx])
        if nv > t:
            out[idx] = (1.0 - t / nv) * v[idx]
    return out


def _sorted_l1_prox(v, thresholds):
    """Prox of the sorted weighted l1 norm with per-rank ``thresholds``.

    Reduces to a non-increasing isotonic regression of (sorted |v| minus
    thresholds), clipped at zero, carried out with a linear-time pooling
    stack over adjacent blocks.
    """
    n = v.shape[0]
    order = np.argsort(-np.abs(v), kind="stable")
    u = np.abs(v)[order]
    d = u - thresholds
    # Pool adjacent blocks whose running means violate non-increase.
    start = np.empty(n, dtype=int)
    total = np.empty(n, dtype=float)
    length = np.empty(n, dtype=int)
    top = -1
    for i in range(n):
        top += 1
        start[top] = i
        total[top] = d[i]
        length[top] = 1
        while top > 0 and total[top - 1] * length[top] <= total[top] * length[top - 1]:
            total[top - 1] += total[top]
            length[top - 1] += length[top]
            top -= 1
    z_sorted = np.empty(n, dtype=float)
    for b in range(top + 1):
        mean = total[b] / length[b]
        z_sorted[start[b]: start[b] + length[b]] = max(mean, 0.0)
    out = np.empty(n, dtype=float)
    out[order] = z_sorted * np.sign(v)[order]
    return out


# ---------------------------------------------------------------------------
# decomposability


@dataclass(frozen=True)
class DecomposabilityReport:
    mode: str
    gamma: float
    trials: int
    violations: int
    worst_slack: float


def _disjoint_pairs(family: GksFamily):
    pairs = [
        (i, j)
        for i in range(len(family.masks))
        for j in range(i + 1, len(family.masks))
        if not family.masks[i] & family.masks[j]
    ]
    return pairs


def check_decomposability(
    norm,
    family: GksFamily,
    trials: int = 1000,
    seed: int = 0,
    mode: str = "auto",
    tol: float = 1e-12,
) -> DecomposabilityReport:
    """Sample disjointly supported pairs and test additivity of the norm.

    In ``strict`` mode the check is equality ||u+v|| = ||u|| + ||v|| to
    relative tolerance; in ``gamma`` mode it is the one-sided inequality
    ||u+v|| >= ||u|| + gamma*||v||.  ``auto`` selects strict when the
    norm's gamma equals one and gamma otherwise.

    Raises NotTestable when the family has no pair of disjoint members.
    """
    gamma = gamma_of(norm)
    if mode == "auto":
        mode = "strict" if gamma == 1.0 else "gamma"
    if mode not in ("strict", "gamma"):
        raise ValueError(f"unknown mode {mode!r}")
    pairs = _disjoint_pairs(family)
    if not pairs:
        raise NotTestable("family contains no two disjoint members")
    rng = np.random.default_rng(seed)
    n = family.partition.n
    violations = 0
    worst = math.inf
    for _ in range(trials):
        i, j = pairs[rng.integers(len(pairs))]
        u = np.zeros(n)
        v = np.zeros(n)
        u[list(family.sets[i])] = rng.standard_normal(len(family.sets[i]))
        v[list(family.sets[j])] = rng.standard_normal(len(family.sets[j]))
        nu, nv, nuv = eval_norm(norm, u), eval_norm(norm, v), eval_norm(norm, u + v)
        if mode == "strict":
            slack = -abs(nuv - (nu + nv))
            scale = 1.0 + nu + nv
        else:
            slack = nuv - (nu + gamma * nv)
            scale = 1.0 + nu + gamma * nv
        if slack < -tol * scale:
            violations += 1
        worst = min(worst, slack)
    return DecomposabilityReport(
        mode=mode,
        gamma=gamma,
        trials=trials,
        violations=violations,
        worst_slack=worst,
    )


# ---------------------------------------------------------------------------
# norm-pair equivalence constants


@dataclass(frozen=True)
class NormPairConstants:
    """Equivalence constants between an approximation norm A and a penalty
    norm P over the group k-sparse cone.

    a : global lower bound on ||x||_A / ||x||_P over all x
    b : upper bound on ||x||_A / ||x||_P over group k-sparse x
    c : lower bound on ||x||_A / ||x||_2 over group k-sparse x
    d : upper bound on ||x||_A / ||x||_2 over group k-sparse x
    gamma : decomposability constant of the penalty
    f : two-sided Euclidean tail constant when known, else None
    """

    a: float
    b: float
    c: float
    d: float
    gamma: float
    f: float | None = None


def pair_constants(
    approx,
    penalty,
    family: GksFamily,
    mode: str = "analytic",
    trials: int = 200,
    seed: int = 0,
) -> NormPairConstants:
    """Constants (a, b, c, d, gamma, f) for an (approximation, penalty) pair.

    ``analytic`` mode returns closed-form values for the supported pairs
    (l1/l1, group-l2/group-l2, sparse-group/sparse-group with matching
    blend, l1/sorted-l1); other pairs raise UnsupportedPair.  ``empirical``
    mode estimates the extrema by sampling vectors supported on the family
    members plus targeted extremal candidates; the estimates are one-sided
    (maxima from below, minima from above).
    """
    if mode == "analytic":
        return _analytic_constants(approx, penalty, family)
    if mode == "empirical":
        return _empirical_constants(approx, penalty, family, trials, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _analytic_constants(approx, penalty, family):
    k = family.k
    part = family.partition
    gamma = gamma_of(penalty)
    if isinstance(approx, L1Norm) and isinstance(penalty, L1Norm):
        rk = math.sqrt(k)
        return NormPairConstants(1.0, 1.0, 1.0, rk, gamma, f=rk)
    if isinstance(approx, GroupL2Norm) and isinstance(penalty, GroupL2Norm):
        if approx.partition != penalty.partition:
            raise UnsupportedPair("group norms over different partitions")
        smax = part.max_active_groups(k)
        return NormPairConstants(1.0, 1.0, 1.0, math.sqrt(smax), gamma)
    if isinstance(approx, SparseGroupNorm) and isinstance(penalty, SparseGroupNorm):
        if approx.partition != penalty.partition or approx.mu != penalty.mu:
            raise UnsupportedPair("sparse-group norms must match exactly")
        mu = penalty.mu
        smax = part.max_active_groups(k)
        d = (1.0 - mu) * math.sqrt(part.max_group_size) + mu * math.sqrt(smax)
        return NormPairConstants(1.0, 1.0, 1.0, d, gamma)
    if isinstance(approx, L1Norm) and isinstance(penalty, SortedL1Norm):
        w = penalty.weights
        return NormPairConstants(
            1.0 / w[0], 1.0 / w[-1], 1.0, math.sqrt(k), gamma
        )
    raise UnsupportedPair(
        f"no analytic constants for ({type(approx).__name__}, "
        f"{type(penalty).__name__})"
    )


def _empirical_constants(approx, penalty, family, trials, seed):
    rng = np.random.default_rng(seed)
    n = family.partition.n

    def candidates_on(sup):
        idx = list(sup)
        out = []
        for i in idx:
            e = np.zeros(n)
            e[i] = 1.0
            out.append(e)
        const = np.zeros(n)
        const[idx] = 1.0
        out.append(const)
        for g in family.partition.groups:
            if set(g) <= set(sup):
                gv = np.zeros(n)
                gv[list(g)] = 1.0
                out.append(gv)
        for _ in range(trials):
            z = np.zeros(n)
            z[idx] = rng.standard_normal(len(idx))
            out.append(z)
        return out

    a = math.inf
    b = 0.0
    c = math.inf
    d = 0.0
    for sup in family.sets:
        for z in candidates_on(sup):
            na = eval_norm(approx, z)
            np_ = eval_norm(penalty, z)
            nz = float(np.linalg.norm(z))
            if np_ > 0.0:
                a = min(a, na / np_)
                b = max(b, na / np_)
            if nz > 0.0:
                c = min(c, na / nz)
                d = max(d, na / nz)
    # the global ratio floor also sees unrestricted vectors
    for _ in range(trials):
        z = rng.standard_normal(n)
        np_ = eval_norm(penalty, z)
        if np_ > 0.0:
            a = min(a, eval_norm(approx, z) / np_)
    ones = np.ones(n)
    if eval_norm(penalty, ones) > 0.0:
        a = min(a, eval_norm(approx, ones) / eval_norm(penalty, ones))
    f = None
    if isinstance(approx, L1Norm) and isinstance(penalty, L1Norm):
        f = math.sqrt(family.k)
    return NormPairConstants(a, b, c, d, gamma_of(penalty), f=f)


# ---------------------------------------------------------------------------
# config-string parsing


def parse_norm_spec(text: str, partition=None, n=None):
    """Build a norm from a config token.

    Grammar: ``l1`` | ``gl`` | ``sgl:<mu>`` | ``slope:<weight-file>`` |
    ``tree:<tree-file>``.  Group kinds need ``partition``; the sorted
    weighted l1 file must provide exactly ``n`` weights when n is given.
    """
    text = text.strip()
    if text == "l1":
        return L1Norm()
    if text == "gl":
        if partition is None:
            raise ValueError("gl norm needs a partition")
        return GroupL2Norm(partition)
    if text.startswith("sgl:"):
        if partition is None:
            raise ValueError("sgl norm needs a partition")
        return SparseGroupNorm(partition, float(text[4:]))
    if text.startswith("slope:"):
        weights = load_weights(text[6:])
        if n is not None and len(weights) != n:
            raise ValueError(
                f"weight file has {len(weights)} entries, expected {n}"
            )
        return SortedL1Norm(weights)
    if text.startswith("tree:"):
        return load_tree(text[5:], n)
    raise ValueError(f"cannot parse norm spec {text!r}")


def load_weights(path) -> tuple:
    """Read a weight file: whitespace-separated positive reals,
    non-increasing; ``#`` starts a comment."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0]
            vals.extend(float(tok) for tok in line.split())
    return tuple(vals)


def load_tree(path, n: int | None = None) -> TreeNorm:
    """Read a tree-norm file: one set per line as ``<l1|l2> i j k ...``.

    The ambient dimension is inferred as the largest index plus one
    unless ``n`` is given.
    """
    sets = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            sets.append((toks[0], tuple(int(t) for t in toks[1:])))
    if n is None:
        n = 1 + max((i for _, idx in sets for i in idx), default=-1)
    return TreeNorm(n, tuple(sets))
