"""Group partitions, group k-sparse support families, and optimal greedy
decompositions of a vector into group-sparse pieces."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GroupPartition",
    "GksFamily",
    "EnumerationTooLarge",
    "DecompositionStalled",
    "support_of",
    "restrict",
    "complement",
    "enumerate_gks",
    "is_group_k_sparse",
    "sparsity_index",
    "optimal_decomposition",
    "load_partition",
    "save_partition",
]

# A support is a strictly increasing tuple of zero-based indices.
Support = tuple


class EnumerationTooLarge(RuntimeError):
    """Predicted support-family size exceeds the configured cap."""


class DecompositionStalled(RuntimeError):
    """The residual is nonzero but no usable family member intersects it."""


def _as_support(indices) -> Support:
    sup = tuple(sorted(int(i) for i in indices))
    if len(set(sup)) != len(sup):
        raise ValueError("support contains repeated indices")
    return sup


def _mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class GroupPartition:
    """Partition of the index set {0, ..., n-1} into disjoint non-empty groups.

    Parameters
    ----------
    n : int
        Ambient dimension.
    groups : sequence of index sequences
        The groups; together they must cover every index exactly once.
    """

    n: int
    groups: tuple

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("n must be positive")
        groups = tuple(_as_support(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        seen = set()
        for grp in groups:
            if not grp:
                raise ValueError("empty group")
            for i in grp:
                if not 0 <= i < self.n:
                    raise ValueError(f"index {i} outside [0, {self.n})")
                if i in seen:
                    raise ValueError(f"index {i} belongs to more than one group")
                seen.add(i)
        if len(seen) != self.n:
            missing = sorted(set(range(self.n)) - seen)
            raise ValueError(f"groups do not cover indices {missing[:5]}")

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def min_group_size(self) -> int:
        return min(len(g) for g in self.groups)

    @property
    def max_group_size(self) -> int:
        return max(len(g) for g in self.groups)

    def max_active_groups(self, k: int) -> int:
        """Largest number of groups a group k-sparse support can contain."""
        return k // self.min_group_size

    @classmethod
    def singletons(cls, n: int) -> "GroupPartition":
        """The trivial partition where every index is its own group."""
        return cls(n, tuple((i,) for i in range(n)))

    @classmethod
    def uniform(cls, n: int, size: int) -> "GroupPartition":
        """Contiguous groups of equal ``size`` (``size`` must divide ``n``)."""
        if size <= 0 or n % size:
            raise ValueError("group size must divide n")
        return cls(n, tuple(tuple(range(i, i + size)) for i in range(0, n, size)))

    def content_hash(self) -> str:
        """Stable hexadecimal digest of the partition content."""
        text = f"{self.n};" + ";".join(
            ",".join(map(str, g)) for g in self.groups
        )
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class GksFamily:
    """The family of group k-sparse supports over a partition.

    Members are unions of complete groups with total cardinality at most k,
    stored in lexicographic order.  The empty set is not a member.
    """

    k: int
    partition: GroupPartition
    sets: tuple
    masks: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")
        sets = tuple(_as_support(s) for s in self.sets)
        object.__setattr__(self, "sets", sets)
        group_of = {}
        for gi, grp in enumerate(self.partition.groups):
            for i in grp:
                group_of[i] = gi
        seen = set()
        for sup in sets:
            if not sup:
                raise ValueError("family members must be non-empty")
            if len(sup) > self.k:
                raise ValueError(f"member {sup} has more than k={self.k} indices")
            touched = {group_of[i] for i in sup}
            rebuilt = sorted(
                i for gi in touched for i in self.partition.groups[gi]
            )
            if list(sup) != rebuilt:
                raise ValueError(f"member {sup} is not a union of complete groups")
            if sup in seen:
                raise ValueError(f"duplicate member {sup}")
            seen.add(sup)
        object.__setattr__(self, "masks", tuple(_mask(s) for s in sets))

    def __len__(self) -> int:
        return len(self.sets)


def support_of(x) -> Support:
    """Indices where ``x`` is exactly nonzero."""
    x = np.asarray(x)
    return tuple(int(i) for i in np.nonzero(x)[0])


def restrict(x, support) -> np.ndarray:
    """The vector that agrees with ``x`` on ``support`` and is zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    idx = list(support)
    out[idx] = x[idx]
    return out


def complement(support, n: int) -> Support:
    """Sorted complement of ``support`` inside {0, ..., n-1}."""
    sup = set(support)
    return tuple(i for i in range(n) if i not in sup)


def _predicted_family_size(sizes, k: int) -> int:
    # Subset-count DP over group sizes: ways[c] = number of group subsets
    # whose cardinalities sum to exactly c.  Exact (python ints), O(g*k).
    ways = [0] * (k + 1)
    ways[0] = 1
    for s in sizes:
        for c in range(k, s - 1, -1):
            ways[c] += ways[c - s]
    return sum(ways[1:])


def enumerate_gks(partition: GroupPartition, k: int, cap: int = 10**6) -> GksFamily:
    """Enumerate every group k-sparse support over ``partition``.

    Parameters
    ----------
    partition : GroupPartition
    k : int
        Sparsity budget (total index count per support).
    cap : int
        Guard on the family size; the predicted count is computed exactly
        before enumeration and `EnumerationTooLarge` is raised if it
        exceeds ``cap``.

    Returns
    -------
    GksFamily
        Members sorted lexicographically as index tuples.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    usable = [g for g in partition.groups if len(g) <= k]
    count = _predicted_family_size([len(g) for g in usable], k)
    if count > cap:
        raise EnumerationTooLarge(
            f"family has {count} members, above the cap of {cap}"
        )
    sets = []
    ng = len(usable)

    def extend(start, chosen, budget):
        for gi in range(start, ng):
            grp = usable[gi]
            if len(grp) > budget:
                continue
            chosen.append(grp)
            sets.append(tuple(sorted(i for g in chosen for i in g)))
            extend(gi + 1, chosen, budget - len(grp))
            chosen.pop()

    extend(0, [], k)
    sets.sort()
    return GksFamily(k, partition, tuple(sets))


def is_group_k_sparse(x, family: GksFamily) -> bool:
    """Whether supp(x) is contained in some member of the family."""
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != family.partition.n:
        raise ValueError("x has the wrong shape for this family")
    sm = _mask(support_of(x))
    return any(sm & ~m == 0 for m in family.masks)


def _norm_off_support(x, norm, sup):
    from .norms import eval_norm

    rest = np.array(x, dtype=float)
    rest[list(sup)] = 0.0
    return eval_norm(norm, rest)


def _best_member(x, norm, family, skip_mask=0):
    """First lexicographic member minimizing the norm of x off the member.

    Members intersecting ``skip_mask`` are excluded.  Returns
    (index, support, value) or (None, None, None) when no member is usable.
    """
    best_i = None
    best_val = None
    for i, (sup, m) in enumerate(zip(family.sets, family.masks)):
        if m & skip_mask:
            continue
        val = _norm_off_support(x, norm, sup)
        if best_val is None or val < best_val:
            best_i, best_val = i, val
    if best_i is None:
        return None, None, None
    return best_i, family.sets[best_i], best_val


def sparsity_index(x, norm, family: GksFamily) -> float:
    """Distance, in ``norm``, from ``x`` to the set of group k-sparse vectors.

    Computed by brute force over the family: min over members of the norm
    of ``x`` outside the member.  An empty family yields the full norm.
    """
    from .norms import eval_norm

    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != family.partition.n:
        raise ValueError("x has the wrong shape for this family")
    if not family.sets:
        return eval_norm(norm, x)
    _, _, val = _best_member(x, norm, family)
    return val


def optimal_decomposition(x, norm, family: GksFamily):
    """Greedy decomposition of ``x`` into group k-sparse pieces.

    Each step selects the family member (disjoint from those already used)
    minimizing the norm of the running residual outside the member, then
    peels the residual's entries on that member off as the next piece.
    Ties go to the lexicographically smallest member.

    Returns
    -------
    list of (support, piece) pairs
        Pieces have pairwise disjoint supports and sum exactly to ``x``.

    Raises
    ------
    DecompositionStalled
        If the residual is nonzero but no usable member intersects it.
    """
    x = np.asarray(x, dtype=float)
    if not family.sets:
        raise ValueError("family is empty")
    if x.ndim != 1 or x.shape[0] != family.partition.n:
        raise ValueError("x has the wrong shape for this family")
    residual = x.copy()
    covered = 0
    pieces = []
    while True:
        supp = support_of(residual)
        if not supp:
            break
        _, sup, _ = _best_member(residual, norm, family, skip_mask=covered)
        if sup is None or not (_mask(sup) & _mask(supp)):
            raise DecompositionStalled(
                "residual support intersects no usable family member"
            )
        pieces.append((sup, restrict(residual, sup)))
        residual[list(sup)] = 0.0
        covered |= _mask(sup)
    return pieces


def load_partition(path) -> GroupPartition:
    """Read a partition file: one group per line, whitespace-separated
    zero-based indices, ``#`` starts a comment."""
    groups = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            groups.append(tuple(int(tok) for tok in line.split()))
    if not groups:
        raise ValueError(f"no groups found in {path}")
    n = 1 + max(i for g in groups for i in g)
    return GroupPartition(n, tuple(groups))


def save_partition(partition: GroupPartition, path) -> None:
    with open(path, "w") as fh:
        for grp in partition.groups:
            fh.write(" ".join(map(str, grp)) + "\n")
