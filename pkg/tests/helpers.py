"""Shared test oracles, kept independent of the library's algorithms.

The sorted-l1 prox reference is a deliberately simple quadratic-time
pooling scheme; the solver oracles are a scalar bisection (identity
matrix), a brute-force support enumeration (equality-constrained l1),
and an interior-point conic solve (general norms), none of which share
code with the primal-dual iteration under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def slope_prox_reference(v, weights, t):
    """O(n^2) reference prox of the sorted weighted l1 norm.

    Repeatedly rescans for adjacent mean violations and merges blocks
    until the sequence is non-increasing, then clips at zero.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(weights, dtype=float)
    n = v.shape[0]
    order = np.argsort(-np.abs(v), kind="stable")
    d = np.abs(v)[order] - t * w
    # blocks of (start, end, total)
    blocks = [[i, i, d[i]] for i in range(n)]
    changed = True
    while changed:
        changed = False
        i = 0
        while i + 1 < len(blocks):
            s0, e0, t0 = blocks[i]
            s1, e1, t1 = blocks[i + 1]
            len0 = e0 - s0 + 1
            len1 = e1 - s1 + 1
            if t0 * len1 <= t1 * len0:  # mean0 <= mean1 violates non-increase
                blocks[i] = [s0, e1, t0 + t1]
                del blocks[i + 1]
                changed = True
            else:
                i += 1
    z = np.empty(n)
    for s, e, tot in blocks:
        z[s : e + 1] = max(tot / (e - s + 1), 0.0)
    out = np.empty(n)
    out[order] = z * np.sign(v)[order]
    return out


def identity_l1_oracle(y, eps):
    """Minimize ||z||_1 subject to ||y - z||_2 <= eps for the identity matrix.

    The minimizer is a soft-thresholding of y whose threshold makes the
    constraint tight; found by scalar bisection (the residual norm is
    monotone in the threshold).
    """
    y = np.asarray(y, dtype=float)
    if np.linalg.norm(y) <= eps:
        return np.zeros_like(y)

    def soft(tau):
        return np.sign(y) * np.maximum(np.abs(y) - tau, 0.0)

    lo, hi = 0.0, float(np.max(np.abs(y)))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(y - soft(mid)) > eps:
            hi = mid
        else:
            lo = mid
    return soft(lo)


def l1_equality_bruteforce(A, y):
    """Brute-force search for min ||z||_1 subject to A z = y.

    Some l1 minimizer is a basic solution (support with linearly
    independent columns), so enumerating supports up to rank(A) and
    solving least squares on each covers the optimum.  Returns
    (objective, minimizer); only practical for tiny instances.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    rank = np.linalg.matrix_rank(A)
    tol = 1e-9 * (1.0 + np.linalg.norm(y))
    best_val = None
    best_x = None
    if np.linalg.norm(y) <= tol:
        return 0.0, np.zeros(n)
    for size in range(1, rank + 1):
        for sup in itertools.combinations(range(n), size):
            B = A[:, sup]
            z, *_ = np.linalg.lstsq(B, y, rcond=None)
            if np.linalg.norm(y - B @ z) > tol:
                continue
            val = float(np.sum(np.abs(z)))
            if best_val is None or val < best_val:
                x = np.zeros(n)
                x[list(sup)] = z
                best_val, best_x = val, x
    return best_val, best_x


def cvx_reference(A, y, eps, norm_obj):
    """Interior-point reference for min ||z||_P s.t. ||y - A z||_2 <= eps.

    norm_obj is one of the library norm dataclasses; the objective is
    rebuilt from its parameters in cvxpy atoms (sum_largest decomposition
    for the sorted weighted l1).  Returns (objective value, minimizer).
    """
    import cvxpy as cp

    from groupcs import GroupL2Norm, L1Norm, SortedL1Norm, SparseGroupNorm

    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    n = A.shape[1]
    z = cp.Variable(n)

    def group_sum(partition):
        return cp.sum(cp.hstack([cp.norm2(z[list(g)]) for g in partition.groups]))

    if isinstance(norm_obj, L1Norm):
        objective = cp.norm1(z)
    elif isinstance(norm_obj, GroupL2Norm):
        objective = group_sum(norm_obj.partition)
    elif isinstance(norm_obj, SparseGroupNorm):
        objective = (1.0 - norm_obj.mu) * cp.norm1(z) + norm_obj.mu * group_sum(
            norm_obj.partition
        )
    elif isinstance(norm_obj, SortedL1Norm):
        # sum_i w_i |z|_(i) = sum_j (w_j - w_{j+1}) * (sum of j largest |z|)
        w = list(norm_obj.weights) + [0.0]
        terms = []
        for j in range(len(norm_obj.weights)):
            diff = w[j] - w[j + 1]
            if diff > 0.0:
                terms.append(diff * cp.sum_largest(cp.abs(z), j + 1))
        objective = cp.sum(cp.hstack(terms))
    else:
        raise ValueError(f"no conic formulation for {type(norm_obj).__name__}")

    if eps == 0.0:
        constraints = [A @ z == y]
    else:
        constraints = [cp.norm2(y - A @ z) <= eps]
    problem = cp.Problem(cp.Minimize(objective), constraints)
    problem.solve(solver=cp.CLARABEL)
    if problem.status != cp.OPTIMAL:
        raise RuntimeError(f"reference solve ended with status {problem.status}")
    return float(problem.value), np.asarray(z.value)


def random_group_sparse(family, rng, unit=True):
    """Gaussian vector on a uniformly chosen family member."""
    n = family.partition.n
    sup = family.sets[rng.integers(len(family.sets))]
    x = np.zeros(n)
    vals = rng.standard_normal(len(sup))
    if unit:
        vals /= np.linalg.norm(vals)
    x[list(sup)] = vals
    return x, sup


def split_bound_terms(h, A_entries, family, norm, c_const, rng):
    """Draw a random leading support and optimally decompose the rest.

    Returns (lam0, pieces) where pieces is the decomposition of h off
    lam0 over the members disjoint from lam0.
    """
    from groupcs import GksFamily, optimal_decomposition, restrict

    lam0 = family.sets[rng.integers(len(family.sets))]
    lam0_set = set(lam0)
    disjoint = tuple(
        s for s in family.sets if not lam0_set.intersection(s)
    )
    sub = GksFamily(family.k, family.partition, disjoint)
    h_rest = np.asarray(h, dtype=float).copy()
    h_rest[list(lam0)] = 0.0
    pieces = optimal_decomposition(h_rest, norm, sub)
    return lam0, pieces
