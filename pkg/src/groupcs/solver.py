"""Constrained norm minimization

    minimize   ||z||_P
    subject to ||y - A z||_2 <= eps

solved with a first-order primal-dual splitting that only touches the
penalty through its proximal operator and the constraint through the
Euclidean ball projection.  eps = 0 (equality data fit) runs through the
same iteration with a degenerate ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .norms import eval_norm, prox
from .sensing import MeasurementMatrix

__all__ = [
    "SolveOptions",
    "RecoveryResult",
    "project_ball",
    "operator_norm",
    "solve",
]


def project_ball(v, center, radius: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto the ball B(center, radius)."""
    if radius < 0.0:
        raise ValueError("radius must be non-negative")
    v = np.asarray(v, dtype=float)
    center = np.asarray(center, dtype=float)
    diff = v - center
    dist = float(np.linalg.norm(diff))
    if dist <= radius:
        return v.copy()
    if radius == 0.0:
        return center.copy()
    return center + diff * (radius / dist)


def operator_norm(A, iters: int = 50, tol: float = 1e-10, seed: int = 0) -> float:
    """Largest singular value via power iteration on A^T A."""
    A = np.asarray(A, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    prev = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - prev) <= tol * max(1.0, nw):
            prev = nw
            break
        prev = nw
    return float(np.sqrt(prev))


@dataclass
class SolveOptions:
    """Tolerances and step parameters for `solve`.

    tol_feasibility of None means the scale-aware default
    1e-9 * (1 + ||y||_2).  step_scale is the product sigma*tau*||A||_op^2
    (must be <= 1 for convergence); step_ratio multiplies sigma and divides
    tau, trading primal for dual step length.
    """

    max_iters: int = 100_000
    tol_feasibility: float | None = None
    tol_relative_change: float = 1e-10
    step_scale: float = 0.99
    step_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not 0.0 < self.step_scale <= 1.0:
            raise ValueError("step_scale must lie in (0, 1]")
        if self.step_ratio <= 0.0:
            raise ValueError("step_ratio must be positive")
        if self.tol_relative_change < 0.0:
            raise ValueError("tolerances must be non-negative")
        if self.tol_feasibility is not None and self.tol_feasibility < 0.0:
            raise ValueError("tolerances must be non-negative")


@dataclass(frozen=True)
class RecoveryResult:
    x_hat: np.ndarray
    iterations: int
    converged: bool
    feasibility_residual: float
    objective: float
    rank_deficient: bool


def solve(
    A,
    y,
    eps: float,
    penalty,
    opts: SolveOptions | None = None,
) -> RecoveryResult:
    """Minimize the penalty norm subject to ||y - A z||_2 <= eps.

    Parameters
    ----------
    A : MeasurementMatrix or array_like
    y : array_like, shape (m,)
    eps : float
        Data-fit radius, >= 0.  Zero enforces A z = y.
    penalty : norm object with a proximal operator
    opts : SolveOptions, optional

    Returns
    -------
    RecoveryResult
        With the minimizer estimate, iteration count, convergence flag,
        the residual max(0, ||y - A x_hat|| - eps), the attained penalty
        value, and a rank-deficiency flag for the matrix.

    Notes
    -----
    The iteration is deterministic given the inputs and options; repeated
    calls return identical results.
    """
    entries = A.entries if isinstance(A, MeasurementMatrix) else np.asarray(A, float)
    if entries.ndim != 2:
        raise ValueError("A must be a matrix")
    y = np.asarray(y, dtype=float)
    m, n = entries.shape
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    if opts is None:
        opts = SolveOptions()
    # fail fast if the penalty has no prox
    prox(penalty, np.zeros(n), 1.0)

    tol_feas = opts.tol_feasibility
    if tol_feas is None:
        tol_feas = 1e-9 * (1.0 + float(np.linalg.norm(y)))

    rank_deficient = bool(np.linalg.matrix_rank(entries) < min(m, n))

    L = operator_norm(entries, seed=opts.seed)
    if L == 0.0:
        # zero operator: any z gives the same residual, so 0 is optimal
        x_hat = np.zeros(n)
        feas = max(0.0, float(np.linalg.norm(y)) - eps)
        return RecoveryResult(
            x_hat=x_hat,
            iterations=0,
            converged=feas <= tol_feas,
            feasibility_residual=feas,
            objective=0.0,
            rank_deficient=rank_deficient,
        )

    base = np.sqrt(opts.step_scale) / L
    sigma = base * opts.step_ratio
    tau = base / opts.step_ratio

    At = entries.T
    z = np.zeros(n)
    z_bar = z
    q = np.zeros(m)
    iterations = 0
    converged = False
    for it in range(1, opts.max_iters + 1):
        iterations = it
        p = q + sigma * (entries @ z_bar)
        q = p - sigma * project_ball(p / sigma, y, eps)
        z_new = prox(penalty, z - tau * (At @ q), tau)
        z_bar = 2.0 * z_new - z
        change = np.linalg.norm(z_new - z) / max(1.0, np.linalg.norm(z_new))
        z = z_new
        if change <= opts.tol_relative_change:
            feas = max(0.0, float(np.linalg.norm(y - entries @ z)) - eps)
            if feas <= tol_feas:
                converged = True
                break
    feas = max(0.0, float(np.linalg.norm(y - entries @ z)) - eps)
    return RecoveryResult(
        x_hat=z,
        iterations=iterations,
        converged=converged,
        feasibility_residual=feas,
        objective=eval_norm(penalty, z),
        rank_deficient=rank_deficient,
    )
