"""Recovery error bounds for equality- and quadratically-constrained norm
minimization under certified group restricted isometries.

Two bound families are evaluated.  The single-block bound controls the
recovery error through the best group-sparse support alone and is stated
in the approximation norm (with a Euclidean corollary).  The double-block
bound controls the error through the union of the two leading supports of
the optimal decomposition and needs the two-sided Euclidean tail constant
``f`` of the norm pair.  Both reduce to the classical symmetric-interval
RIP bound in the singleton / plain-l1 case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .norms import NormPairConstants
from .sensing import GripCertificate

__all__ = [
    "NotCompressible",
    "RipConstants",
    "BoundReport",
    "BoundCheck",
    "symmetric_rip_constants",
    "single_block_bound",
    "double_block_bound",
    "evaluate_bounds",
    "verify_recovery_bound",
]

_SQRT2 = math.sqrt(2.0)
_DELTA_LIMIT = _SQRT2 - 1.0


class NotCompressible(ValueError):
    """The isometry constant is too large for the bound to apply."""


@dataclass(frozen=True)
class RipConstants:
    """Stable-recovery coefficients under a symmetric isometry interval
    [1-delta, 1+delta] of order 2k: error <= c0 * sigma / sqrt(k) + c2 * eps."""

    delta: float
    alpha: float
    c0: float
    c2: float


def symmetric_rip_constants(delta_2k: float) -> RipConstants:
    """Classical coefficients for a symmetric order-2k isometry interval.

    Requires 0 <= delta_2k < sqrt(2) - 1; outside that range the recovery
    argument breaks down and NotCompressible is raised.
    """
    if not 0.0 <= delta_2k < _DELTA_LIMIT:
        raise NotCompressible(
            f"delta={delta_2k} outside [0, sqrt(2)-1)"
        )
    alpha = _SQRT2 * delta_2k / (1.0 - delta_2k)
    c0 = 2.0 * (1.0 + alpha) / (1.0 - alpha)
    c2 = (
        4.0 * math.sqrt(1.0 + delta_2k)
        / ((1.0 - delta_2k) * (1.0 - alpha))
    )
    return RipConstants(delta=delta_2k, alpha=alpha, c0=c0, c2=c2)


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bound coefficients for one (norm pair, certificate) context.

    Fields with suffix ``_sb`` belong to the single-block bound (error
    coefficients in the approximation norm plus `_euclid` corollaries);
    ``_db`` fields belong to the double-block Euclidean bound.  ``r5_wide``
    and ``coeff_eps_db_wide`` evaluate the double-block residual factor
    with order-2k isometry constants instead of order-k (both are
    reported; the plain fields follow the order-k form).  Coefficients are
    None when the corresponding compressibility condition fails or a
    needed constant is unavailable.
    """

    # certificate snapshot
    delta_k: float
    delta_2k: float
    rho_low_k: float
    rho_high_k: float
    rho_low_2k: float
    rho_high_2k: float
    # shared ratio constants
    r1: float
    r2: float | None
    r3: float
    r4: float | None
    # single-block bound
    compressible_sb: bool = False
    coeff_sigma_sb: float | None = None
    coeff_eps_sb: float | None = None
    coeff_sigma_sb_euclid: float | None = None
    coeff_eps_sb_euclid: float | None = None
    # double-block bound
    g_factor: float | None = None
    w: float | None = None
    r5: float | None = None
    r5_wide: float | None = None
    compressible_db: bool = False
    coeff_sigma_db: float | None = None
    coeff_eps_db: float | None = None
    coeff_eps_db_wide: float | None = None
    # classical symmetric-interval reference at the certified delta_2k
    alpha: float | None = None
    c0: float | None = None
    c2: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _base_fields(consts: NormPairConstants, cert_k, cert_2k) -> dict:
    r1 = consts.b / (consts.a * consts.gamma)
    r3 = consts.b * (consts.gamma + 1.0) / (consts.a * consts.gamma)
    fields = dict(
        delta_k=cert_k.delta,
        delta_2k=cert_2k.delta,
        rho_low_k=cert_k.rho_low,
        rho_high_k=cert_k.rho_high,
        rho_low_2k=cert_2k.rho_low,
        rho_high_2k=cert_2k.rho_high,
        r1=r1,
        r2=None,
        r3=r3,
        r4=None,
    )
    if cert_k.rho_low > 0.0:
        fields["r2"] = cert_2k.delta * consts.d / (consts.c * cert_k.rho_low)
        fields["r4"] = 2.0 * consts.d * math.sqrt(cert_k.rho_high) / cert_k.rho_low
    if 0.0 <= cert_2k.delta < _DELTA_LIMIT:
        ref = symmetric_rip_constants(cert_2k.delta)
        fields.update(alpha=ref.alpha, c0=ref.c0, c2=ref.c2)
    return fields


def _check_orders(cert_k: GripCertificate, cert_2k: GripCertificate) -> None:
    if cert_2k.order != 2 * cert_k.order:
        raise ValueError(
            f"certificate orders must be (k, 2k); got "
            f"({cert_k.order}, {cert_2k.order})"
        )


def single_block_bound(
    consts: NormPairConstants,
    cert_k: GripCertificate,
    cert_2k: GripCertificate,
) -> BoundReport:
    """Error coefficients of the single-block bound.

    Compressibility requires r1 * r2 < 1 with r2 built from the order-k
    lower isometry constant.  On success the error in the approximation
    norm is bounded by coeff_sigma_sb * sigma + coeff_eps_sb * eps, and
    dividing by the global constant ``a`` gives the Euclidean corollary.
    """
    _check_orders(cert_k, cert_2k)
    fields = _base_fields(consts, cert_k, cert_2k)
    r1, r2, r3, r4 = (fields[key] for key in ("r1", "r2", "r3", "r4"))
    if r2 is not None and r1 * r2 < 1.0:
        denom = 1.0 - r1 * r2
        cs = r3 * (r2 + 1.0) / denom
        ce = r4 * (r1 + 1.0) / denom
        fields.update(
            compressible_sb=True,
            coeff_sigma_sb=cs,
            coeff_eps_sb=ce,
            coeff_sigma_sb_euclid=cs / consts.a,
            coeff_eps_sb_euclid=ce / consts.a,
        )
    return BoundReport(**fields)


def double_block_bound(
    consts: NormPairConstants,
    cert_k: GripCertificate,
    cert_2k: GripCertificate,
) -> BoundReport:
    """Error coefficients of the double-block Euclidean bound.

    Needs the tail constant ``f`` of the norm pair; compressibility
    requires w = r1 * d * g < 1 where g is the normalized order-2k
    cross-term factor.  The residual factor r5 is evaluated with order-k
    isometry constants (matching the stated form) and also with order-2k
    constants (``r5_wide`` / ``coeff_eps_db_wide``).
    """
    _check_orders(cert_k, cert_2k)
    if consts.f is None:
        raise ValueError("double-block bound needs the tail constant f")
    fields = _base_fields(consts, cert_k, cert_2k)
    r1 = fields["r1"]
    if cert_2k.rho_low > 0.0 and cert_k.rho_low > 0.0:
        g = _SQRT2 * cert_2k.delta / (consts.f * cert_2k.rho_low)
        w = r1 * consts.d * g
        r5 = 2.0 * math.sqrt(cert_k.rho_high) / cert_k.rho_low
        r5_wide = 2.0 * math.sqrt(cert_2k.rho_high) / cert_2k.rho_low
        fields.update(g_factor=g, w=w, r5=r5, r5_wide=r5_wide)
        if w < 1.0:
            denom = 1.0 - w
            fields.update(
                compressible_db=True,
                coeff_sigma_db=fields["r3"] * (g + 1.0 / consts.f) / denom,
                coeff_eps_db=r5 * (1.0 + r1 * consts.d / consts.f) / denom,
                coeff_eps_db_wide=(
                    r5_wide * (1.0 + r1 * consts.d / consts.f) / denom
                ),
            )
    return BoundReport(**fields)


def evaluate_bounds(
    consts: NormPairConstants,
    cert_k: GripCertificate,
    cert_2k: GripCertificate,
) -> BoundReport:
    """Both bound families merged into one report.

    The double-block part is filled only when the pair carries the tail
    constant ``f``.
    """
    sb = single_block_bound(consts, cert_k, cert_2k)
    if consts.f is None:
        return sb
    db = double_block_bound(consts, cert_k, cert_2k)
    merged = sb.as_dict()
    for key in (
        "g_factor",
        "w",
        "r5",
        "r5_wide",
        "compressible_db",
        "coeff_sigma_db",
        "coeff_eps_db",
        "coeff_eps_db_wide",
    ):
        merged[key] = getattr(db, key)
    return BoundReport(**merged)


@dataclass(frozen=True)
class BoundCheck:
    error: float
    bound_sb: float | None
    bound_db: float | None
    holds_sb: bool | None
    holds_db: bool | None
    slack_sb: float | None
    slack_db: float | None


def verify_recovery_bound(
    x_true,
    x_hat,
    sigma: float,
    eps: float,
    report: BoundReport,
) -> BoundCheck:
    """Compare the actual Euclidean recovery error against the evaluated
    bounds.  Slack is bound minus error (non-negative when the bound holds);
    sides whose compressibility condition failed are None."""
    err = float(np.linalg.norm(np.asarray(x_hat, float) - np.asarray(x_true, float)))
    bound_sb = bound_db = None
    holds_sb = holds_db = None
    slack_sb = slack_db = None
    if report.compressible_sb:
        bound_sb = report.coeff_sigma_sb_euclid * sigma + report.coeff_eps_sb_euclid * eps
        slack_sb = bound_sb - err
        holds_sb = slack_sb >= 0.0
    if report.compressible_db:
        bound_db = report.coeff_sigma_db * sigma + report.coeff_eps_db * eps
        slack_db = bound_db - err
        holds_db = slack_db >= 0.0
    return BoundCheck(
        error=err,
        bound_sb=bound_sb,
        bound_db=bound_db,
        holds_sb=holds_sb,
        holds_db=holds_db,
        slack_sb=slack_sb,
        slack_db=slack_db,
    )
