"""Raw and central moments of the product-normal mean.

The recursions come from plugging x^k (resp. centred powers) into the
characterising equation of the fourth-order Stein operator; the
lower-order variants apply when the mean-to-sd ratios are equal.  All
recursion coefficients are rational in the parameters, so the same
recursion doubles as an exact-arithmetic oracle: above EXACT_KMAX the
floating tables are computed exactly over rationals (IEEE doubles are
rationals) and rounded once at the end, avoiding cancellation between
the large mixed terms at high order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .errors import CaseMismatch, DegenerateVariance
from .params import DistributionCase, MeanParams, classify

#: Order above which the recursion runs in exact rational arithmetic.
EXACT_KMAX = 20


@dataclass(frozen=True)
class MomentTable:
    kind: str                      # "raw" | "central"
    values: tuple[float, ...]      # indexed 0..kmax
    provenance: str                # "recursion" | "closed_form" | "monte_carlo"
    stderr: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in ("raw", "central"):
            raise ValueError(f"kind={self.kind!r}")
        if self.values[0] != 1.0:
            raise ValueError("values[0] must be 1")


def _rational_inputs(mp: MeanParams):
    p = mp.base
    mux, muy = Fraction(p.mu_x), Fraction(p.mu_y)
    sx, sy = Fraction(p.sigma_x), Fraction(p.sigma_y)
    rho = Fraction(p.rho)
    return mux, muy, sx, sy, rho, mp.n


def raw_moments_exact(mp: MeanParams, kmax: int) -> list[Fraction]:
    """E[mean^k] for k = 0..kmax, exactly, via the four-term recursion."""
    mux, muy, sx, sy, rho, n = _rational_inputs(mp)
    rx, ry = mux / sx, muy / sy
    s_n = sx * sy / n
    om = 1 - rho ** 2
    mu = [Fraction(1)]
    for k in range(kmax):
        v = (mux * muy + s_n * rho * (4 * k + n)) * mu[k]
        if k >= 1:
            v -= s_n ** 2 * k * (
                n * (2 * rho * rx * ry - rx ** 2 - ry ** 2 + 3 * rho ** 2 - 1)
                + (k - 1) * (6 * rho ** 2 - 2)) * mu[k - 1]
        if k >= 2:
            v -= s_n ** 3 * k * (k - 1) * (
                n * (rho * (rx ** 2 + ry ** 2) - (1 + rho ** 2) * rx * ry
                     + 3 * rho * om)
                + 4 * (k - 2) * rho * om) * mu[k - 2]
        if k >= 3:
            v -= s_n ** 4 * k * (k - 1) * (k - 2) * om ** 2 * (n + k - 3) * mu[k - 3]
        mu.append(v)
    return mu


def central_moments_exact(mp: MeanParams, kmax: int) -> list[Fraction]:
    """E[(mean - E mean)^k] for k = 0..kmax, exactly."""
    mux, muy, sx, sy, rho, n = _rational_inputs(mp)
    rx, ry = mux / sx, muy / sy
    s_n = sx * sy / n
    om = 1 - rho ** 2
    m1 = mux * muy + n * s_n * rho
    mu = [Fraction(1), Fraction(0)]
    for k in range(1, kmax):
        v = 4 * rho * s_n * k * mu[k]
        v -= s_n * k * (
            s_n * (6 * rho ** 2 - 2) * (k - 1)
            + n * s_n * (2 * rho * rx * ry - rx ** 2 - ry ** 2 + 3 * rho ** 2 - 1)
            - 4 * rho * m1) * mu[k - 1]
        if k >= 2:
            v -= s_n ** 2 * k * (k - 1) * (
                (6 * rho ** 2 - 2) * m1
                + n * s_n * (rho * (rx ** 2 + ry ** 2)
                             - (1 + rho ** 2) * rx * ry + 3 * rho * om)
                + 4 * s_n * rho * om * (k - 2)) * mu[k - 2]
        if k >= 3:
            v -= s_n ** 3 * om * k * (k - 1) * (k - 2) * (
                4 * rho * m1 + s_n * om * (n + k - 3)) * mu[k - 3]
        if k >= 4:
            v -= s_n ** 4 * om ** 2 * k * (k - 1) * (k - 2) * (k - 3) * m1 * mu[k - 4]
        mu.append(v)
    return mu[:kmax + 1]


def _float_raw(mp: MeanParams, kmax: int) -> list[float]:
    p = mp.base
    rx, ry, rho, n, s_n = p.r_x, p.r_y, p.rho, mp.n, mp.s_n
    om = 1.0 - rho ** 2
    mxy = p.mu_x * p.mu_y
    mu = [1.0]
    for k in range(kmax):
        v = (mxy + s_n * rho * (4 * k + n)) * mu[k]
        if k >= 1:
            v -= s_n ** 2 * k * (
                n * (2 * rho * rx * ry - rx ** 2 - ry ** 2 + 3 * rho ** 2 - 1)
                + (k - 1) * (6 * rho ** 2 - 2)) * mu[k - 1]
        if k >= 2:
            v -= s_n ** 3 * k * (k - 1) * (
                n * (rho * (rx ** 2 + ry ** 2) - (1 + rho ** 2) * rx * ry
                     + 3 * rho * om)
                + 4 * (k - 2) * rho * om) * mu[k - 2]
        if k >= 3:
            v -= s_n ** 4 * k * (k - 1) * (k - 2) * om ** 2 * (n + k - 3) * mu[k - 3]
        mu.append(v)
    return mu


def _float_central(mp: MeanParams, kmax: int) -> list[float]:
    p = mp.base
    rx, ry, rho, n, s_n = p.r_x, p.r_y, p.rho, mp.n, mp.s_n
    om = 1.0 - rho ** 2
    m1 = p.mu_x * p.mu_y + n * s_n * rho
    mu = [1.0, 0.0]
    for k in range(1, kmax):
        v = 4 * rho * s_n * k * mu[k]
        v -= s_n * k * (
            s_n * (6 * rho ** 2 - 2) * (k - 1)
            + n * s_n * (2 * rho * rx * ry - rx ** 2 - ry ** 2 + 3 * rho ** 2 - 1)
            - 4 * rho * m1) * mu[k - 1]
        if k >= 2:
            v -= s_n ** 2 * k * (k - 1) * (
                (6 * rho ** 2 - 2) * m1
                + n * s_n * (rho * (rx ** 2 + ry ** 2)
                             - (1 + rho ** 2) * rx * ry + 3 * rho * om)
                + 4 * s_n * rho * om * (k - 2)) * mu[k - 2]
        if k >= 3:
            v -= s_n ** 3 * om * k * (k - 1) * (k - 2) * (
                4 * rho * m1 + s_n * om * (n + k - 3)) * mu[k - 3]
        if k >= 4:
            v -= s_n ** 4 * om ** 2 * k * (k - 1) * (k - 2) * (k - 3) * m1 * mu[k - 4]
        mu.append(v)
    return mu[:kmax + 1]


def raw_moments(mp: MeanParams, kmax: int) -> MomentTable:
    """Raw moments 0..kmax via the four-term recursion."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if kmax > EXACT_KMAX:
        values = tuple(float(v) for v in raw_moments_exact(mp, kmax))
    else:
        values = tuple(_float_raw(mp, kmax))
    return MomentTable("raw", values, "recursion")


def central_moments(mp: MeanParams, kmax: int) -> MomentTable:
    """Central moments 0..kmax via the five-term recursion."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if kmax > EXACT_KMAX:
        values = tuple(float(v) for v in central_moments_exact(mp, kmax))
    else:
        values = tuple(_float_central(mp, kmax))
    return MomentTable("central", values, "recursion")


def _require_equal_ratio(mp: MeanParams):
    case = classify(mp.base)
    if case not in (DistributionCase.EQUAL_RATIO, DistributionCase.ZERO_MEANS):
        raise CaseMismatch("lower-order recursions require equal mean-to-sd ratios")


def raw_moments_equal_ratio(mp: MeanParams, kmax: int) -> MomentTable:
    """Raw moments via the three-term-history recursion (equal ratios)."""
    _require_equal_ratio(mp)
    p = mp.base
    rho, n, s_n = p.rho, mp.n, mp.s_n
    om = 1.0 - rho ** 2
    mxy = p.mu_x * p.mu_y
    mu = [1.0]
    for k in range(kmax):
        v = (mxy + s_n * (rho * n + (3 * rho + 1) * k)) * mu[k]
        if k >= 1:
            v -= s_n * k * (
                mxy * (rho - 1)
                + s_n * (n * (2 * rho ** 2 + rho - 1)
                         + (1 + rho) * (3 * rho - 1) * (k - 1))) * mu[k - 1]
        if k >= 2:
            v -= s_n ** 3 * (1 + rho) * om * k * (k - 1) * (k - 2 + n) * mu[k - 2]
        mu.append(v)
    return MomentTable("raw", tuple(mu[:kmax + 1]), "recursion")


def central_moments_equal_ratio(mp: MeanParams, kmax: int) -> MomentTable:
    """Central moments via the four-term recursion (equal ratios)."""
    _require_equal_ratio(mp)
    p = mp.base
    rho, n, s_n = p.rho, mp.n, mp.s_n
    om = 1.0 - rho ** 2
    mxy = p.mu_x * p.mu_y
    m1 = mxy + n * s_n * rho
    mu = [1.0, 0.0]
    for k in range(1, kmax):
        v = k * s_n * (3 * rho + 1) * mu[k]
        v -= k * s_n * (
            (1 + rho) * (3 * rho - 1) * (k - 1) * s_n
            + mxy * (rho - 1) + n * s_n * (2 * rho ** 2 + rho - 1)
            - (3 * rho + 1) * m1) * mu[k - 1]
        if k >= 2:
            v -= s_n ** 2 * (1 + rho) * k * (k - 1) * (
                m1 * (3 * rho - 1) + n * om * s_n + om * s_n * (k - 2)) * mu[k - 2]
        if k >= 3:
            v -= s_n ** 3 * k * (k - 1) * (k - 2) * om * (1 + rho) * m1 * mu[k - 3]
        mu.append(v)
    return MomentTable("central", tuple(mu[:kmax + 1]), "recursion")


class ClosedFormFour(NamedTuple):
    raw: tuple[float, float, float, float]
    central: tuple[float, float, float, float]
    variance: float
    skewness: float
    kurtosis: float


def closed_form_four(mp: MeanParams) -> ClosedFormFour:
    """Closed-form first four raw and central moments, with variance,
    skewness mu3/mu2^1.5 and kurtosis mu4/mu2^2.

    At n = 1 the kurtosis is the corrected product-normal kurtosis.
    """
    p = mp.base
    rx, ry, rho, n = p.r_x, p.r_y, p.rho, mp.n
    s = p.s
    rxy = rx * ry
    r2sum = rx ** 2 + ry ** 2

    m1p = p.mu_x * p.mu_y + rho * s
    m2p = s ** 2 / n * (n * rxy ** 2 + r2sum + 2 * rho * (n + 1) * rxy
                        + rho ** 2 * (n + 1) + 1)
    m3p = s ** 3 / n ** 2 * (
        n ** 2 * rxy ** 3 + 3 * n * rxy * r2sum + 3 * rho * n * (n + 2) * rxy ** 2
        + 3 * rho * (n + 2) * r2sum + 3 * (n + 2) * (rho ** 2 * (n + 1) + 1) * rxy
        + rho * (n + 2) * (rho ** 2 * (n + 1) + 3))
    m4p = s ** 4 / n ** 3 * (
        n ** 3 * rxy ** 4 + 4 * rho * n ** 2 * (n + 3) * rxy ** 3
        + 6 * n ** 2 * rxy ** 2 * r2sum + 3 * n * (rx ** 4 + ry ** 4)
        + 12 * rho * n * (n + 3) * rxy * r2sum
        + 6 * n * (rho ** 2 * (n + 2) * (n + 3) + (n + 5)) * rxy ** 2
        + 6 * (n + 2) * (rho ** 2 * (n + 3) + 1) * r2sum
        + 4 * rho * (n + 2) * (n + 3) * (rho ** 2 * (n + 1) + 3) * rxy
        + rho ** 4 * (n + 1) * (n + 2) * (n + 3)
        + 6 * rho ** 2 * (n + 2) * (n + 3) + 3 * (n + 2))

    m2 = s ** 2 / n * (r2sum + 2 * rho * rxy + rho ** 2 + 1)
    m3 = 2 * s ** 3 / n ** 2 * (3 * rho * r2sum + 3 * (rho ** 2 + 1) * rxy
                                + rho * (rho ** 2 + 3))
    m4 = 3 * s ** 4 / n ** 3 * (
        n * (rx ** 4 + ry ** 4) + 4 * rho * n * rxy * r2sum
        + 2 * n * (2 * rho ** 2 + 1) * rxy ** 2
        + 2 * (rho ** 2 * (n + 6) + (n + 2)) * r2sum
        + 4 * rho * (rho ** 2 * (n + 2) + (n + 6)) * rxy
        + rho ** 4 * (n + 2) + 2 * rho ** 2 * (n + 6) + (n + 2))

    if m2 <= 0:
        raise DegenerateVariance(f"variance {m2} is not positive")
    skew = m3 / m2 ** 1.5
    kurt = m4 / m2 ** 2
    return ClosedFormFour((m1p, m2p, m3p, m4p), (0.0, m2, m3, m4),
                          m2, skew, kurt)


def skewness(mp: MeanParams) -> float:
    return closed_form_four(mp).skewness


def kurtosis(mp: MeanParams) -> float:
    return closed_form_four(mp).kurtosis
