"""Densities of the product Z = XY and of the zero-mean average, plus the
linear ODE residual the density satisfies.

The product density is a double infinite series of Bessel K terms under an
exponential prefactor.  Terms can be negative (odd powers of possibly
negative linear-combination coefficients), and raw products overflow for
moderate arguments, so everything is accumulated as signed log-magnitudes:
positive and negative partial sums are kept separately in log space and
combined once at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

from .bessel import BesselOrder, log_bessel_k_sequence
from .errors import CaseMismatch, NotConverged, SingularPoint
from .params import MeanParams, ProductNormalParams

_LOG_DBL_MIN = math.log(np.finfo(float).tiny)

# Nats of cancellation between the positive and negative partial sums
# beyond which double precision is abandoned for the high-precision path.
_CANCEL_NATS = 16.0


class _LazyLogK:
    """Integer-order log K_nu(x) extended on demand by the forward
    recurrence; avoids paying for the worst-case order budget on every
    density evaluation."""

    def __init__(self, x: float):
        self.x = x
        self.logs = [math.log(special.kve(0, x)) - x,
                     math.log(special.kve(1, x)) - x]

    def upto(self, order: int) -> np.ndarray:
        while len(self.logs) <= order:
            nu = len(self.logs) - 1
            self.logs.append(np.logaddexp(
                self.logs[-2], math.log(2 * nu / self.x) + self.logs[-1]))
        return np.asarray(self.logs[:order + 1])


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the infinite series.

    The outer sum stops once two consecutive outer blocks contribute less
    than ``rel_tol`` of the running sum (two-block lookahead guards against
    accidental single-block cancellation); ``max_outer`` caps the outer
    index.
    """

    rel_tol: float = 1e-14
    max_outer: int = 300

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError(f"rel_tol={self.rel_tol} outside (0, 1)")
        if self.max_outer < 1:
            raise ValueError(f"max_outer={self.max_outer} must be >= 1")


@dataclass(frozen=True)
class DensityValue:
    """A density value carried as (log|value|, sign).

    ``sign`` is +1 for every converged value that escapes this module;
    a converged -1 would indicate an internal accumulation error.
    """

    log_abs: float
    sign: int
    converged: bool
    terms_used: int

    @property
    def value(self) -> float:
        return self.sign * math.exp(self.log_abs)


def _signed_logsumexp(logs: list[float], signs: list[int]) -> tuple[float, int]:
    pos = [l for l, s in zip(logs, signs) if s > 0]
    neg = [l for l, s in zip(logs, signs) if s < 0]
    lp = special.logsumexp(np.array(pos)) if pos else -np.inf
    ln = special.logsumexp(np.array(neg)) if neg else -np.inf
    if ln == -np.inf:
        return lp, 1
    if lp == -np.inf:
        return ln, -1
    if lp >= ln:
        delta = -math.expm1(ln - lp)
        return lp + math.log(delta) if delta > 0 else -np.inf, 1
    return ln + math.log(-math.expm1(lp - ln)), -1


def pdf_product(p: ProductNormalParams, x: float,
                ctl: SeriesControl = SeriesControl()) -> DensityValue:
    """Density of Z = XY at x != 0, by the Bessel double series.

    Raises SingularPoint at x = 0 (the density has a log singularity
    there) and NotConverged if ``ctl.max_outer`` outer blocks do not
    suffice.
    """
    log_pref, logs, signs, terms = _series_parts(p, x, ctl)
    return _combine_series(p, float(x), ctl, log_pref, logs, signs, terms)


def _series_parts(p: ProductNormalParams, x: float,
                  ctl: SeriesControl) -> tuple[float, np.ndarray, np.ndarray, int]:
    """Accumulate the double series as signed log-magnitude terms."""
    x = float(x)
    if x == 0:
        raise SingularPoint("the product density diverges logarithmically at x = 0")
    om = 1.0 - p.rho ** 2
    s = p.s
    log_pref = -(p.r_x ** 2 + p.r_y ** 2
                 - 2 * p.rho * (x + p.mu_x * p.mu_y) / s) / (2 * om)
    c_x = p.mu_x / p.sigma_x ** 2 - p.rho * p.mu_y / s
    c_y = p.mu_y / p.sigma_y ** 2 - p.rho * p.mu_x / s
    w = abs(x) / (om * s)
    log_k = _LazyLogK(w)
    log_ax = math.log(abs(x))
    log_sx, log_sy = math.log(p.sigma_x), math.log(p.sigma_y)
    log_cx = math.log(abs(c_x)) if c_x else -np.inf
    log_cy = math.log(abs(c_y)) if c_y else -np.inf
    sign_x = 1 if x > 0 else -1

    log_blocks: list[np.ndarray] = []
    sign_blocks: list[np.ndarray] = []
    terms = 0
    run_max = -np.inf
    small_blocks = 0
    converged = False
    log_tol = math.log(ctl.rel_tol)
    for n in range(ctl.max_outer + 1):
        k_vals = log_k.upto(n)
        m = np.arange(2 * n + 1)
        keep = np.ones(2 * n + 1, dtype=bool)
        if c_x == 0:
            keep &= m == 0
        if c_y == 0:
            keep &= m == 2 * n
        m = m[keep]
        if m.size == 0:
            # a vanished linear-combination coefficient terminates the
            # series exactly (all further blocks are identically zero)
            converged = True
            break
        # (2n choose m)/(2n)! = 1/(m!(2n-m)!)
        lt = (n * log_ax + (m - n - 1) * log_sx - math.log(math.pi)
              - (2 * n + 0.5) * math.log(om) - (m - n + 1) * log_sy
              - special.gammaln(m + 1) - special.gammaln(2 * n - m + 1)
              + (m * log_cx if c_x != 0 else 0.0)
              + ((2 * n - m) * log_cy if c_y != 0 else 0.0)
              + k_vals[np.abs(m - n)])
        sg = np.ones(m.size, dtype=int)
        if sign_x < 0:
            sg[m % 2 == 1] *= -1
        if c_x < 0:
            sg[m % 2 == 1] *= -1
        if c_y < 0:
            sg[(2 * n - m) % 2 == 1] *= -1
        log_blocks.append(lt)
        sign_blocks.append(sg)
        terms += m.size
        block_max = float(lt.max())
        run_max = max(run_max, block_max)
        if block_max < log_tol + run_max:
            small_blocks += 1
            if small_blocks >= 2:
                converged = True
                break
        else:
            small_blocks = 0
    if not converged:
        raise NotConverged(
            f"product density series: max_outer={ctl.max_outer} blocks "
            f"insufficient at x={x}"
        )
    return (log_pref, np.concatenate(log_blocks),
            np.concatenate(sign_blocks), terms)


def _combine_series(p: ProductNormalParams, x: float, ctl: SeriesControl,
                    log_pref: float, logs: np.ndarray, signs: np.ndarray,
                    terms: int) -> DensityValue:
    log_sum, sign = _signed_logsumexp(list(logs), list(signs))
    pos = logs[signs > 0]
    lead = float(special.logsumexp(pos)) if pos.size else -np.inf
    cancel = lead - log_sum
    if sign < 0 or not math.isfinite(log_sum) or cancel > _CANCEL_NATS:
        # positive and negative partial sums agree to too many digits for
        # double precision to resolve their difference; recompute the sum
        # directly with enough working precision to absorb the cancellation
        return _pdf_product_mp(p, x, ctl,
                               cancel if math.isfinite(cancel) else 80.0)
    return DensityValue(log_pref + log_sum, sign, True, terms)


def _pdf_product_mp(p: ProductNormalParams, x: float, ctl: SeriesControl,
                    cancel_nats: float) -> DensityValue:
    """Severe-cancellation fallback: sum the double series in arbitrary
    precision, retrying with more digits if the cancellation estimate was
    itself corrupted by roundoff."""
    dps = 30 + int(cancel_nats / math.log(10.0))
    for _ in range(4):
        with mpmath.workdps(dps):
            sx, sy = mpmath.mpf(p.sigma_x), mpmath.mpf(p.sigma_y)
            rho, xm = mpmath.mpf(p.rho), mpmath.mpf(x)
            mx, my = mpmath.mpf(p.mu_x), mpmath.mpf(p.mu_y)
            s, om = sx * sy, 1 - mpmath.mpf(p.rho) ** 2
            log_pref = -((mx / sx) ** 2 + (my / sy) ** 2
                         - 2 * rho * (xm + mx * my) / s) / (2 * om)
            c_x = mx / sx ** 2 - rho * my / s
            c_y = my / sy ** 2 - rho * mx / s
            u = mpmath.sign(xm) * c_x  # sign of x enters through odd m
            ax = abs(xm)
            w = ax / (om * s)
            bessel = [mpmath.besselk(0, w), mpmath.besselk(1, w)]
            total = run_max = mpmath.mpf(0)
            terms = small_blocks = 0
            converged = False
            for n in range(ctl.max_outer + 1):
                while len(bessel) <= n:
                    nu = len(bessel) - 1
                    bessel.append(bessel[-2] + 2 * nu / w * bessel[-1])
                block = block_max = mpmath.mpf(0)
                for m in range(2 * n + 1):
                    if (c_x == 0 and m > 0) or (c_y == 0 and m < 2 * n):
                        continue
                    t = (ax ** n * u ** m * c_y ** (2 * n - m)
                         * sx ** (m - n - 1) * sy ** (-(m - n + 1))
                         / (mpmath.pi * om ** (2 * n + mpmath.mpf(1) / 2)
                            * mpmath.factorial(m)
                            * mpmath.factorial(2 * n - m))
                         * bessel[abs(m - n)])
                    block += t
                    block_max = max(block_max, abs(t))
                    terms += 1
                if c_x == 0 or c_y == 0:
                    if block == 0 and n > 0:
                        converged = True
                        break
                total += block
                run_max = max(run_max, block_max)
                if block_max < ctl.rel_tol * run_max:
                    small_blocks += 1
                    if small_blocks >= 2:
                        converged = True
                        break
                else:
                    small_blocks = 0
            if not converged:
                raise NotConverged(
                    f"product density series: max_outer={ctl.max_outer} "
                    f"blocks insufficient at x={x}"
                )
            enough = (total > 0 and
                      run_max < abs(total) * mpmath.mpf(10) ** (dps - 18))
            if enough:
                log_abs = float(log_pref + mpmath.log(total))
                return DensityValue(log_abs, 1, True, terms)
        dps = 2 * dps + 10
    raise NotConverged(
        f"product density series: cancellation at x={x} exceeds the "
        f"precision retry budget"
    )


def pdf_single_zero_mean(p: ProductNormalParams, x: float,
                         ctl: SeriesControl = SeriesControl()) -> DensityValue:
    """Density of Z when one mean is zero and rho = 0: a single series.

    Accepts either mu_y = 0 or mu_x = 0 (the product is symmetric in the
    factors); raises CaseMismatch otherwise.
    """
    if p.rho != 0:
        raise CaseMismatch("single-series density requires rho = 0")
    if p.mu_y == 0:
        mu, s_cubed, s_lin = p.mu_x, p.sigma_x, p.sigma_y
    elif p.mu_x == 0:
        mu, s_cubed, s_lin = p.mu_y, p.sigma_y, p.sigma_x
    else:
        raise CaseMismatch("single-series density requires one zero mean")
    x = float(x)
    if x == 0:
        raise SingularPoint("the product density diverges logarithmically at x = 0")
    s = p.s
    w = abs(x) / s
    log_k = _LazyLogK(w)
    log_mu = math.log(abs(mu)) if mu else -np.inf
    terms = []
    for n in range(ctl.max_outer + 1):
        lt = ((2 * n * log_mu if n else 0.0) + n * math.log(abs(x))
              - math.lgamma(2 * n + 1) - 3 * n * math.log(s_cubed)
              - n * math.log(s_lin) + float(log_k.upto(n)[n]))
        terms.append(lt)
        if mu == 0:
            break
        if n >= 2 and lt < math.log(ctl.rel_tol) + max(terms):
            break
    else:
        raise NotConverged(
            f"single-series density: max_outer={ctl.max_outer} terms "
            f"insufficient at x={x}"
        )
    log_base = -math.log(math.pi * s) - mu ** 2 / (2 * s_cubed ** 2)
    return DensityValue(log_base + special.logsumexp(np.array(terms)),
                        1, True, len(terms))


def pdf_mean_zero_means(mp: MeanParams, x: float) -> DensityValue:
    """Closed-form density of the mean of n copies when both means are zero.

    Finite everywhere for n >= 2 (at x = 0 the power prefactor balances
    the Bessel singularity); for n = 1 the log singularity at x = 0
    raises SingularPoint.
    """
    p = mp.base
    if p.mu_x != 0 or p.mu_y != 0:
        raise CaseMismatch("closed-form mean density requires zero means")
    n = mp.n
    om = 1.0 - p.rho ** 2
    s_n = mp.s_n
    c = 1.0 / (s_n * om)
    x = float(x)
    log_base = ((1 - n) / 2 * math.log(2) - (n + 1) / 2 * math.log(s_n)
                - 0.5 * math.log(math.pi * om) - math.lgamma(n / 2))
    if x == 0:
        if n == 1:
            raise SingularPoint("the n=1 density diverges logarithmically at x = 0")
        nu = (n - 1) / 2
        # lim |x|^nu K_nu(c|x|) = Gamma(nu) 2^(nu-1) / c^nu
        log_lim = math.lgamma(nu) + (nu - 1) * math.log(2) - nu * math.log(c)
        return DensityValue(log_base + log_lim, 1, True, 1)
    log_k = log_bessel_k_sequence(BesselOrder(n - 1), c * abs(x))[-1]
    log_val = (log_base + (n - 1) / 2 * math.log(abs(x))
               + p.rho * x * c + log_k)
    return DensityValue(log_val, 1, True, 1)


def mean_zero_means_derivatives(mp: MeanParams, x: float,
                                order: int = 4, dps: int = 20) -> list[float]:
    """Density of the zero-mean average and its derivatives up to ``order``.

    Differentiates the closed form in high-precision arithmetic, so the
    returned derivatives are accurate to well below double roundoff.
    """
    p = mp.base
    if p.mu_x != 0 or p.mu_y != 0:
        raise CaseMismatch("closed-form derivatives require zero means")
    if x == 0:
        raise SingularPoint("derivatives at the singular point are undefined")
    n = mp.n
    with mpmath.workdps(dps):
        om = 1 - mpmath.mpf(p.rho) ** 2
        s_n = mpmath.mpf(p.sigma_x) * mpmath.mpf(p.sigma_y) / n
        c = 1 / (s_n * om)
        pref = (mpmath.mpf(2) ** mpmath.mpf((1 - n) / 2)
                / (s_n ** (mpmath.mpf(n + 1) / 2)
                   * mpmath.sqrt(mpmath.pi * om) * mpmath.gamma(mpmath.mpf(n) / 2)))

        # |t| never changes sign near x != 0, so fix the sign to keep f
        # analytic and extract all derivatives from one Taylor expansion
        sgn = mpmath.sign(mpmath.mpf(x))

        def f(t):
            return (pref * (sgn * t) ** (mpmath.mpf(n - 1) / 2)
                    * mpmath.exp(p.rho * t * c)
                    * mpmath.besselk(mpmath.mpf(n - 1) / 2, c * sgn * t))

        coeffs = mpmath.taylor(f, mpmath.mpf(x), order)
        return [float(ck * mpmath.factorial(k)) for k, ck in enumerate(coeffs)]


# 7-point central stencil weights (step h), orders 1..4.
_STENCILS = {
    1: (np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0, 1, 6),
    2: (np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0, 2, 6),
    3: (np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0, 3, 4),
    4: (np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0, 4, 4),
}


def finite_difference_derivatives(p: ProductNormalParams, x: float,
                                 ctl: SeriesControl = SeriesControl(),
                                 h: float | None = None) -> list[float]:
    """Density of Z and its first four derivatives by Richardson-extrapolated
    central differences of the series density.

    The default step h = max(1e-2, 1e-2*|x|) was tuned against the
    zero-mean closed form; smaller steps are noise-dominated for the
    fourth derivative of a series-evaluated function.
    """
    if h is None:
        h = max(1e-2, 1e-2 * abs(x))

    def val(t):
        if t == 0:
            raise SingularPoint("finite-difference stencil crosses x = 0")
        return pdf_product(p, t, ctl).value

    out = [val(x)]
    f_h = np.array([val(x + k * h) for k in range(-3, 4)])
    f_h2 = np.array([val(x + k * h / 2) for k in range(-3, 4)])
    for order in range(1, 5):
        weights, power, acc = _STENCILS[order]
        d_h = weights @ f_h / h ** power
        d_h2 = weights @ f_h2 / (h / 2) ** power
        factor = 2.0 ** acc
        out.append((factor * d_h2 - d_h) / (factor - 1.0))
    return out


def ode_residual_density(mp: MeanParams, x: float,
                         derivs: list[float]) -> float:
    """Normalized residual of the fourth-order linear ODE satisfied by the
    density of the mean (unit variances).

    ``derivs`` supplies (p, p', p'', p''', p'''') at x.  The residual is
    the ODE left-hand side divided by the largest absolute term, so a
    value near zero certifies the ODE regardless of the density's scale.
    """
    p = mp.base
    if p.sigma_x != 1 or p.sigma_y != 1:
        raise CaseMismatch("the density ODE is stated for unit variances")
    if len(derivs) != 5:
        raise ValueError("derivs must contain p and its first four derivatives")
    mx, my, rho, n = p.mu_x, p.mu_y, p.rho, mp.n
    om = 1.0 - rho ** 2
    coeffs = [
        n ** 3 * (4 * rho + n * (x - mx * my - rho)),
        n ** 2 * (2 * (6 * rho ** 2 - 2)
                  - n * (2 * rho * mx * my - mx ** 2 - my ** 2 + 3 * rho ** 2 - 1)
                  + 4 * rho * n * x),
        n * ((6 * rho ** 2 - 2) * n * x - 12 * rho * om
             + n * (3 * rho * om + rho * my ** 2 - rho ** 2 * mx * my
                    - mx * my + rho * mx ** 2)),
        om * (om * (4 - n) - 4 * rho * n * x),
        om ** 2 * x,
    ]
    terms = [c * d for c, d in zip(coeffs, derivs)]
    scale = max(abs(t) for t in terms)
    if scale == 0:
        return 0.0
    return sum(terms) / scale


def _pdf_value(p: ProductNormalParams, x: float, ctl: SeriesControl) -> float:
    if x == 0:
        return 0.0
    if abs(x) >= _tail_cutoff(p):
        # certifiably negligible; skip the series entirely
        return 0.0
    log_pref, logs, signs, terms = _series_parts(p, x, ctl)
    if log_pref + float(special.logsumexp(logs)) < math.log(1e-40):
        # |sum| <= sum of magnitudes: negligible for any quadrature in
        # use, so skip the (possibly high-precision) signed combination
        return 0.0
    dv = _combine_series(p, x, ctl, log_pref, logs, signs, terms)
    return 0.0 if dv.log_abs < _LOG_DBL_MIN else dv.value


def _tail_cutoff(p: ProductNormalParams, log_eps: float = -60.0) -> float:
    """|x| beyond which the density is certifiably below exp(log_eps).

    The tails decay like exp(-|x|/((1+|rho|)s)); the cutoff absorbs the
    exponential prefactor and leaves 20 nats of slack, so truncating the
    quadrature there changes the mass by far less than any tolerance in
    use.
    """
    log_c = (p.r_x ** 2 + p.r_y ** 2 + 2 * abs(p.rho)
             * (1 + abs(p.r_x * p.r_y))) / (2 * (1 - p.rho ** 2))
    return (1 + abs(p.rho)) * p.s * (-log_eps + log_c + 20.0)


def cdf_product(p: ProductNormalParams, x: float,
                ctl: SeriesControl | None = None,
                quad_tol: float = 1e-9) -> float:
    """CDF of Z by adaptive quadrature of the series density.

    The integrable log singularity at 0 is handled by splitting the
    integration range there; the infinite range is truncated where the
    density provably underflows double precision.
    """
    if ctl is None:
        # quadrature probes deep tails, where the series needs a larger
        # block budget than pointwise evaluation does
        ctl = SeriesControl(rel_tol=1e-14, max_outer=1500)

    def f(t):
        return _pdf_value(p, t, ctl)

    lo = -_tail_cutoff(p)
    pieces = []
    x = float(x)
    if x <= lo:
        return 0.0
    if x <= 0:
        pieces.append((lo, x))
    else:
        pieces.append((lo, 0.0))
        pieces.append((0.0, min(x, -lo)))
    total = 0.0
    err = 0.0
    for a, b in pieces:
        if a == b:
            continue
        val, abserr = integrate.quad(f, a, b, limit=400,
                                     epsabs=quad_tol, epsrel=quad_tol)
        total += val
        err += abserr
    if err > 1e-6:
        raise NotConverged(f"cdf quadrature error estimate {err:.2e} too large")
    return min(max(total, 0.0), 1.0)
