"""Stein operators with linear coefficients for the product-normal mean.

Operators are materialized as coefficient tables rather than closures:
each is a list of pairs (a0_j, a1_j) so that the coefficient of f^(j)
is a0_j + a1_j*x.  Tables can be printed, diffed, exported, and fed to
the exact-arithmetic order search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CaseMismatch
from .params import DistributionCase, MeanParams, classify


@dataclass(frozen=True)
class SteinOperatorSpec:
    """Sum over j of (a0_j + a1_j*x) f^(j)(x), j = 0..order."""

    order: int
    coeffs: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.order not in (2, 3, 4):
            raise ValueError(f"order={self.order}; supported orders are 2, 3, 4")
        if len(self.coeffs) != self.order + 1:
            raise ValueError("coeffs must have exactly order + 1 entries")
        if self.coeffs[-1] == (0.0, 0.0):
            raise ValueError("highest-order coefficient pair must not vanish")

    def coefficient(self, j: int, x):
        a0, a1 = self.coeffs[j]
        return a0 + a1 * x


@dataclass(frozen=True)
class TestFunction:
    """Bundle of f and derivatives f', f'', f''', f'''' evaluated jointly.

    ``evaluate`` maps x (scalar or ndarray) to the 5-tuple of values.
    Membership of the theorems' function class (moment-finiteness of the
    derivatives under the target law) is the caller's obligation; the
    built-ins below all qualify against product-normal laws.
    """

    evaluate: Callable
    label: str
    integrability_note: str = "all derivatives polynomially bounded"

    def __call__(self, x):
        return self.evaluate(x)


def monomial(k: int) -> TestFunction:
    """f(x) = x**k with exact derivative formulas, k <= 8."""
    if not 0 <= k <= 8:
        raise ValueError("monomial degree must be in 0..8")

    def ev(x):
        x = np.asarray(x, dtype=float)
        out = []
        fall = 1.0
        for j in range(5):
            p = k - j
            if p < 0:
                out.append(np.zeros_like(x))
            else:
                out.append(fall * x ** p if p else fall * np.ones_like(x))
                fall *= p
        return tuple(out)

    return TestFunction(ev, f"x^{k}")


def polynomial(coeffs: Sequence[float]) -> TestFunction:
    """f with the given ascending power-basis coefficients."""
    base = np.polynomial.Polynomial(coeffs)
    ders = [base] + [base.deriv(j) for j in range(1, 5)]

    def ev(x):
        x = np.asarray(x, dtype=float)
        return tuple(d(x) for d in ders)

    return TestFunction(ev, f"poly(deg {base.degree()})")


def exponential(a: float) -> TestFunction:
    """f(x) = exp(a*x); valid test function for |a| small enough that the
    exponential moments exist (caller's obligation)."""

    def ev(x):
        x = np.asarray(x, dtype=float)
        f = np.exp(a * x)
        return tuple(a ** j * f for j in range(5))

    return TestFunction(ev, f"exp({a}x)",
                        "requires finite exponential moments under the target law")


def sine(t: float) -> TestFunction:
    def ev(x):
        x = np.asarray(x, dtype=float)
        s, c = np.sin(t * x), np.cos(t * x)
        return (s, t * c, -t * t * s, -t ** 3 * c, t ** 4 * s)

    return TestFunction(ev, f"sin({t}x)", "bounded with bounded derivatives")


def cosine(t: float) -> TestFunction:
    def ev(x):
        x = np.asarray(x, dtype=float)
        s, c = np.sin(t * x), np.cos(t * x)
        return (c, -t * s, -t * t * c, t ** 3 * s, t ** 4 * c)

    return TestFunction(ev, f"cos({t}x)", "bounded with bounded derivatives")


def gaussian_bump(a: float) -> TestFunction:
    """f(x) = exp(-a*x**2), a > 0; bounded with bounded derivatives."""
    if a <= 0:
        raise ValueError("a must be positive")

    def ev(x):
        x = np.asarray(x, dtype=float)
        f = np.exp(-a * x * x)
        return (f,
                -2 * a * x * f,
                (4 * a * a * x * x - 2 * a) * f,
                (12 * a * a * x - 8 * a ** 3 * x ** 3) * f,
                (12 * a * a - 48 * a ** 3 * x * x + 16 * a ** 4 * x ** 4) * f)

    return TestFunction(ev, f"exp(-{a}x^2)", "bounded with bounded derivatives")


def from_callable(fn: Callable, h: float = 1e-5) -> TestFunction:
    """Finite-difference wrapper for an arbitrary scalar function.

    Derivative accuracy degrades with order; intended for exploratory
    use, not for tight residual checks.
    """

    def ev(x):
        x = np.asarray(x, dtype=float)
        grid = np.stack([fn(x + k * h) for k in range(-3, 4)])
        f = grid[3]
        d1 = (-grid[0] + 9 * grid[1] - 45 * grid[2]
              + 45 * grid[4] - 9 * grid[5] + grid[6]) / (60 * h)
        d2 = (2 * grid[0] - 27 * grid[1] + 270 * grid[2] - 490 * grid[3]
              + 270 * grid[4] - 27 * grid[5] + 2 * grid[6]) / (180 * h * h)
        d3 = (-grid[0] + 8 * grid[1] - 13 * grid[2]
              + 13 * grid[4] - 8 * grid[5] + grid[6]) / (8 * h ** 3)
        d4 = (-grid[0] + 12 * grid[1] - 39 * grid[2] + 56 * grid[3]
              - 39 * grid[4] + 12 * grid[5] - grid[6]) / (6 * h ** 4)
        return (f, d1, d2, d3, d4)

    return TestFunction(ev, getattr(fn, "__name__", "fd-wrapped"),
                        "derivative self-consistency is the caller's obligation")


def check_derivatives(f: TestFunction, grid=None, rtol: float = 1e-4) -> float:
    """Max relative deviation between the supplied f' and a central
    difference of the supplied f over a probe grid."""
    if grid is None:
        grid = np.linspace(-2.0, 2.0, 9)
    grid = np.asarray(grid, dtype=float)
    h = 1e-6
    f_plus = f(grid + h)[0]
    f_minus = f(grid - h)[0]
    fd = (f_plus - f_minus) / (2 * h)
    claimed = f(grid)[1]
    scale = np.maximum(np.abs(claimed), np.max(np.abs(claimed)) + 1e-30)
    worst = float(np.max(np.abs(fd - claimed) / scale))
    if worst > rtol:
        raise ValueError(
            f"{f.label}: supplied derivative disagrees with finite "
            f"difference (relative deviation {worst:.2e})"
        )
    return worst


def operator_a1(mp: MeanParams) -> SteinOperatorSpec:
    """The fourth-order operator characterising the mean for any valid
    parameters."""
    p = mp.base
    rho, n, s_n = p.rho, mp.n, mp.s_n
    rx, ry = p.r_x, p.r_y
    om = 1.0 - rho ** 2
    return SteinOperatorSpec(4, (
        (-p.mu_x * p.mu_y - n * s_n * rho, 1.0),
        (s_n * n * s_n * (2 * rho * rx * ry - rx ** 2 - ry ** 2 + 3 * rho ** 2 - 1),
         -4 * rho * s_n),
        (s_n ** 2 * n * s_n * (rho * (rx ** 2 + ry ** 2)
                               - (1 + rho ** 2) * rx * ry + 3 * rho * om),
         s_n ** 2 * (6 * rho ** 2 - 2)),
        (n * s_n ** 4 * om ** 2, 4 * rho * s_n ** 3 * om),
        (0.0, s_n ** 4 * om ** 2),
    ))


def operator_a2(mp: MeanParams) -> SteinOperatorSpec:
    """The third-order operator available when the mean-to-sd ratios are
    equal (zero means included)."""
    p = mp.base
    case = classify(p)
    if case not in (DistributionCase.EQUAL_RATIO, DistributionCase.ZERO_MEANS):
        raise CaseMismatch("third-order operator requires equal mean-to-sd ratios")
    rho, n, s_n = p.rho, mp.n, mp.s_n
    om = 1.0 - rho ** 2
    return SteinOperatorSpec(3, (
        (-n * s_n * rho - p.mu_x * p.mu_y, 1.0),
        (s_n * n * s_n * (2 * rho ** 2 + rho - 1 - (1 - rho) * p.r_x * p.r_y),
         -(3 * rho + 1) * s_n),
        (s_n ** 2 * (1 + rho) * n * s_n * om, s_n ** 2 * (1 + rho) * (3 * rho - 1)),
        (0.0, s_n ** 3 * om * (1 + rho)),
    ))


_SPECIAL = ("a3", "a4", "a5", "a6", "a7")


def operator_special(which: str, mp: MeanParams) -> SteinOperatorSpec:
    """Named special-case operators the general one reduces to.

    a3: zero means (order 4); a4: zero means, the variance-gamma form
    (order 2); a5: zero means, n=1, rho=0 (order 2); a6: unit variances,
    n=1, rho=0 (order 4); a7: additionally equal means (order 3).
    """
    which = which.lower()
    if which not in _SPECIAL:
        raise ValueError(f"unknown operator {which!r}; expected one of {_SPECIAL}")
    p = mp.base
    rho, n, s_n = p.rho, mp.n, mp.s_n
    om = 1.0 - rho ** 2
    zero_means = p.mu_x == 0 and p.mu_y == 0
    if which in ("a3", "a4") and not zero_means:
        raise CaseMismatch(f"{which} requires zero means")
    if which == "a5" and not (zero_means and n == 1 and rho == 0):
        raise CaseMismatch("a5 requires zero means, n = 1 and rho = 0")
    if which in ("a6", "a7"):
        if not (p.sigma_x == 1 and p.sigma_y == 1 and n == 1 and rho == 0):
            raise CaseMismatch(f"{which} requires unit variances, n = 1 and rho = 0")
        if which == "a7" and p.mu_x != p.mu_y:
            raise CaseMismatch("a7 requires equal means")

    if which == "a3":
        return SteinOperatorSpec(4, (
            (-n * s_n * rho, 1.0),
            (n * s_n ** 2 * (3 * rho ** 2 - 1), -4 * rho * s_n),
            (3 * n * s_n ** 3 * rho * om, s_n ** 2 * (6 * rho ** 2 - 2)),
            (n * s_n ** 4 * om ** 2, 4 * rho * s_n ** 3 * om),
            (0.0, s_n ** 4 * om ** 2),
        ))
    if which == "a4":
        return SteinOperatorSpec(2, (
            (n * s_n * rho, -1.0),
            (n * s_n ** 2 * om, 2 * rho * s_n),
            (0.0, s_n ** 2 * om),
        ))
    if which == "a5":
        s = p.s
        return SteinOperatorSpec(2, (
            (0.0, -1.0),
            (s * s, 0.0),
            (0.0, s * s),
        ))
    mxy = p.mu_x * p.mu_y
    if which == "a6":
        return SteinOperatorSpec(4, (
            (-mxy, 1.0),
            (-(p.mu_x ** 2 + p.mu_y ** 2 + 1), 0.0),
            (-mxy, -2.0),
            (1.0, 0.0),
            (0.0, 1.0),
        ))
    mu2 = p.mu_x ** 2
    return SteinOperatorSpec(3, (
        (-mu2, 1.0),
        (-(1 + mu2), -1.0),
        (1.0, -1.0),
        (0.0, 1.0),
    ))


def apply(spec: SteinOperatorSpec, f: TestFunction, x):
    """Evaluate the operator on f at x (scalar or vectorized)."""
    derivs = f(x)
    if len(derivs) <= spec.order:
        raise ValueError("test function supplies too few derivatives")
    total = 0.0
    for j in range(spec.order + 1):
        total = total + spec.coefficient(j, x) * derivs[j]
    return total


def _shifted_function(f: TestFunction, weights: Sequence[float],
                      orders: Sequence[int], label: str) -> TestFunction:
    """g with g^(j) = sum_i weights[i] * f^(j + orders[i])."""

    def ev(x):
        d = f(x)
        return tuple(
            sum(w * d[j + o] for w, o in zip(weights, orders))
            for j in range(5 - max(orders))
        )

    return TestFunction(ev, label)


def substitution_identity_check(mp: MeanParams, f: TestFunction, x,
                                which: str = "auto") -> float:
    """Residual of the substitution identities relating operators.

    ``which`` is "a1a2" (equal ratios: the fourth-order operator applied
    to f equals the third-order one applied to g = (1-rho) s_n f' + f),
    "a3a4" (zero means: the zero-mean fourth-order operator on f equals
    the variance-gamma one on g = (1-rho^2) s_n^2 f'' + 2 rho s_n f' - f),
    or "auto" to pick by case.  Both identities hold exactly; the residual
    is floating roundoff only.
    """
    p = mp.base
    case = classify(p)
    if which == "auto":
        which = "a3a4" if case is DistributionCase.ZERO_MEANS else "a1a2"
    rho, s_n = p.rho, mp.s_n
    if which == "a1a2":
        if case not in (DistributionCase.EQUAL_RATIO, DistributionCase.ZERO_MEANS):
            raise CaseMismatch("a1/a2 identity requires equal mean-to-sd ratios")
        g = _shifted_function(f, [(1 - rho) * s_n, 1.0], [1, 0], "substituted g")
        lhs = apply(operator_a1(mp), f, x)
        rhs = apply(operator_a2(mp), g, x)
    elif which == "a3a4":
        if case is not DistributionCase.ZERO_MEANS:
            raise CaseMismatch("a3/a4 identity requires zero means")
        g = _shifted_function(
            f, [(1 - rho ** 2) * s_n ** 2, 2 * rho * s_n, -1.0], [2, 1, 0],
            "substituted g")
        lhs = apply(operator_special("a3", mp), f, x)
        rhs = apply(operator_special("a4", mp), g, x)
    else:
        raise ValueError(f"unknown identity {which!r}")
    return float(np.max(np.abs(np.asarray(lhs) - np.asarray(rhs))))
