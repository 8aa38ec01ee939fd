"""Exact-arithmetic search for Stein operators with linear coefficients.

An order-m ansatz sum_j (a0j + a1j x) f^(j) applied to monomials x^k
gives one linear equation per k in the 2(m+1) unknowns, with entries
built from exact raw moments (the moment recursion has rational
coefficients whenever the parameters are rational, so the moments are
exact Fractions).  A nontrivial exact nullspace is a necessary-condition
screen for existence; a trivial one rules the order out over the
monomial dictionary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

from .errors import NotSquare, ParameterNotRational
from .moments import raw_moments_exact
from .params import MeanParams


def to_fraction(value) -> Fraction:
    """Exact rational conversion; floats convert via their exact binary value."""
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError as exc:
            raise ParameterNotRational(f"cannot parse {value!r} as a rational") from exc
    raise ParameterNotRational(f"{value!r} is not a rational parameter")


@dataclass(frozen=True)
class OperatorAnsatz:
    """Order-m linear-coefficient ansatz with 2(m+1) unknowns a_{i,j}."""

    order: int

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("ansatz order must be >= 1")

    @property
    def num_unknowns(self) -> int:
        return 2 * (self.order + 1)


#: Extra rows beyond the square system, guarding against accidental
#: low-rank coincidences at the minimal size.
EXTRA_ROWS = 4


def moment_system(mp: MeanParams, ansatz: OperatorAnsatz,
                  num_equations: int) -> list[list[Fraction]]:
    """Exact matrix whose row k encodes E[A(x^k)] = 0.

    Applying the ansatz to x^k gives sum_j (a0j + a1j x) k!/(k-j)! x^(k-j),
    so the entry for a0j is (k!/(k-j)!) mu'_{k-j} and for a1j it is
    (k!/(k-j)!) mu'_{k-j+1}.  Columns are ordered (a00, a10, a01, a11, ...).
    """
    # re-validate parameters through the exact converter
    p = mp.base
    for v in (p.mu_x, p.mu_y, p.sigma_x, p.sigma_y, p.rho):
        to_fraction(v)
    mu = raw_moments_exact(mp, num_equations + ansatz.order)
    rows = []
    for k in range(num_equations):
        row = []
        for j in range(ansatz.order + 1):
            if j <= k:
                c = Fraction(math.factorial(k), math.factorial(k - j))
                row.extend((c * mu[k - j], c * mu[k - j + 1]))
            else:
                row.extend((Fraction(0), Fraction(0)))
        rows.append(row)
    return rows


def determinant_exact(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by fraction-free (Bareiss) elimination.

    Rows are scaled to integers first; the scale is divided back out at
    the end, so the result is the determinant of the matrix as given.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise NotSquare("determinant requires a square matrix")
    if n == 0:
        return Fraction(1)
    scale = 1
    a = []
    for row in matrix:
        row = [Fraction(v) for v in row]
        lcm = math.lcm(*(f.denominator for f in row))
        scale *= lcm
        a.append([int(f * lcm) for f in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return Fraction(sign * a[n - 1][n - 1], scale)


def nullspace_exact(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Basis of the exact right nullspace by Gauss-Jordan over Fractions."""
    if not matrix:
        return []
    m = [[Fraction(v) for v in row] for row in matrix]
    n_rows, n_cols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [vi - factor * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n_cols
        vec[fc] = Fraction(1)
        for row_idx, pc in enumerate(pivots):
            vec[pc] = -m[row_idx][fc]
        basis.append(vec)
    return basis


@dataclass(frozen=True)
class OperatorSearchResult:
    exists: bool
    nullspace_basis: tuple[tuple[Fraction, ...], ...]


def operator_exists(mp: MeanParams, order: int,
                    num_equations: int | None = None) -> OperatorSearchResult:
    """Whether an order-``order`` linear-coefficient operator annihilates
    all tested monomials, with the exact candidate space when it does.

    Vanishing on monomials is necessary, not sufficient: a nontrivial
    nullspace yields candidates, a trivial one is a rigorous nonexistence
    proof over this dictionary.  More equations can only shrink the
    nullspace, so the default over-determines by EXTRA_ROWS.
    """
    ansatz = OperatorAnsatz(order)
    if num_equations is None:
        num_equations = ansatz.num_unknowns + EXTRA_ROWS
    if num_equations < ansatz.num_unknowns:
        raise ValueError(
            f"need at least {ansatz.num_unknowns} equations for order {order}"
        )
    system = moment_system(mp, ansatz, num_equations)
    basis = nullspace_exact(system)
    return OperatorSearchResult(bool(basis),
                                tuple(tuple(v) for v in basis))


def in_span(vector: Sequence, basis: Sequence[Sequence[Fraction]]) -> bool:
    """Whether ``vector`` lies in the exact span of ``basis``."""
    vec = [to_fraction(v) for v in vector]
    if not basis:
        return all(v == 0 for v in vec)
    rows = [list(b) for b in basis]
    augmented = rows + [vec]
    # appending a vector already in the span leaves the rank unchanged,
    # so the left-nullspace dimension grows by exactly one
    return len(nullspace_exact(_transpose(augmented))) == len(
        nullspace_exact(_transpose(rows))) + 1


def _transpose(rows):
    return [list(col) for col in zip(*rows)]
