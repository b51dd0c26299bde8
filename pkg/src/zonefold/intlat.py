"""Exact integer-lattice algebra.

Smith normal form with transform tracking, primitivity tests for chiral
matrices, unimodular basis completion and saturation/sublattice index.
All arithmetic is exact over Python integers; magnitudes beyond 128 bits
are rejected rather than silently carried.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotPrimitive, RankDeficient, WrongShape

# Exactness envelope: any materialized entry must fit in 128 bits.
INT_LIMIT = 1 << 127

__all__ = [
    "INT_LIMIT",
    "IntMatrix",
    "SmithDecomposition",
    "UnimodularCompletion",
    "smith_normal_form",
    "is_primitive_set",
    "complete_to_basis",
    "saturation",
    "as_chiral_matrix",
    "unimodular_inverse",
]


def _check_entry(x: int) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise TypeError(f"integer entry expected, got {type(x).__name__}")
    if abs(x) >= INT_LIMIT:
        raise OverflowError(f"entry magnitude {x} exceeds the 128-bit exactness bound")
    return x


@dataclass(frozen=True)
class IntMatrix:
    """Immutable dense integer matrix with overflow-checked entries."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.entries or not self.entries[0]:
            raise WrongShape("empty matrix")
        width = len(self.entries[0])
        for row in self.entries:
            if len(row) != width:
                raise WrongShape("ragged rows")
            for x in row:
                _check_entry(x)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(x) for x in row) for row in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def __getitem__(self, idx: tuple[int, int]) -> int:
        return self.entries[idx[0]][idx[1]]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.entries)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise WrongShape(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        cols = other.transpose().entries
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.entries]
        )

    def det(self) -> int:
        """Exact determinant by Bareiss fraction-free elimination."""
        if self.rows != self.cols:
            raise WrongShape("determinant of a non-square matrix")
        n = self.rows
        a = [list(row) for row in self.entries]
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
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def to_floats(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self.entries]

    def __str__(self) -> str:
        return "[" + "; ".join(",".join(str(x) for x in row) for row in self.entries) + "]"


@dataclass(frozen=True)
class SmithDecomposition:
    """Factorization M = U @ S @ V with unimodular U, V and diagonal S.

    The diagonal of S carries the nonnegative invariant factors in a
    divisibility chain s_1 | s_2 | ... (zeros, if any, trail).
    """

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        return tuple(self.S.entries[i][i] for i in range(min(self.S.rows, self.S.cols)))


@dataclass(frozen=True)
class UnimodularCompletion:
    """Square integer matrix of determinant +-1 whose top rows are the input."""

    matrix: IntMatrix


def as_chiral_matrix(t: IntMatrix | Iterable[Sequence[int]], dimension: int | None = None) -> IntMatrix:
    """Validate a chiral matrix: 1 <= row count < column count (= lattice dim)."""
    mat = t if isinstance(t, IntMatrix) else IntMatrix.from_rows(t)
    if mat.rows >= mat.cols:
        raise WrongShape(
            f"chiral matrix must have fewer rows than columns, got {mat.rows}x{mat.cols}"
        )
    if dimension is not None and mat.cols != dimension:
        raise WrongShape(f"chiral matrix has {mat.cols} columns, lattice dimension is {dimension}")
    return mat


def _round_div(a: int, b: int) -> int:
    """Nearest-integer quotient; remainder magnitude at most |b|/2."""
    q, r = divmod(a, b)
    if 2 * abs(r) > abs(b):
        q += 1
    return q


class _Worksheet:
    """Mutable elimination state tracking M = U @ S @ V throughout."""

    def __init__(self, mat: IntMatrix):
        self.s = [list(row) for row in mat.entries]
        self.m = mat.rows
        self.n = mat.cols
        self.u = [[1 if i == j else 0 for j in range(self.m)] for i in range(self.m)]
        self.v = [[1 if i == j else 0 for j in range(self.n)] for i in range(self.n)]

    # Each row operation E on S is compensated by U <- U @ inv(E), and each
    # column operation F by V <- inv(F) @ V, keeping U @ S @ V invariant.

    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        self.s[i], self.s[j] = self.s[j], self.s[i]
        for row in self.u:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for row in self.s:
            row[i], row[j] = row[j], row[i]
        self.v[i], self.v[j] = self.v[j], self.v[i]

    def negate_row(self, i: int) -> None:
        self.s[i] = [-x for x in self.s[i]]
        for row in self.u:
            row[i] = -row[i]

    def negate_col(self, i: int) -> None:
        for row in self.s:
            row[i] = -row[i]
        self.v[i] = [-x for x in self.v[i]]

    def addmul_row(self, target: int, source: int, q: int) -> None:
        """Row_target += q * row_source on S."""
        if q == 0:
            return
        st, ss = self.s[target], self.s[source]
        for j in range(self.n):
            st[j] += q * ss[j]
        for row in self.u:
            row[source] -= q * row[target]

    def addmul_col(self, target: int, source: int, q: int) -> None:
        """Col_target += q * col_source on S."""
        if q == 0:
            return
        for row in self.s:
            row[target] += q * row[source]
        vs, vt = self.v[source], self.v[target]
        for j in range(self.n):
            vs[j] -= q * vt[j]


def smith_normal_form(mat: IntMatrix | Iterable[Sequence[int]]) -> SmithDecomposition:
    """Smith normal form with exact transform tracking.

    Pivots are chosen by smallest nonzero absolute value, which keeps entry
    growth modest on desk-scale inputs. Raises OverflowError if any
    materialized entry leaves the 128-bit envelope.
    """
    m0 = mat if isinstance(mat, IntMatrix) else IntMatrix.from_rows(mat)
    ws = _Worksheet(m0)
    s, m, n = ws.s, ws.m, ws.n

    for t in range(min(m, n)):
        while True:
            pivot = None
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    x = abs(s[i][j])
                    if x and (best is None or x < best):
                        best, pivot = x, (i, j)
            if pivot is None:
                break
            ws.swap_rows(t, pivot[0])
            ws.swap_cols(t, pivot[1])

            for i in range(t + 1, m):
                if s[i][t]:
                    ws.addmul_row(i, t, -_round_div(s[i][t], s[t][t]))
            for j in range(t + 1, n):
                if s[t][j]:
                    ws.addmul_col(j, t, -_round_div(s[t][j], s[t][t]))
            if any(s[i][t] for i in range(t + 1, m)) or any(s[t][j] for j in range(t + 1, n)):
                continue  # remainders became new, smaller pivot candidates

            # Divisibility repair: fold in a row holding a non-multiple.
            culprit = next(
                (
                    i
                    for i in range(t + 1, m)
                    for j in range(t + 1, n)
                    if s[i][j] % s[t][t] != 0
                ),
                None,
            )
            if culprit is None:
                break
            ws.addmul_row(t, culprit, 1)

        if s[t][t] < 0:
            ws.negate_row(t)

    u = IntMatrix.from_rows(ws.u)
    v = IntMatrix.from_rows(ws.v)
    smat = IntMatrix.from_rows(s)
    if (u @ smat @ v).entries != m0.entries:
        raise AssertionError("internal error: Smith reconstruction failed")
    return SmithDecomposition(U=u, S=smat, V=v)


def _minor_gcd_route(t: IntMatrix) -> int:
    g = 0
    rows = t.entries
    for cis in itertools.combinations(range(t.cols), t.rows):
        sub = IntMatrix.from_rows([[rows[i][j] for j in cis] for i in range(t.rows)])
        g = math.gcd(g, sub.det())
        if g == 1:
            break
    return g


def is_primitive_set(t: IntMatrix | Iterable[Sequence[int]]) -> bool:
    """Whether the rows extend to a basis of the integer lattice.

    Equivalent characterizations, both implemented and cross-checked where
    the minor count is tractable: the gcd of all maximal minors is 1, and
    all Smith invariant factors are 1.
    """
    mat = as_chiral_matrix(t)
    dec = smith_normal_form(mat)
    factors = dec.invariant_factors
    if any(f == 0 for f in factors):
        raise RankDeficient(f"rows of {mat} are linearly dependent")
    snf_verdict = all(f == 1 for f in factors)

    if mat.rows <= 4 and mat.cols <= 8:
        g = _minor_gcd_route(mat)
        if g == 0:
            raise RankDeficient(f"rows of {mat} are linearly dependent")
        if (g == 1) != snf_verdict:
            raise AssertionError("internal error: minor-gcd and Smith routes disagree")
    return snf_verdict


class _ColumnReducer:
    """Column operations on A, mirrored on C and on C^-1.

    Maintains A_current = A_input @ C and inv = C^-1 exactly.
    """

    def __init__(self, mat: IntMatrix):
        self.a = [list(row) for row in mat.entries]
        self.n = mat.cols
        self.c = [[1 if i == j else 0 for j in range(self.n)] for i in range(self.n)]
        self.inv = [[1 if i == j else 0 for j in range(self.n)] for i in range(self.n)]

    def swap(self, i: int, j: int) -> None:
        if i == j:
            return
        for row in self.a:
            row[i], row[j] = row[j], row[i]
        for row in self.c:
            row[i], row[j] = row[j], row[i]
        self.inv[i], self.inv[j] = self.inv[j], self.inv[i]

    def negate(self, i: int) -> None:
        for row in self.a:
            row[i] = -row[i]
        for row in self.c:
            row[i] = -row[i]
        self.inv[i] = [-x for x in self.inv[i]]

    def addmul(self, target: int, source: int, q: int) -> None:
        """Col_target += q * col_source."""
        if q == 0:
            return
        for row in self.a:
            row[target] += q * row[source]
        for row in self.c:
            row[target] += q * row[source]
        src = self.inv[source]
        tgt = self.inv[target]
        for j in range(self.n):
            src[j] -= q * tgt[j]


def complete_to_basis(t: IntMatrix | Iterable[Sequence[int]]) -> UnimodularCompletion:
    """Extend a primitive chiral matrix to a unimodular square matrix.

    Column reduction brings T to [I | 0]; the tracked inverse transform is
    then a determinant +-1 matrix whose first rows reproduce T exactly.
    The completion is deterministic but not unique; only the two defining
    properties are promised.
    """
    mat = as_chiral_matrix(t)
    red = _ColumnReducer(mat)
    a, d_o, d = red.a, mat.rows, mat.cols

    for r in range(d_o):
        while True:
            nz = [j for j in range(r, d) if a[r][j]]
            if not nz:
                raise NotPrimitive(f"{mat} has linearly dependent rows")
            jmin = min(nz, key=lambda j: (abs(a[r][j]), j))
            others = [j for j in nz if j != jmin]
            if not others:
                red.swap(r, jmin)
                break
            for j in others:
                red.addmul(j, jmin, -_round_div(a[r][j], a[r][jmin]))
        if a[r][r] < 0:
            red.negate(r)
        if a[r][r] != 1:
            raise NotPrimitive(f"{mat} is not a primitive set (pivot {a[r][r]} at row {r})")

    # Clear the below-diagonal residue so A becomes exactly [I | 0].
    for i in range(1, d_o):
        for j in range(i):
            red.addmul(j, i, -a[i][j])

    completion = IntMatrix.from_rows(red.inv)
    if completion.entries[:d_o] != mat.entries:
        raise AssertionError("internal error: completion lost the chiral rows")
    if completion.det() not in (1, -1):
        raise AssertionError("internal error: completion is not unimodular")
    return UnimodularCompletion(matrix=completion)


def saturation(t: IntMatrix | Iterable[Sequence[int]]) -> tuple[IntMatrix, int]:
    """Basis of the saturation (real span intersected with Z^d) and its index.

    The index counts sublattice cosets inside the saturation; it is 1 exactly
    when the rows are primitive.
    """
    mat = t if isinstance(t, IntMatrix) else IntMatrix.from_rows(t)
    dec = smith_normal_form(mat)
    factors = dec.invariant_factors
    if any(f == 0 for f in factors) or mat.rows > mat.cols:
        raise RankDeficient(f"{mat} does not have full row rank")
    basis = IntMatrix.from_rows(dec.V.entries[: mat.rows])
    index = 1
    for f in factors:
        index *= f
    return basis, index


def unimodular_inverse(mat: IntMatrix) -> IntMatrix:
    """Exact inverse of a determinant +-1 integer matrix."""
    if mat.rows != mat.cols:
        raise WrongShape("inverse of a non-square matrix")
    n = mat.rows
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat.entries)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise WrongShape("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    out = [[a[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in out for x in row):
        raise WrongShape("matrix is not unimodular; inverse is not integral")
    return IntMatrix.from_rows([[int(x) for x in row] for row in out])
