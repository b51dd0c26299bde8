"""Exact integer-lattice algebra tests.

Derived expectations are frozen from the brute-force oracles in oracles.py
(determinantal divisors, box lattice enumeration).
"""

import math
import random

import pytest

from zonefold.errors import NotPrimitive, RankDeficient, WrongShape
from zonefold.intlat import (
    IntMatrix,
    as_chiral_matrix,
    complete_to_basis,
    is_primitive_set,
    saturation,
    smith_normal_form,
    unimodular_inverse,
)

from .oracles import determinantal_divisors, generated_lattice_in_box, lattice_points_in_span_box


def random_int_matrix(rng, rows, cols, bound=9):
    return IntMatrix.from_rows(
        [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)]
    )


class TestIntMatrix:
    def test_rejects_ragged_and_empty(self):
        with pytest.raises(WrongShape):
            IntMatrix.from_rows([[1, 2], [3]])
        with pytest.raises(WrongShape):
            IntMatrix.from_rows([])

    def test_rejects_overflow(self):
        with pytest.raises(OverflowError):
            IntMatrix.from_rows([[1 << 127]])

    def test_rejects_float_entries(self):
        with pytest.raises(TypeError):
            IntMatrix(((1.5,),))

    def test_matmul_and_det(self):
        a = IntMatrix.from_rows([[2, 3], [1, 2]])
        b = unimodular_inverse(a)
        assert (a @ b).entries == IntMatrix.identity(2).entries
        assert a.det() == 1
        assert IntMatrix.from_rows([[0, 1], [1, 0]]).det() == -1

    def test_det_matches_permanent_expansion(self):
        rng = random.Random(7)
        for _ in range(50):
            n = rng.randint(1, 4)
            m = random_int_matrix(rng, n, n, 6)
            brute = _brute_det(m.entries)
            assert m.det() == brute


def _brute_det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        sub = tuple(tuple(r[jj] for jj in range(n) if jj != j) for r in rows[1:])
        total += (-1) ** j * rows[0][j] * _brute_det(sub)
    return total


class TestSmithNormalForm:
    def test_identity(self):
        dec = smith_normal_form(IntMatrix.identity(3))
        assert dec.S.entries == IntMatrix.identity(3).entries
        assert dec.invariant_factors == (1, 1, 1)

    def test_single_row_gcd(self):
        dec = smith_normal_form(IntMatrix.from_rows([[2, 0]]))
        assert dec.S.entries == ((2, 0),)
        assert dec.invariant_factors == (2,)

    def test_reconstruction_and_divisibility_random(self):
        rng = random.Random(11)
        for _ in range(200):
            m = rng.randint(1, 4)
            n = rng.randint(1, 4)
            mat = random_int_matrix(rng, m, n)
            dec = smith_normal_form(mat)
            assert (dec.U @ dec.S @ dec.V).entries == mat.entries
            assert abs(dec.U.det()) == 1
            assert abs(dec.V.det()) == 1
            factors = dec.invariant_factors
            assert all(f >= 0 for f in factors)
            for a, b in zip(factors, factors[1:]):
                if a == 0:
                    assert b == 0
                else:
                    assert b % a == 0
            # off-diagonal of S must vanish
            for i in range(dec.S.rows):
                for j in range(dec.S.cols):
                    if i != j:
                        assert dec.S.entries[i][j] == 0

    def test_factors_match_determinantal_divisors(self):
        rng = random.Random(13)
        for _ in range(100):
            mat = random_int_matrix(rng, 2, 3)
            dec = smith_normal_form(mat)
            divisors = determinantal_divisors([list(r) for r in mat.entries])
            # s_1 * ... * s_k equals the gcd of all k x k minors
            prod = 1
            for k, f in enumerate(dec.invariant_factors):
                prod *= f
                assert prod == divisors[k]

    def test_overflow_propagates(self):
        big = (1 << 126) + 1
        with pytest.raises(OverflowError):
            smith_normal_form(IntMatrix.from_rows([[big, big - 1], [big - 3, big]]))


class TestPrimitivity:
    def test_known_cases(self):
        assert is_primitive_set([[2, 3]]) is True
        assert is_primitive_set([[2, 0]]) is False
        assert is_primitive_set([[1, 1, 0], [1, -1, 0]]) is False

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            is_primitive_set([[1, 2, 3], [2, 4, 6]])

    def test_shape_guard(self):
        with pytest.raises(WrongShape):
            is_primitive_set([[1, 0], [0, 1]])

    def test_agrees_with_unit_factor_characterization(self):
        rng = random.Random(17)
        for _ in range(200):
            d = rng.randint(2, 5)
            d_o = rng.randint(1, d - 1)
            mat = random_int_matrix(rng, d_o, d, 6)
            try:
                verdict = is_primitive_set(mat)
            except RankDeficient:
                continue
            factors = smith_normal_form(mat).invariant_factors
            assert verdict == all(f == 1 for f in factors)


class TestCompletion:
    def test_small_vector(self):
        comp = complete_to_basis([[2, 3]]).matrix
        assert comp.entries[0] == (2, 3)
        assert comp.det() in (1, -1)
        # (2,3),(1,2) is another valid completion by hand
        alt = IntMatrix.from_rows([[2, 3], [1, 2]])
        assert alt.det() == 1

    def test_identity_prefix(self):
        comp = complete_to_basis([[1, 0, 0], [0, 1, 0]]).matrix
        assert comp.entries[:2] == ((1, 0, 0), (0, 1, 0))
        assert comp.det() in (1, -1)

    def test_random_primitive_inputs(self):
        rng = random.Random(19)
        done = 0
        while done < 200:
            d = rng.randint(2, 5)
            d_o = rng.randint(1, d - 1)
            mat = random_int_matrix(rng, d_o, d, 7)
            try:
                if not is_primitive_set(mat):
                    continue
            except RankDeficient:
                continue
            comp = complete_to_basis(mat).matrix
            assert comp.entries[:d_o] == mat.entries
            assert comp.det() in (1, -1)
            inv = unimodular_inverse(comp)
            assert (comp @ inv).entries == IntMatrix.identity(d).entries
            done += 1

    def test_rejects_non_primitive(self):
        with pytest.raises(NotPrimitive):
            complete_to_basis([[2, 0]])
        with pytest.raises(NotPrimitive):
            complete_to_basis([[1, 2, 3], [2, 4, 6]])


class TestSaturation:
    def test_single_vector(self):
        basis, index = saturation([[2, 0]])
        assert index == 2
        assert basis.entries in (((1, 0),), ((-1, 0),))

    def test_primitive_has_index_one(self):
        rng = random.Random(23)
        done = 0
        while done < 50:
            d = rng.randint(2, 4)
            d_o = rng.randint(1, d - 1)
            mat = random_int_matrix(rng, d_o, d, 5)
            try:
                if not is_primitive_set(mat):
                    continue
            except RankDeficient:
                continue
            _, index = saturation(mat)
            assert index == 1
            done += 1

    def test_box_enumeration_case(self):
        # Oracle: integer points of the span of (2,0,0),(0,3,0) in a box are
        # exactly Z^2 x {0}; the sublattice they generate has 6 cosets.
        rows = [[2, 0, 0], [0, 3, 0]]
        span_pts = lattice_points_in_span_box(rows, 3)
        assert span_pts == {(i, j, 0) for i in range(-3, 4) for j in range(-3, 4)}
        basis, index = saturation(rows)
        assert index == 6
        got = generated_lattice_in_box([list(r) for r in basis.entries], 3)
        assert got == span_pts

    def test_index_multiplicative_under_row_scaling(self):
        rng = random.Random(29)
        done = 0
        while done < 40:
            d = rng.randint(2, 4)
            d_o = rng.randint(1, d - 1)
            mat = random_int_matrix(rng, d_o, d, 4)
            try:
                if not is_primitive_set(mat):
                    continue
            except RankDeficient:
                continue
            scales = [rng.randint(1, 4) for _ in range(d_o)]
            scaled = IntMatrix.from_rows(
                [[c * x for x in row] for c, row in zip(scales, mat.entries)]
            )
            _, index = saturation(scaled)
            assert index == math.prod(scales)
            done += 1

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            saturation([[1, 2], [2, 4]])


class TestChiralValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(WrongShape):
            as_chiral_matrix([[1, 2]], dimension=3)

    def test_square_rejected(self):
        with pytest.raises(WrongShape):
            as_chiral_matrix([[1, 0], [0, 1]])
