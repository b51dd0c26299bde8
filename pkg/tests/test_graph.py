"""Fundamental graph model, builders, connectivity, and quotients."""

import numpy as np
import pytest

from zonefold.errors import NotPrimitive, RankDeficient, ValidationError, WrongShape
from zonefold.graph import (
    Edge,
    FundamentalGraph,
    Vertex,
    build_diamond,
    build_hexagonal,
    build_hypercubic,
    connectivity_check,
    quotient_general,
    quotient_primitive,
)
from zonefold.floquet import band_functions, sample_points
from zonefold.intlat import IntMatrix, saturation

from .oracles import dense_floquet


def random_graph(rng, d, nu, n_edges):
    vertices = [(f"w{i}", float(rng.uniform(-2, 2))) for i in range(nu)]
    edges = []
    for _ in range(n_edges):
        t = int(rng.integers(nu))
        h = int(rng.integers(nu))
        off = tuple(int(x) for x in rng.integers(-2, 3, size=d))
        edges.append((t, h, off))
    return FundamentalGraph(d, vertices, edges)


class TestConstruction:
    def test_vertex_edge_normalization(self):
        g = FundamentalGraph(2, [("a", 1), ("b", -1.5)], [(0, 1, (1, 0))])
        assert g.nu == 2
        assert g.vertices[0] == Vertex("a", 1.0)
        assert g.edges[0] == Edge(0, 1, (1, 0))
        assert g.degrees() == (1, 1)

    def test_loop_counts_twice(self):
        g = FundamentalGraph(1, [("v", 0.0)], [(0, 0, (1,)), (0, 0, (2,))])
        assert g.degree(0) == 4

    def test_bad_dimension(self):
        with pytest.raises(ValidationError):
            FundamentalGraph(0, [("v", 0.0)], [])
        with pytest.raises(ValidationError):
            FundamentalGraph(True, [("v", 0.0)], [])

    def test_no_vertices(self):
        with pytest.raises(ValidationError):
            FundamentalGraph(1, [], [])

    def test_bad_offsets(self):
        with pytest.raises(ValidationError):
            FundamentalGraph(2, [("v", 0.0)], [(0, 0, (1,))])
        with pytest.raises(ValidationError):
            FundamentalGraph(2, [("v", 0.0)], [(0, 0, (1.0, 0))])
        with pytest.raises(ValidationError):
            FundamentalGraph(2, [("v", 0.0)], [(0, 0, (10**6 + 1, 0))])

    def test_bad_endpoint(self):
        with pytest.raises(ValidationError):
            FundamentalGraph(1, [("v", 0.0)], [(0, 1, (0,))])

    def test_non_finite_potential(self):
        with pytest.raises(ValidationError):
            FundamentalGraph(1, [("v", float("nan"))], [])


class TestBuilders:
    def test_hypercubic_shape(self):
        g = build_hypercubic(1)
        assert g.nu == 1 and g.edges == (Edge(0, 0, (1,)),)
        g3 = build_hypercubic(3)
        assert {e.offset for e in g3.edges} == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_hexagonal_shape(self):
        g = build_hexagonal(0.5)
        assert g.potentials() == (0.5, -0.5)
        assert [e.offset for e in g.edges] == [(0, 0), (1, 0), (0, 1)]
        assert all(e.tail == 0 and e.head == 1 for e in g.edges)

    def test_diamond_shape(self):
        g = build_diamond(2.0)
        assert g.potentials() == (2.0, -2.0)
        assert [e.offset for e in g.edges] == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]

    def test_builders_connected(self):
        for g in (build_hypercubic(1), build_hypercubic(3), build_hexagonal(1.0), build_diamond(1.0)):
            assert connectivity_check(g)


class TestConnectivity:
    def test_hypercubic_true(self):
        assert bool(connectivity_check(build_hypercubic(2))) is True

    def test_sublattice_loops_false(self):
        g = FundamentalGraph(2, [("v", 0.0)], [(0, 0, (2, 0)), (0, 0, (0, 1))])
        report = connectivity_check(g)
        assert not report
        assert report.quotient_connected
        assert report.invariant_factors == (1, 2)

    def test_disconnected_quotient(self):
        g = FundamentalGraph(1, [("a", 0.0), ("b", 0.0)], [(0, 0, (1,)), (1, 1, (1,))])
        report = connectivity_check(g)
        assert not report
        assert len(report.components) == 2

    def test_rank_deficient_offsets(self):
        g = FundamentalGraph(2, [("v", 0.0)], [(0, 0, (1, 0))])
        report = connectivity_check(g)
        assert not report and report.quotient_connected


class TestQuotientPrimitive:
    def test_hexagonal_chiral(self):
        view = quotient_primitive(build_hexagonal(1.0), [[5, 2]])
        assert view.residual_dimension == 1
        assert view.completion.matrix.row(0) == (5, 2)

    def test_cubic_two_rows(self):
        view = quotient_primitive(build_hypercubic(3), [[1, 5, -1], [4, 1, 0]])
        assert view.residual_dimension == 1

    def test_identity_prefix_residual_map(self):
        g = build_hypercubic(3)
        view = quotient_primitive(g, [[1, 0, 0], [0, 1, 0]])
        k = view.quasimomentum((0.7,))
        assert np.allclose(k, (0.0, 0.0, 0.7), atol=0)

    def test_quasimomentum_annihilated(self):
        rng = np.random.default_rng(11)
        view = quotient_primitive(build_hypercubic(3), [[1, 5, -1], [4, 1, 0]])
        t = np.array(view.chiral.entries, dtype=float)
        for _ in range(20):
            kap = rng.uniform(-np.pi, np.pi, size=1)
            k = view.quasimomentum(kap)
            # exact integer identity, float evaluation leaves a few ulps
            assert np.abs(t @ k).max() <= 1e-12 * max(1.0, np.abs(k).max())

    def test_not_primitive(self):
        with pytest.raises(NotPrimitive):
            quotient_primitive(build_hexagonal(1.0), [[2, 0]])

    def test_wrong_shape(self):
        with pytest.raises(WrongShape):
            quotient_primitive(build_hexagonal(1.0), [[1, 0], [0, 1]])

    def test_reduced_graph_matches_base(self):
        rng = np.random.default_rng(5)
        view = quotient_primitive(build_hexagonal(1.0), [[5, 2]])
        red = view.reduced_graph()
        assert red.dimension == 1 and red.nu == 2
        for _ in range(10):
            kap = rng.uniform(-np.pi, np.pi, size=1)
            a = band_functions(red, kap)
            b = band_functions(build_hexagonal(1.0), view.quasimomentum(kap))
            assert np.abs(a - b).max() < 1e-12


class TestQuotientGeneral:
    def test_zigzag_structure(self):
        g = quotient_general(build_hexagonal(1.0), [[2, 0]])
        assert g.nu == 4 and g.dimension == 1
        assert [v.label for v in g.vertices] == ["v1#0", "v2#0", "v1#1", "v2#1"]
        assert connectivity_check(g)

    def test_zigzag_bands_with_flats(self):
        q = 1.0
        g = quotient_general(build_hexagonal(q), [[2, 0]])
        for kap in (-2.5, -0.4, 0.0, 0.9, np.pi):
            got = band_functions(g, (kap,))
            wide = np.sqrt(5.0 + 4.0 * np.cos(kap) + q * q)
            flat = np.sqrt(1.0 + q * q)
            want = np.sort([3 - wide, 3 - flat, 3 + flat, 3 + wide])
            assert np.abs(got - want).max() < 1e-10

    def test_vertex_count_is_index_times_nu(self):
        rng = np.random.default_rng(23)
        g = build_hexagonal(0.7)
        trials = 0
        while trials < 25:
            row = [int(x) for x in rng.integers(-4, 5, size=2)]
            if row == [0, 0]:
                continue
            trials += 1
            t = IntMatrix.from_rows([row])
            _, index = saturation(t)
            assert quotient_general(g, t).nu == index * g.nu

    def test_hypercubic_triple_wrap(self):
        g = quotient_general(build_hypercubic(2), [[3, 0]])
        assert g.nu == 3
        rng = np.random.default_rng(3)
        for _ in range(10):
            kap = float(rng.uniform(-np.pi, np.pi))
            got = band_functions(g, (kap,))
            want = np.sort(
                [4.0 - 2.0 * np.cos(2.0 * np.pi * j / 3.0) - 2.0 * np.cos(kap) for j in range(3)]
            )
            assert np.abs(got - want).max() < 1e-10

    def test_primitive_case_equals_view(self):
        rng = np.random.default_rng(17)
        base = build_hexagonal(1.3)
        for t in ([[5, 2]], [[1, 0]], [[3, -2]]):
            gen = quotient_general(base, t)
            red = quotient_primitive(base, t).reduced_graph()
            assert gen.nu == base.nu
            kaps = rng.uniform(-np.pi, np.pi, size=(12, 1))
            assert np.abs(sample_points(gen, kaps) - sample_points(red, kaps)).max() < 1e-10

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            quotient_general(build_hypercubic(3), [[1, 2, 3], [2, 4, 6]])


class TestGaugeInvariance:
    def test_regauged_offsets_keep_spectrum(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            d = int(rng.integers(1, 4))
            nu = int(rng.integers(1, 5))
            g = random_graph(rng, d, nu, n_edges=int(rng.integers(1, 7)))
            shift = {v: rng.integers(-3, 4, size=d) for v in range(nu)}
            moved = []
            for e in g.edges:
                off = np.array(e.offset) + shift[e.head] - shift[e.tail]
                moved.append((e.tail, e.head, tuple(int(x) for x in off)))
            g2 = FundamentalGraph(d, [(v.label, v.potential) for v in g.vertices], moved)
            for _ in range(3):
                k = rng.uniform(-np.pi, np.pi, size=d)
                a = band_functions(g, k)
                b = band_functions(g2, k)
                assert np.abs(a - b).max() < 1e-10


class TestOracleAgreement:
    def test_assembly_matches_dense_oracle(self):
        rng = np.random.default_rng(97)
        from zonefold.floquet import floquet_matrix

        for _ in range(50):
            d = int(rng.integers(1, 4))
            nu = int(rng.integers(1, 5))
            g = random_graph(rng, d, nu, n_edges=int(rng.integers(1, 8)))
            k = rng.uniform(-np.pi, np.pi, size=d)
            assert np.abs(floquet_matrix(g, k).entries - dense_floquet(g, k)).max() < 1e-14
