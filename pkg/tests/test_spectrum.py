"""Band edge location, spectrum sets, and subcovering inclusion."""

import warnings

import numpy as np
import pytest

from zonefold.errors import DisconnectedGraph
from zonefold.floquet import band_functions, sample_dispersion
from zonefold.graph import (
    FundamentalGraph,
    SubcoveringView,
    build_diamond,
    build_hexagonal,
    build_hypercubic,
    quotient_general,
    quotient_primitive,
)
from zonefold.intlat import IntMatrix, UnimodularCompletion, is_primitive_set
from zonefold.spectrum import (
    BandEdge,
    band_edges,
    band_inclusion_check,
    inclusion_check,
    spectrum_set,
    subcovering_band_edges,
    suggested_grid,
    wrap_zone,
)

ROOT10 = np.sqrt(10.0)
ROOT2 = np.sqrt(2.0)


def edge(band, lo, hi):
    return BandEdge(band=band, lower=lo, upper=hi, argmin=(), argmax=(), residual=0.0)


class TestWrap:
    def test_wrap_zone(self):
        assert wrap_zone(np.pi) == np.pi
        assert wrap_zone(-np.pi) == np.pi
        assert abs(wrap_zone(3.0 * np.pi) - np.pi) < 1e-12
        assert wrap_zone(0.0) == 0.0
        assert abs(wrap_zone(2.5 * np.pi) - 0.5 * np.pi) < 1e-12


class TestBandEdges:
    def test_hexagonal_edges(self):
        edges = band_edges(build_hexagonal(1.0), grid=101, refine=1e-10)
        assert abs(edges[0].lower - (3.0 - ROOT10)) < 1e-8
        assert abs(edges[0].upper - 2.0) < 1e-8
        assert abs(edges[1].lower - 4.0) < 1e-8
        assert abs(edges[1].upper - (3.0 + ROOT10)) < 1e-8

    def test_hexagonal_dirac_points_both_kept(self):
        edges = band_edges(build_hexagonal(1.0), grid=101)
        argmax = np.array(edges[0].argmax)
        assert len(argmax) == 2
        kstar = 2.0 * np.pi / 3.0
        found = {tuple(np.sign(np.round(p, 3))) for p in argmax}
        assert found == {(-1.0, 1.0), (1.0, -1.0)}
        for p in argmax:
            assert abs(abs(p[0]) - kstar) < 1e-3 and abs(abs(p[1]) - kstar) < 1e-3

    def test_hypercubic_exact(self):
        edges = band_edges(build_hypercubic(3), grid=64)
        assert abs(edges[0].lower - 0.0) < 1e-10
        assert abs(edges[0].upper - 12.0) < 1e-10

    def test_flat_single_vertex(self):
        g = FundamentalGraph(2, [("v", 1.5)], [])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DisconnectedGraph)
            edges = band_edges(g, grid=16)
        assert edges[0].lower == edges[0].upper == 1.5
        flats = spectrum_set(edges).flat_bands
        assert flats == ((1.5, 1),)

    def test_disconnected_warns(self):
        g = FundamentalGraph(2, [("v", 0.0)], [])
        with pytest.warns(DisconnectedGraph):
            band_edges(g, grid=8)

    def test_arg_points_reproduce_values(self):
        for g in (build_hexagonal(0.7), build_diamond(1.2)):
            for e in band_edges(g, grid=21):
                j = e.band - 1
                for p in e.argmin:
                    assert abs(band_functions(g, p)[j] - e.lower) <= e.residual + 1e-12
                for p in e.argmax:
                    assert abs(band_functions(g, p)[j] - e.upper) <= e.residual + 1e-12

    def test_refinement_improves_on_coarse_grid(self):
        g = build_hexagonal(0.3)
        sample = sample_dispersion(g, 31)
        edges = band_edges(g, grid=31)
        for e in edges:
            j = e.band - 1
            assert e.lower <= sample.values[:, j].min() + 1e-15
            assert e.upper >= sample.values[:, j].max() - 1e-15
            assert e.lower <= e.upper

    def test_first_band_minimum_at_origin(self):
        for g in (build_hypercubic(2), build_hexagonal(1.0), build_diamond(2.0)):
            edges = band_edges(g, grid=33)
            assert abs(edges[0].lower - band_functions(g, np.zeros(g.dimension))[0]) < 1e-8


class TestSubcoveringEdges:
    def test_hexagonal_preserving_chiral(self):
        # t1 - t2 = 3 falls in 3Z, so the rolled-up edges match the full ones
        full = band_edges(build_hexagonal(1.0), grid=101)
        view = quotient_primitive(build_hexagonal(1.0), [[5, 2]])
        sub = subcovering_band_edges(view)
        for f, s in zip(full, sub):
            assert abs(f.lower - s.lower) < 1e-8
            assert abs(f.upper - s.upper) < 1e-8

    def test_hexagonal_gap_widening_chiral(self):
        view = quotient_primitive(build_hexagonal(1.0), [[2, 3]])
        sub = subcovering_band_edges(view)
        assert sub[0].upper < 2.0 - 1e-3
        assert sub[1].lower > 4.0 + 1e-3

    def test_slanted_cubic_value(self):
        view = quotient_primitive(build_hypercubic(3), [[1, 5, -1], [4, 1, 0]])
        sub = subcovering_band_edges(view)
        assert abs(sub[0].upper - 11.34) <= 0.01

    def test_arg_points_lie_in_restricted_zone(self):
        view = quotient_primitive(build_hexagonal(1.0), [[2, 3]])
        t = np.array([[2.0, 3.0]])
        for e in subcovering_band_edges(view):
            for p in list(e.argmin) + list(e.argmax):
                phase = (t @ np.array(p)) / (2.0 * np.pi)
                assert abs(phase - np.round(phase)).max() < 1e-6

    def test_completion_independent(self):
        base = build_hexagonal(1.0)
        view = quotient_primitive(base, [[5, 2]])
        alt = SubcoveringView(
            base=base,
            chiral=IntMatrix.from_rows([[5, 2]]),
            completion=UnimodularCompletion(IntMatrix.from_rows([[5, 2], [2, 1]])),
            residual_dimension=1,
        )
        a = subcovering_band_edges(view)
        b = subcovering_band_edges(alt)
        for ea, eb in zip(a, b):
            assert abs(ea.lower - eb.lower) < 1e-8
            assert abs(ea.upper - eb.upper) < 1e-8


class TestSpectrumSet:
    def test_merge_overlapping(self):
        ss = spectrum_set([edge(1, 0.0, 1.0), edge(2, 0.5, 2.0)])
        assert ss.intervals == ((0.0, 2.0),)

    def test_touching_merge(self):
        ss = spectrum_set([edge(1, 0.0, 1.0), edge(2, 1.0, 2.0)])
        assert ss.intervals == ((0.0, 2.0),)

    def test_hexagonal_gap(self):
        ss = spectrum_set(band_edges(build_hexagonal(1.0), grid=101))
        assert len(ss.intervals) == 2
        (glo, ghi), = ss.gaps()
        assert abs(glo - 2.0) < 1e-8 and abs(ghi - 4.0) < 1e-8

    def test_zigzag_nanotube(self):
        zz = quotient_general(build_hexagonal(1.0), [[2, 0]])
        ss = spectrum_set(band_edges(zz, grid=256))
        assert len(ss.intervals) == 2
        (a1, b1), (a2, b2) = ss.intervals
        assert abs(a1 - (3.0 - ROOT10)) < 1e-8 and abs(b1 - (3.0 - ROOT2)) < 1e-8
        assert abs(a2 - (3.0 + ROOT2)) < 1e-8 and abs(b2 - (3.0 + ROOT10)) < 1e-8
        flat_vals = sorted(v for v, _ in ss.flat_bands)
        assert abs(flat_vals[0] - (3.0 - ROOT2)) < 1e-8
        assert abs(flat_vals[1] - (3.0 + ROOT2)) < 1e-8


class TestInclusion:
    def test_zigzag_inside_hexagonal(self):
        zz = quotient_general(build_hexagonal(1.0), [[2, 0]])
        sub = spectrum_set(band_edges(zz, grid=256))
        full = spectrum_set(band_edges(build_hexagonal(1.0), grid=101))
        assert inclusion_check(sub, full, 1e-6)

    def test_witness(self):
        rep = inclusion_check(
            spectrum_set([edge(1, 0.0, 5.0)]), spectrum_set([edge(1, 0.0, 4.0)]), 1e-9
        )
        assert not rep.ok and rep.witness == 5.0

    def test_gap_straddle_witness(self):
        rep = inclusion_check(
            spectrum_set([edge(1, 0.0, 10.0)]),
            spectrum_set([edge(1, 0.0, 4.0), edge(2, 6.0, 10.0)]),
            1e-9,
        )
        assert not rep.ok and 4.0 < rep.witness < 6.0

    def test_flat_band_witness(self):
        sub = spectrum_set([edge(1, 3.0, 3.0)])
        assert sub.flat_bands
        rep = inclusion_check(sub, spectrum_set([edge(1, 0.0, 1.0)]), 1e-6)
        assert not rep.ok and rep.witness == 3.0

    def test_random_primitive_views_included(self):
        rng = np.random.default_rng(101)
        builders = [
            (build_hexagonal(1.0), 2),
            (build_diamond(1.0), 3),
            (build_hypercubic(3), 3),
        ]
        full_edges = [band_edges(g, grid=25) for g, _ in builders]
        cases = []
        while len(cases) < 50:
            pick = int(rng.integers(len(builders)))
            g, d = builders[pick]
            d_o = int(rng.integers(1, d))
            t = IntMatrix.from_rows(
                [[int(x) for x in rng.integers(-3, 4, size=d)] for _ in range(d_o)]
            )
            try:
                if not is_primitive_set(t):
                    continue
            except Exception:
                continue
            cases.append((pick, t))
        for pick, t in cases:
            g, _ = builders[pick]
            sub = subcovering_band_edges(quotient_primitive(g, t), refine=1e-9)
            report = band_inclusion_check(sub, full_edges[pick], 1e-6)
            assert report, report.detail


class TestSuggestedGrid:
    def test_floor_and_scaling(self):
        g = build_hexagonal(1.0)
        assert suggested_grid(g) == (64, 64)
        view = quotient_primitive(build_hypercubic(3), [[16, 17, 2], [5, 1, 0]])
        red = view.reduced_graph()
        counts = suggested_grid(red)
        biggest = max(abs(x) for e in red.edges for x in e.offset)
        assert counts[0] >= 6 * biggest + 1
