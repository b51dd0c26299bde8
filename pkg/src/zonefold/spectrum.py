"""Band edges, spectrum sets, and the subcovering inclusion check.

Extrema of band functions are located by a coarse grid scan followed by a
derivative-free local zoom: every grid-level tie seeds a shrinking window
search, so symmetric extrema (Dirac points and their mirrors) are all kept.
Values carry an explicit refinement residual instead of a certified bound.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .errors import DisconnectedGraph, ValidationError
from .floquet import grid_axis, sample_dispersion, sample_points
from .graph import FundamentalGraph, SubcoveringView, connectivity_check

DEFAULT_GRID = 64
DEFAULT_REFINE = 1e-10
FLAT_TOL = 1e-8
CLUSTER_RADIUS = 1e-3
MAX_ZOOM_LEVELS = 40
MAX_SEEDS = 64
NON_ISOLATED_COUNT = 32


@dataclass(frozen=True)
class BandEdge:
    """Extremal data of one band: one record per band index (1-based)."""

    band: int
    lower: float
    upper: float
    argmin: tuple[tuple[float, ...], ...]
    argmax: tuple[tuple[float, ...], ...]
    residual: float
    min_non_isolated: bool = False
    max_non_isolated: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class SpectrumSet:
    """Union of closed intervals plus isolated flat-band values."""

    intervals: tuple[tuple[float, float], ...]
    flat_bands: tuple[tuple[float, int], ...]

    def gaps(self) -> tuple[tuple[float, float], ...]:
        """Open gaps between consecutive intervals (flat bands ignored)."""
        out = []
        for (_, hi), (lo, _) in zip(self.intervals, self.intervals[1:]):
            if lo > hi:
                out.append((hi, lo))
        return tuple(out)

    def covers(self, x: float, tol: float) -> bool:
        if any(lo - tol <= x <= hi + tol for lo, hi in self.intervals):
            return True
        return any(abs(x - v) <= tol for v, _ in self.flat_bands)


@dataclass(frozen=True)
class InclusionReport:
    """Verdict of a set inclusion with the worst offending value if any."""

    ok: bool
    witness: float | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def wrap_zone(x: float) -> float:
    """Map a real number into the half-open zone (-pi, pi]."""
    w = x - 2.0 * np.pi * np.round(x / (2.0 * np.pi))
    if w <= -np.pi:
        w += 2.0 * np.pi
    return float(w)


def suggested_grid(graph: FundamentalGraph, per_oscillation: int = 12) -> tuple[int, ...]:
    """Axis counts resolving the fastest phase oscillation of any edge.

    Rolled-up graphs carry large transformed offsets; a fixed coarse grid
    would alias their bands, so the count scales with the largest offset
    component per axis.
    """
    counts = []
    for s in range(graph.dimension):
        fastest = max((abs(e.offset[s]) for e in graph.edges), default=1)
        counts.append(max(DEFAULT_GRID, per_oscillation * fastest + 1))
    return tuple(counts)


def _zoom_side(
    graph: FundamentalGraph,
    j: int,
    sign: float,
    grid: np.ndarray,
    values: np.ndarray,
    refine: float,
) -> tuple[float, tuple[tuple[float, ...], ...], float, bool]:
    """Refine one side (sign=+1 minimum, sign=-1 maximum) of band j."""
    d = graph.dimension
    v = sign * values[:, j]
    # seed every cell in the running for the optimum: coarse sampling can
    # misrank basins that differ by less than the per-cell sampling error,
    # so near-ties are refined in parallel and the best survivor wins
    order = np.argsort(v, kind="stable")
    seed_idx = [int(i) for i in order[:MAX_SEEDS]]

    centers = [grid[i].copy() for i in seed_idx]
    center_vals = [float(v[i]) for i in seed_idx]
    # window starts at one coarse cell on each side
    widths = [_min_spacing(grid, d)] * len(centers)
    active = [True] * len(centers)

    per_dim = 9 if d <= 3 else (5 if d <= 5 else 3)
    steps = np.array(list(product(np.linspace(-1.0, 1.0, per_dim), repeat=d)))
    for _ in range(MAX_ZOOM_LEVELS):
        live = [i for i, a in enumerate(active) if a]
        if not live:
            break
        pts = np.concatenate([centers[i] + widths[i] * steps for i in live])
        vals = sign * sample_points(graph, pts)[:, j]
        block = steps.shape[0]
        for slot, i in enumerate(live):
            chunk = vals[slot * block : (slot + 1) * block]
            b = int(np.argmin(chunk))
            improved = center_vals[i] - float(chunk[b])
            if improved > 0.0:
                centers[i] = pts[slot * block + b].copy()
                center_vals[i] = float(chunk[b])
            widths[i] *= 0.5
            if improved < refine:
                active[i] = False

    final_best = min(center_vals)
    keep_tol = max(10.0 * refine, 1e-9 * max(1.0, abs(final_best)))
    kept = sorted(
        (cv, idx) for idx, cv in enumerate(center_vals) if cv <= final_best + keep_tol
    )
    reps: list[tuple[float, ...]] = []
    rep_vals: list[float] = []
    for cv, idx in kept:
        point = tuple(wrap_zone(x) for x in centers[idx])
        if all(_torus_distance(point, r) > CLUSTER_RADIUS for r in reps):
            reps.append(point)
            rep_vals.append(cv)
    residual = max(max(rep_vals) - final_best, refine)
    return sign * final_best, tuple(reps), residual, len(reps) > NON_ISOLATED_COUNT


def _min_spacing(grid: np.ndarray, d: int) -> float:
    spacing = 2.0 * np.pi
    for s in range(d):
        ax = np.unique(grid[:, s])
        if len(ax) > 1:
            spacing = min(spacing, float(np.diff(ax).min()))
    return spacing


def _torus_distance(a: Sequence[float], b: Sequence[float]) -> float:
    deltas = [wrap_zone(x - y) for x, y in zip(a, b)]
    return float(np.sqrt(sum(t * t for t in deltas)))


def band_edges(
    graph: FundamentalGraph,
    grid: int | Sequence[int] = DEFAULT_GRID,
    refine: float = DEFAULT_REFINE,
    workers: int | None = None,
) -> list[BandEdge]:
    """Global minimum and maximum of every band over the Brillouin zone."""
    if not connectivity_check(graph):
        warnings.warn(
            "periodic cover is not connected; band edges computed per component",
            DisconnectedGraph,
            stacklevel=2,
        )
    sample = sample_dispersion(graph, grid, workers=workers)
    out = []
    for j in range(graph.nu):
        lo, amin, res_lo, iso_lo = _zoom_side(graph, j, 1.0, sample.grid, sample.values, refine)
        hi, amax, res_hi, iso_hi = _zoom_side(graph, j, -1.0, sample.grid, sample.values, refine)
        out.append(
            BandEdge(
                band=j + 1,
                lower=lo,
                upper=hi,
                argmin=amin,
                argmax=amax,
                residual=max(res_lo, res_hi),
                min_non_isolated=iso_lo,
                max_non_isolated=iso_hi,
            )
        )
    return out


def subcovering_band_edges(
    view: SubcoveringView,
    grid: int | Sequence[int] | None = None,
    refine: float = DEFAULT_REFINE,
    workers: int | None = None,
) -> list[BandEdge]:
    """Band extrema restricted to the rolled-up zone T k = 0 (mod 2pi).

    Arg points are reported as full-dimensional quasimomenta k(kappa).
    """
    reduced = view.reduced_graph()
    if grid is None:
        grid = suggested_grid(reduced)
    edges = band_edges(reduced, grid=grid, refine=refine, workers=workers)
    out = []
    for e in edges:
        amin = tuple(_lift(view, kap) for kap in e.argmin)
        amax = tuple(_lift(view, kap) for kap in e.argmax)
        out.append(
            BandEdge(
                band=e.band,
                lower=e.lower,
                upper=e.upper,
                argmin=amin,
                argmax=amax,
                residual=e.residual,
                min_non_isolated=e.min_non_isolated,
                max_non_isolated=e.max_non_isolated,
            )
        )
    return out


def _lift(view: SubcoveringView, kappa: Sequence[float]) -> tuple[float, ...]:
    k = view.quasimomentum(np.asarray(kappa, dtype=float))
    return tuple(wrap_zone(x) for x in k)


def spectrum_set(edges: Sequence[BandEdge], flat_tol: float = FLAT_TOL) -> SpectrumSet:
    """Merge band intervals into a spectrum; narrow bands become flat bands."""
    flats = []
    spans = []
    for e in edges:
        if e.upper - e.lower < flat_tol:
            flats.append((0.5 * (e.lower + e.upper), e.band))
        else:
            spans.append((e.lower, e.upper))
    spans.sort()
    merged: list[list[float]] = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return SpectrumSet(
        intervals=tuple((lo, hi) for lo, hi in merged),
        flat_bands=tuple(flats),
    )


def inclusion_check(sub: SpectrumSet, full: SpectrumSet, tol: float) -> InclusionReport:
    """Is every point of sub's spectrum within tol of full's spectrum?"""
    inflated: list[tuple[float, float]] = [(lo - tol, hi + tol) for lo, hi in full.intervals]
    inflated += [(v - tol, v + tol) for v, _ in full.flat_bands]
    inflated.sort()
    merged: list[list[float]] = []
    for lo, hi in inflated:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    def component_of(x: float) -> int | None:
        for i, (lo, hi) in enumerate(merged):
            if lo <= x <= hi:
                return i
        return None

    def uncovered(a: float, b: float) -> float | None:
        # a point of [a, b] outside the merged components, None when covered
        ib = component_of(b)
        if ib is None:
            return b
        ia = component_of(a)
        if ia is None:
            return a
        if ia == ib:
            return None
        # [a, b] spans a gap between two components
        return 0.5 * (merged[ia][1] + merged[ia + 1][0])

    for lo, hi in sub.intervals:
        w = uncovered(lo, hi)
        if w is not None:
            return InclusionReport(False, w, f"interval [{lo}, {hi}] leaves the spectrum at {w}")
    for v, band in sub.flat_bands:
        if uncovered(v, v) is not None:
            return InclusionReport(False, v, f"flat band {v} (band {band}) is outside")
    return InclusionReport(True)


def band_inclusion_check(
    sub_edges: Sequence[BandEdge], full_edges: Sequence[BandEdge], tol: float
) -> InclusionReport:
    """Per-band interval inclusion [lo_t, hi_t] in [lo - tol, hi + tol]."""
    if len(sub_edges) != len(full_edges):
        return InclusionReport(False, None, "band count mismatch")
    for s, f in zip(sub_edges, full_edges):
        if s.lower < f.lower - tol:
            return InclusionReport(False, s.lower, f"band {s.band} lower edge escapes")
        if s.upper > f.upper + tol:
            return InclusionReport(False, s.upper, f"band {s.band} upper edge escapes")
    return InclusionReport(True)
