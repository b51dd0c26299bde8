"""Floquet operator assembly and dispersion sampling.

H(k) acts on one value per fundamental vertex: the diagonal carries
deg(v) + Q(v) minus loop phase terms, off-diagonal entries carry minus the
sum of edge phases e^{i<beta,k>}. Eigenvalues come from the self-contained
kernel backends, never from an external LAPACK routine.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import isfinite
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import GridTooLarge, NotHermitian, ValidationError
from .graph import FundamentalGraph

HERMITICITY_TOL = 1e-12
DEFAULT_CELL_BUDGET = 10**7


@dataclass(frozen=True)
class FloquetMatrix:
    """Hermitian Floquet operator at one quasimomentum."""

    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DispersionSample:
    """Band functions tabulated on a quasimomentum grid.

    grid has shape (N, d) with points in row-major axis order; values has
    shape (N, nu) with each row ascending.
    """

    grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class _AssemblyPlan:
    nu: int
    base_diag: np.ndarray
    loop_v: np.ndarray
    loop_off: np.ndarray
    pair_u: np.ndarray
    pair_v: np.ndarray
    pair_off: np.ndarray


@lru_cache(maxsize=64)
def _plan(graph: FundamentalGraph) -> _AssemblyPlan:
    degs = graph.degrees()
    base = np.array([d + v.potential for d, v in zip(degs, graph.vertices)], dtype=float)
    loops = [e for e in graph.edges if e.tail == e.head]
    pairs = [e for e in graph.edges if e.tail != e.head]
    d = graph.dimension
    return _AssemblyPlan(
        nu=graph.nu,
        base_diag=base,
        loop_v=np.array([e.tail for e in loops], dtype=np.int32),
        loop_off=np.array([e.offset for e in loops], dtype=float).reshape(len(loops), d),
        pair_u=np.array([e.tail for e in pairs], dtype=np.int32),
        pair_v=np.array([e.head for e in pairs], dtype=np.int32),
        pair_off=np.array([e.offset for e in pairs], dtype=float).reshape(len(pairs), d),
    )


def _check_k(graph: FundamentalGraph, k: Sequence[float]) -> np.ndarray:
    vec = np.asarray(k, dtype=float)
    if vec.shape != (graph.dimension,):
        raise ValidationError(f"quasimomentum must have length {graph.dimension}")
    if not all(isfinite(x) for x in vec):
        raise ValidationError(f"quasimomentum {vec} has non-finite entries")
    return vec


def floquet_matrix(graph: FundamentalGraph, k: Sequence[float]) -> FloquetMatrix:
    """Assemble H(k) for the fundamental graph."""
    vec = _check_k(graph, k)
    plan = _plan(graph)
    h = np.zeros((plan.nu, plan.nu), dtype=complex)
    diag = plan.base_diag.copy()
    for v, off in zip(plan.loop_v, plan.loop_off):
        diag[v] -= 2.0 * np.cos(off @ vec)
    for u, v, off in zip(plan.pair_u, plan.pair_v, plan.pair_off):
        e = np.exp(1j * (off @ vec))
        h[u, v] -= e
        h[v, u] -= np.conj(e)
    for v in range(plan.nu):
        h[v, v] = diag[v]
    return FloquetMatrix(h)


def hermitian_eigenvalues(matrix: FloquetMatrix | np.ndarray) -> np.ndarray:
    """Ascending real eigenvalues, counting multiplicity."""
    h = matrix.entries if isinstance(matrix, FloquetMatrix) else np.asarray(matrix, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    defect = np.abs(h - h.conj().T).max()
    if defect > HERMITICITY_TOL:
        raise NotHermitian(f"matrix deviates from Hermitian symmetry by {defect:.3e}")
    return _kernels.eigvalsh_single(h)


def band_functions(graph: FundamentalGraph, k: Sequence[float]) -> np.ndarray:
    """lambda_1(k) <= ... <= lambda_nu(k)."""
    return hermitian_eigenvalues(floquet_matrix(graph, k))


def grid_axis(count: int) -> np.ndarray:
    """Uniform axis sample of (-pi, pi], ascending; always contains 0.

    Points are 2 pi m / count wrapped into the half-open zone, so pi enters
    for even counts and -pi never appears.
    """
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ValidationError(f"sample count must be a positive integer, got {count!r}")
    vals = 2.0 * np.pi * np.arange(count) / count
    vals = np.where(vals > np.pi, vals - 2.0 * np.pi, vals)
    return np.sort(vals)


def _axis_counts(graph: FundamentalGraph, axes: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(axes, int) and not isinstance(axes, bool):
        counts: tuple[int, ...] = (axes,) * graph.dimension
    else:
        counts = tuple(axes)  # type: ignore[arg-type]
    if len(counts) != graph.dimension:
        raise ValidationError(f"need {graph.dimension} axis counts, got {len(counts)}")
    return counts


def sample_points(
    graph: FundamentalGraph, kpoints: np.ndarray, workers: int | None = None
) -> np.ndarray:
    """Ascending eigenvalues at each row of kpoints, shape (N, nu).

    Points are independent work items; results land in input order no matter
    how the chunks are scheduled.
    """
    plan = _plan(graph)
    pts = np.ascontiguousarray(kpoints, dtype=float).reshape(-1, graph.dimension)
    n = pts.shape[0]
    out = np.empty((n, plan.nu), dtype=float)
    chunk = min(65536, max(256, (1 << 22) // (plan.nu * plan.nu)))
    ranges = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]

    def run(span: tuple[int, int]) -> None:
        s, e = span
        out[s:e] = _kernels.sample_bands(
            plan.nu,
            plan.base_diag,
            plan.loop_v,
            plan.loop_off,
            plan.pair_u,
            plan.pair_v,
            plan.pair_off,
            pts[s:e],
        )

    if workers is None:
        workers = int(os.environ.get("ZONEFOLD_WORKERS", "0") or 0)
    if workers and workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, ranges))
    else:
        for span in ranges:
            run(span)
    return out


def sample_dispersion(
    graph: FundamentalGraph,
    axes: int | Sequence[int],
    cell_budget: int = DEFAULT_CELL_BUDGET,
    workers: int | None = None,
) -> DispersionSample:
    """Tabulate all band functions on a row-major product grid."""
    counts = _axis_counts(graph, axes)
    total = 1
    for c in counts:
        if isinstance(c, bool) or not isinstance(c, int) or c < 1:
            raise ValidationError(f"sample count must be a positive integer, got {c!r}")
        total *= c
    if total > cell_budget:
        raise GridTooLarge(f"{total} grid cells exceed the budget of {cell_budget}")

    axes_vals = [grid_axis(c) for c in counts]
    grid = np.array(list(product(*axes_vals)), dtype=float).reshape(total, graph.dimension)
    values = sample_points(graph, grid, workers=workers)
    return DispersionSample(grid=grid, values=values)
