"""Band-edge corrections for rolled-up lattices with large chiral vectors.

A restricted band edge differs from the full one by half the squared norm of
(T H^{-1} T^t)^{-1/2} x_o, where H is the (sign-flipped) Hessian at the
extremum and x_o reduces T k_o into (-pi, pi]^{d_o}. The remainder decays
like 1/tau^3 in the smallest singular value tau of T, improving to 1/tau^4
when every extremum component is 0 or pi.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from . import _kernels
from .errors import (
    BandTouching,
    NotPositiveDefinite,
    NotPrimitive,
    RankDeficient,
    ValidationError,
)
from .floquet import band_functions, sample_dispersion, sample_points
from .graph import FundamentalGraph
from .intlat import as_chiral_matrix, is_primitive_set
from .spectrum import wrap_zone

DEFAULT_STEP = 1e-3
GAP_TOL = 1e-6
SNAP_DENOMINATOR = 12
SNAP_TOL = 1e-6
A2_SCAN_POINTS = 24


@dataclass(frozen=True)
class AsymptoticEstimate:
    """One evaluated band-edge correction.

    h_matrix holds the Hessian with the edge sign folded in (negated for an
    upper edge), so it is positive definite whenever the estimate exists.
    """

    band: int
    side: Literal["lower", "upper"]
    k_o: tuple[float, ...]
    h_matrix: tuple[tuple[float, ...], ...]
    x_o: tuple[float, ...]
    correction: float
    predicted: float
    tau: float
    remainder_order: int
    snapped: bool = False
    warnings: tuple[str, ...] = ()


def _band_value(graph: FundamentalGraph, j: int, k: np.ndarray) -> float:
    return float(band_functions(graph, k)[j - 1])


def _check_band_index(graph: FundamentalGraph, j: int) -> None:
    if isinstance(j, bool) or not isinstance(j, int) or not 1 <= j <= graph.nu:
        raise ValidationError(f"band index must be in 1..{graph.nu}, got {j!r}")


def _gap_check(graph: FundamentalGraph, j: int, k: np.ndarray, gap_tol: float) -> None:
    vals = band_functions(graph, k)
    if j >= 2 and vals[j - 1] - vals[j - 2] <= gap_tol:
        raise BandTouching(
            f"band {j} touches band {j - 1} at k={tuple(k)}: gap {vals[j - 1] - vals[j - 2]:.3e}"
        )
    if j <= graph.nu - 1 and vals[j] - vals[j - 1] <= gap_tol:
        raise BandTouching(
            f"band {j} touches band {j + 1} at k={tuple(k)}: gap {vals[j] - vals[j - 1]:.3e}"
        )


def _fd_hessian(graph: FundamentalGraph, j: int, k: np.ndarray, h: float) -> np.ndarray:
    d = graph.dimension
    points = [k]
    index = {}
    for i in range(d):
        for sign in (+1, -1):
            p = k.copy()
            p[i] += sign * h
            index[(i, sign)] = len(points)
            points.append(p)
    for a in range(d):
        for b in range(a + 1, d):
            for sa in (+1, -1):
                for sb in (+1, -1):
                    p = k.copy()
                    p[a] += sa * h
                    p[b] += sb * h
                    index[(a, sa, b, sb)] = len(points)
                    points.append(p)
    vals = sample_points(graph, np.array(points))[:, j - 1]

    hess = np.zeros((d, d))
    for i in range(d):
        hess[i, i] = (vals[index[(i, 1)]] - 2.0 * vals[0] + vals[index[(i, -1)]]) / (h * h)
    for a in range(d):
        for b in range(a + 1, d):
            cross = (
                vals[index[(a, 1, b, 1)]]
                - vals[index[(a, 1, b, -1)]]
                - vals[index[(a, -1, b, 1)]]
                + vals[index[(a, -1, b, -1)]]
            ) / (4.0 * h * h)
            hess[a, b] = cross
            hess[b, a] = cross
    return 0.5 * (hess + hess.T)


def hessian_fd(
    graph: FundamentalGraph,
    j: int,
    k_o: Sequence[float],
    h: float = DEFAULT_STEP,
    gap_tol: float = GAP_TOL,
    richardson: bool = True,
) -> np.ndarray:
    """Finite-difference Hessian of band j at k_o, symmetrized.

    The band must be isolated from its neighbors at k_o; at a crossing the
    sorted band function has no second derivative and the stencil would
    silently return garbage, so that case raises instead.
    """
    _check_band_index(graph, j)
    k = np.asarray(k_o, dtype=float)
    if k.shape != (graph.dimension,):
        raise ValidationError(f"k_o must have length {graph.dimension}")
    _gap_check(graph, j, k, gap_tol)
    coarse = _fd_hessian(graph, j, k, h)
    if not richardson:
        return coarse
    fine = _fd_hessian(graph, j, k, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def _snap_component(x: float) -> tuple[float, bool]:
    """Snap to the nearest rational multiple of pi with small denominator."""
    r = x / np.pi
    for den in range(1, SNAP_DENOMINATOR + 1):
        num = round(r * den)
        if abs(r - num / den) * np.pi <= SNAP_TOL:
            # sub-1e-12 adjustments are float noise, not a real snap
            return np.pi * num / den, (abs(r - num / den) * np.pi > 1e-12)
    return x, False


def snap_quasimomentum(k: Sequence[float]) -> tuple[np.ndarray, bool]:
    """Snap each component to rational multiples of pi within the tolerance."""
    out = []
    changed = False
    for x in np.asarray(k, dtype=float):
        v, c = _snap_component(float(x))
        out.append(v)
        changed = changed or c
    return np.array(out), changed


def reduce_mod_2pi(v: Sequence[float]) -> np.ndarray:
    """Componentwise reduction into (-pi, pi], exact on small rationals of pi.

    A float near a multiple of pi/q for modest q is reduced through exact
    fraction arithmetic, so pi stays pi instead of drifting to -pi + 1e-16.
    """
    out = []
    for x in np.asarray(v, dtype=float).ravel():
        r = x / np.pi
        reduced = None
        for den in range(1, 49):
            num = round(r * den)
            if abs(r - num / den) < 5e-10:
                frac = Fraction(int(num), int(den)) % 2  # into [0, 2)
                if frac > 1:
                    frac -= 2
                reduced = np.pi * frac.numerator / frac.denominator
                break
        if reduced is None:
            reduced = wrap_zone(x)
        out.append(reduced)
    return np.array(out)


def sym_inverse_sqrt(a: np.ndarray) -> np.ndarray:
    """Inverse square root of a symmetric positive definite matrix."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    m = 0.5 * (m + m.T)
    vals, vecs = _kernels.eigh_single(m)
    scale = max(abs(vals[0]), abs(vals[-1]), 1e-300)
    if vals[0] <= 1e-12 * scale:
        raise NotPositiveDefinite(f"smallest eigenvalue {vals[0]:.3e} vs scale {scale:.3e}")
    v = vecs.real
    return (v * (1.0 / np.sqrt(vals))[None, :]) @ v.T


def constrained_nearest(k_o: Sequence[float], chiral: object) -> np.ndarray:
    """Point of {k : T k = 0} nearest to k_o in the Euclidean norm."""
    t = as_chiral_matrix(chiral)
    tm = np.array(t.entries, dtype=float)
    k = np.asarray(k_o, dtype=float)
    if k.shape != (tm.shape[1],):
        raise ValidationError(f"k_o must have length {tm.shape[1]}")
    try:
        r = sym_inverse_sqrt(tm @ tm.T)
    except NotPositiveDefinite as exc:
        raise RankDeficient(f"chiral matrix has linearly dependent rows: {exc}") from exc
    # pseudoinverse through the same self-contained eigendecomposition
    return k - tm.T @ (r @ r) @ (tm @ k)


def _a2_scan(
    graph: FundamentalGraph, j: int, side: str, k_o: np.ndarray, value: float
) -> tuple[str, ...]:
    """Grid sweep looking for other extremal clusters (uniqueness heuristic)."""
    if graph.dimension > 3:
        return ("uniqueness scan skipped for dimension > 3",)
    sample = sample_dispersion(graph, A2_SCAN_POINTS)
    vals = sample.values[:, j - 1]
    best = vals.min() if side == "lower" else vals.max()
    tol = 1e-6 * max(1.0, abs(value))
    if (side == "lower" and best < value - tol) or (side == "upper" and best > value + tol):
        return (f"k_o does not attain the band {side} edge: grid found {best!r}",)
    near = np.abs(vals - value) <= tol
    out = []
    for idx in np.nonzero(near)[0]:
        p = sample.grid[idx]
        d_plus = np.linalg.norm([wrap_zone(a - b) for a, b in zip(p, k_o)])
        d_minus = np.linalg.norm([wrap_zone(a + b) for a, b in zip(p, k_o)])
        spacing = 2.0 * np.pi / A2_SCAN_POINTS
        if min(d_plus, d_minus) > np.sqrt(graph.dimension) * spacing:
            out.append(
                "extremum is attained away from k_o as well "
                f"(near {tuple(round(float(x), 4) for x in p)}); uniqueness not certain"
            )
            break
    return tuple(out)


def band_edge_asymptotic(
    graph: FundamentalGraph,
    j: int,
    side: Literal["lower", "upper"],
    k_o: Sequence[float],
    chiral: object,
    h: float = DEFAULT_STEP,
    gap_tol: float = GAP_TOL,
    scan: bool = True,
) -> AsymptoticEstimate:
    """Predicted rolled-up band edge from the full-lattice extremum at k_o."""
    _check_band_index(graph, j)
    if side not in ("lower", "upper"):
        raise ValidationError(f"side must be 'lower' or 'upper', got {side!r}")
    t = as_chiral_matrix(chiral, graph.dimension)
    if not is_primitive_set(t):
        raise NotPrimitive(f"{t} is not a primitive set of lattice vectors")

    k, snapped = snap_quasimomentum(k_o)
    notes: list[str] = []
    if snapped:
        notes.append("k_o snapped to rational multiples of pi")

    hess = hessian_fd(graph, j, k, h=h, gap_tol=gap_tol)
    sign = 1.0 if side == "lower" else -1.0
    big_h = sign * hess
    try:
        h_inv_sqrt = sym_inverse_sqrt(big_h)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(
            f"{'Hessian' if side == 'lower' else 'negated Hessian'} at k_o is not "
            f"positive definite: {exc}"
        ) from exc

    tm = np.array(t.entries, dtype=float)
    x_o = reduce_mod_2pi(tm @ k)

    ts = tm @ h_inv_sqrt  # M = T H^-1 T^t = (T H^-1/2)(T H^-1/2)^t
    m = ts @ ts.T
    r = sym_inverse_sqrt(m)
    correction = 0.5 * float(np.dot(r @ x_o, r @ x_o))

    if t.rows == 1:
        scalar = 0.5 * float(x_o[0] ** 2) / float(m[0, 0])
        if abs(scalar - correction) > 1e-12 * max(1.0, abs(correction)):
            raise AssertionError(
                f"scalar and matrix routes disagree: {scalar!r} vs {correction!r}"
            )

    value = _band_value(graph, j, k)
    predicted = value + sign * correction

    gram_vals = _kernels.eigvalsh_single(tm @ tm.T)
    tau = float(np.sqrt(max(gram_vals[0], 0.0)))

    on_half_lattice = all(
        min(abs(c), abs(abs(c) - np.pi)) <= 1e-9 for c in reduce_mod_2pi(k)
    )
    order = 4 if on_half_lattice else 3

    if scan:
        notes.extend(_a2_scan(graph, j, side, k, value))

    return AsymptoticEstimate(
        band=j,
        side=side,
        k_o=tuple(float(x) for x in k),
        h_matrix=tuple(tuple(float(x) for x in row) for row in big_h),
        x_o=tuple(float(x) for x in x_o),
        correction=correction,
        predicted=predicted,
        tau=tau,
        remainder_order=order,
        snapped=snapped,
        warnings=tuple(notes),
    )
