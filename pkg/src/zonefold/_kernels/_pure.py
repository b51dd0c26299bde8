"""Numpy fallback kernels: batched Floquet assembly + cyclic Jacobi eigensolver.

Semantics match the compiled backend. The Jacobi iteration runs vectorized
across all grid points of a batch; rotation parameters are computed per
matrix and converged matrices degenerate to identity rotations.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError

_MAX_SWEEPS = 60
_OFF_TOL = 1e-13  # relative off-diagonal target, well inside the 1e-10 contract


def _jacobi_batch(a: np.ndarray, vectors: np.ndarray | None = None) -> np.ndarray:
    """Eigenvalues of a batch of Hermitian matrices, ascending per matrix.

    When an identity-initialized vectors batch is passed, the accumulated
    rotations land there so its columns become the eigenvectors (unsorted;
    the caller reorders them with the returned permutation applied to diag).
    """
    n = a.shape[1]
    if n == 1:
        return a[:, 0, 0].real.copy().reshape(-1, 1)
    scale = np.sqrt((np.abs(a) ** 2).sum(axis=(1, 2)))
    tol = _OFF_TOL * np.maximum(scale, 1.0)
    rot_eps = 1e-18 * np.maximum(scale, 1.0)

    offdiag_mask = ~np.eye(n, dtype=bool)
    converged = False
    for _ in range(_MAX_SWEEPS):
        off = np.abs(a).max(axis=(1, 2), initial=0.0, where=offdiag_mask)
        if np.all(off <= tol):
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                r = np.abs(apq)
                active = r > rot_eps
                if not active.any():
                    continue
                r_safe = np.where(active, r, 1.0)
                app = a[:, p, p].real.copy()  # basic indexing yields views
                aqq = a[:, q, q].real.copy()
                tau = (app - aqq) / (2.0 * r_safe)
                sign = np.where(tau >= 0.0, 1.0, -1.0)
                t = sign / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                phase = np.where(active, apq / r_safe, 1.0 + 0.0j)
                w = (s * np.conj(phase))[:, None]  # s * e^{-i phi}
                cc = c[:, None]

                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = cc * colp + w * colq
                a[:, :, q] = -np.conj(w) * colp + cc * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = cc * rowp + np.conj(w) * rowq
                a[:, q, :] = -w * rowp + cc * rowq
                if vectors is not None:
                    qp = vectors[:, :, p].copy()
                    qq = vectors[:, :, q].copy()
                    vectors[:, :, p] = cc * qp + w * qq
                    vectors[:, :, q] = -np.conj(w) * qp + cc * qq

                a[:, p, p] = app + t * r
                a[:, q, q] = aqq - t * r
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
    if not converged:
        off = np.abs(a).max(axis=(1, 2), initial=0.0, where=offdiag_mask)
        if not np.all(off <= tol):
            raise ConvergenceError("Jacobi sweep limit reached without convergence")

    diag = np.diagonal(a, axis1=1, axis2=2).real
    perm = np.argsort(diag, axis=1, kind="stable")
    if vectors is not None:
        vectors[...] = np.take_along_axis(vectors, perm[:, None, :], axis=2)
    return np.take_along_axis(diag, perm, axis=1)


def eigvalsh_single(matrix: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of one Hermitian matrix."""
    a = np.array(matrix, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    return _jacobi_batch(a[None, :, :])[0]


def eigh_single(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and matching eigenvector columns."""
    a = np.array(matrix, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    vecs = np.eye(a.shape[0], dtype=complex)[None].copy()
    vals = _jacobi_batch(a[None, :, :], vecs)
    return vals[0], vecs[0]


def sample_bands(
    nu: int,
    base_diag: np.ndarray,
    loop_v: np.ndarray,
    loop_off: np.ndarray,
    pair_u: np.ndarray,
    pair_v: np.ndarray,
    pair_off: np.ndarray,
    kpoints: np.ndarray,
) -> np.ndarray:
    """Assemble H(k) for every row of kpoints and return sorted eigenvalues."""
    kpts = np.ascontiguousarray(kpoints, dtype=float)
    npts = kpts.shape[0]
    if npts == 0:
        return np.zeros((0, nu))

    h = np.zeros((npts, nu, nu), dtype=complex)
    diag = np.tile(np.asarray(base_diag, dtype=float), (npts, 1))

    if len(loop_v):
        ph = kpts @ np.asarray(loop_off, dtype=float).T  # (N, L)
        for idx, v in enumerate(loop_v):
            diag[:, v] -= 2.0 * np.cos(ph[:, idx])
    if len(pair_u):
        ph = kpts @ np.asarray(pair_off, dtype=float).T  # (N, P)
        for idx, (u, v) in enumerate(zip(pair_u, pair_v)):
            e = np.exp(1j * ph[:, idx])
            h[:, u, v] -= e
            h[:, v, u] -= np.conj(e)
    for v in range(nu):
        h[:, v, v] = diag[:, v]

    return _jacobi_batch(h)
