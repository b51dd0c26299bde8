# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Floquet assembly plus a scalar cyclic Jacobi eigensolver.

Semantics match the numpy fallback bit for bit where that is well defined:
same sweep limit, same relative off-diagonal target, same rotation angles,
exact diagonal overwrite after each rotation and a stable ascending sort.
"""

import numpy as np

cimport cython
from libc.math cimport cos, fabs, sin, sqrt

from ..errors import ConvergenceError

cdef int MAX_SWEEPS = 60
cdef double OFF_TOL = 1e-13
cdef double ROT_EPS_SCALE = 1e-18


cdef inline double _cmod(double complex z) noexcept:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef double _fro_norm(double complex[:, ::1] a) noexcept:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    cdef double complex z
    for i in range(n):
        for j in range(n):
            z = a[i, j]
            acc += z.real * z.real + z.imag * z.imag
    return sqrt(acc)


cdef double _off_max(double complex[:, ::1] a) noexcept:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double best = 0.0
    cdef double r
    for i in range(n):
        for j in range(n):
            if i != j:
                r = _cmod(a[i, j])
                if r > best:
                    best = r
    return best


cdef int _jacobi_one(double complex[:, ::1] a, double complex[:, ::1] vec,
                     bint with_vectors, double tol, double rot_eps) noexcept:
    """Diagonalize one Hermitian matrix in place; returns 1 on convergence."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t sweep, p, q, i
    cdef double r, app, aqq, tau, sign, t, c, s
    cdef double complex apq, phase, w, cp, cq
    if n == 1:
        return 1
    for sweep in range(MAX_SWEEPS):
        if _off_max(a) <= tol:
            return 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = _cmod(apq)
                if r <= rot_eps:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (app - aqq) / (2.0 * r)
                sign = 1.0 if tau >= 0.0 else -1.0
                t = sign / (fabs(tau) + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                phase = apq / r
                w = s * phase.conjugate()

                for i in range(n):
                    cp = a[i, p]
                    cq = a[i, q]
                    a[i, p] = c * cp + w * cq
                    a[i, q] = -w.conjugate() * cp + c * cq
                for i in range(n):
                    cp = a[p, i]
                    cq = a[q, i]
                    a[p, i] = c * cp + w.conjugate() * cq
                    a[q, i] = -w * cp + c * cq
                if with_vectors:
                    for i in range(n):
                        cp = vec[i, p]
                        cq = vec[i, q]
                        vec[i, p] = c * cp + w * cq
                        vec[i, q] = -w.conjugate() * cp + c * cq

                a[p, p] = app + t * r
                a[q, q] = aqq - t * r
                a[p, q] = 0.0
                a[q, p] = 0.0
    return 1 if _off_max(a) <= tol else 0


cdef void _sorted_diag(double complex[:, ::1] a, double[::1] out,
                       Py_ssize_t[::1] perm) noexcept:
    """Stable ascending sort of the diagonal; permutation lands in perm."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double v
    for i in range(n):
        perm[i] = i
    # insertion sort keyed on the diagonal, stable for ties
    for i in range(1, n):
        k = perm[i]
        v = a[k, k].real
        j = i - 1
        while j >= 0 and a[perm[j], perm[j]].real > v:
            perm[j + 1] = perm[j]
            j -= 1
        perm[j + 1] = k
    for i in range(n):
        out[i] = a[perm[i], perm[i]].real


cdef void _permute_columns(double complex[:, ::1] vec, Py_ssize_t[::1] perm,
                           double complex[:, ::1] scratch) noexcept:
    cdef Py_ssize_t n = vec.shape[0]
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            scratch[i, j] = vec[i, perm[j]]
    for i in range(n):
        for j in range(n):
            vec[i, j] = scratch[i, j]


def eigvalsh_single(matrix):
    """Ascending eigenvalues of one Hermitian matrix."""
    a = np.array(matrix, dtype=complex)
    a = np.ascontiguousarray(0.5 * (a + a.conj().T))
    cdef Py_ssize_t n = a.shape[0]
    cdef double scale = _fro_norm(a)
    cdef double tol = OFF_TOL * (scale if scale > 1.0 else 1.0)
    cdef double rot_eps = ROT_EPS_SCALE * (scale if scale > 1.0 else 1.0)
    if not _jacobi_one(a, a, 0, tol, rot_eps):
        raise ConvergenceError("Jacobi sweep limit reached without convergence")
    vals = np.empty(n, dtype=float)
    perm = np.empty(n, dtype=np.intp)
    _sorted_diag(a, vals, perm)
    return vals


def eigh_single(matrix):
    """Ascending eigenvalues and matching eigenvector columns."""
    a = np.array(matrix, dtype=complex)
    a = np.ascontiguousarray(0.5 * (a + a.conj().T))
    cdef Py_ssize_t n = a.shape[0]
    vec = np.eye(n, dtype=complex)
    cdef double scale = _fro_norm(a)
    cdef double tol = OFF_TOL * (scale if scale > 1.0 else 1.0)
    cdef double rot_eps = ROT_EPS_SCALE * (scale if scale > 1.0 else 1.0)
    if not _jacobi_one(a, vec, 1, tol, rot_eps):
        raise ConvergenceError("Jacobi sweep limit reached without convergence")
    vals = np.empty(n, dtype=float)
    perm = np.empty(n, dtype=np.intp)
    scratch = np.empty((n, n), dtype=complex)
    _sorted_diag(a, vals, perm)
    _permute_columns(vec, perm, scratch)
    return vals, vec


def sample_bands(nu, base_diag, loop_v, loop_off, pair_u, pair_v, pair_off,
                 kpoints):
    """Assemble H(k) for every row of kpoints and return sorted eigenvalues."""
    cdef Py_ssize_t nn = int(nu)
    kpts = np.ascontiguousarray(kpoints, dtype=np.float64)
    cdef Py_ssize_t npts = kpts.shape[0]
    out = np.empty((npts, nn), dtype=float)
    if npts == 0:
        return out

    dim = kpts.shape[1]
    cdef double[::1] base = np.ascontiguousarray(base_diag, dtype=np.float64)
    cdef long[::1] lv = np.ascontiguousarray(loop_v, dtype=np.int64).reshape(-1)
    cdef double[:, ::1] loff = np.ascontiguousarray(
        loop_off, dtype=np.float64).reshape(-1, dim)
    cdef long[::1] pu = np.ascontiguousarray(pair_u, dtype=np.int64).reshape(-1)
    cdef long[::1] pv = np.ascontiguousarray(pair_v, dtype=np.int64).reshape(-1)
    cdef double[:, ::1] poff = np.ascontiguousarray(
        pair_off, dtype=np.float64).reshape(-1, dim)
    cdef double[:, ::1] kv = kpts
    cdef double[:, ::1] outv = out
    cdef Py_ssize_t d = kv.shape[1]
    cdef Py_ssize_t nloops = lv.shape[0]
    cdef Py_ssize_t npairs = pu.shape[0]

    h_arr = np.empty((nn, nn), dtype=complex)
    vals_arr = np.empty(nn, dtype=float)
    perm_arr = np.empty(nn, dtype=np.intp)
    cdef double complex[:, ::1] h = h_arr
    cdef double[::1] vals = vals_arr
    cdef Py_ssize_t[::1] perm = perm_arr

    cdef Py_ssize_t ip, i, j, e
    cdef double ph, scale, tol, rot_eps
    cdef double complex z
    for ip in range(npts):
        for i in range(nn):
            for j in range(nn):
                h[i, j] = 0.0
        for i in range(nn):
            h[i, i] = base[i]
        for e in range(nloops):
            ph = 0.0
            for j in range(d):
                ph += loff[e, j] * kv[ip, j]
            h[lv[e], lv[e]] = h[lv[e], lv[e]].real - 2.0 * cos(ph)
        for e in range(npairs):
            ph = 0.0
            for j in range(d):
                ph += poff[e, j] * kv[ip, j]
            z = cos(ph) + 1j * sin(ph)
            h[pu[e], pv[e]] = h[pu[e], pv[e]] - z
            h[pv[e], pu[e]] = h[pv[e], pu[e]] - z.conjugate()

        scale = _fro_norm(h)
        tol = OFF_TOL * (scale if scale > 1.0 else 1.0)
        rot_eps = ROT_EPS_SCALE * (scale if scale > 1.0 else 1.0)
        if not _jacobi_one(h, h, 0, tol, rot_eps):
            raise ConvergenceError(
                "Jacobi sweep limit reached without convergence")
        _sorted_diag(h, vals, perm)
        for i in range(nn):
            outv[ip, i] = vals[i]
    return out
