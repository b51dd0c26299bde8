"""Numeric kernel backends.

The compiled Cython backend is preferred when its extension module built;
the numpy fallback implements identical semantics. `ZONEFOLD_BACKEND=pure`
forces the fallback, `ZONEFOLD_BACKEND=compiled` insists on the extension.

Both backends expose:
    eigvalsh_single(matrix) -> ascending eigenvalues of one Hermitian matrix
    eigh_single(matrix) -> (values, eigenvector columns), values ascending
    sample_bands(nu, base_diag, loop_v, loop_off, pair_u, pair_v, pair_off,
                 kpoints) -> (N, nu) ascending eigenvalues per grid point
"""

import os

from . import _pure

_requested = os.environ.get("ZONEFOLD_BACKEND", "").strip().lower()

if _requested == "pure":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _pure
        BACKEND = "pure"

eigvalsh_single = _impl.eigvalsh_single
eigh_single = _impl.eigh_single
sample_bands = _impl.sample_bands

__all__ = ["BACKEND", "eigvalsh_single", "eigh_single", "sample_bands", "_pure"]
