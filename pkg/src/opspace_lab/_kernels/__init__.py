"""Block kernels: compiled extension when available, numpy otherwise.

Set ``OPSPACE_LAB_PURE=1`` to force the numpy implementation.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("OPSPACE_LAB_PURE"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def block_matmul(a, b):
    """Blockwise product of two equally shaped stacks ``(..., d, d)``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    lead, d = a.shape[:-2], a.shape[-2:]
    return _impl.block_matmul(a.reshape((-1,) + d), b.reshape((-1,) + d)).reshape(lead + d)


def block_poly(x, coeffs):
    """Apply a polynomial (ascending coefficients) to every block of ``x``."""
    x = np.asarray(x, dtype=np.complex128)
    lead, d = x.shape[:-2], x.shape[-2:]
    return _impl.block_poly(x.reshape((-1,) + d), np.asarray(coeffs, dtype=np.complex128)).reshape(lead + d)


__all__ = ["BACKEND", "block_matmul", "block_poly"]
