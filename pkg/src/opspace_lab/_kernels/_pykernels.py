"""Pure numpy fallback for the block kernels."""
import numpy as np


def block_matmul(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError("block stacks must have identical shapes")
    if a.shape[-1] != a.shape[-2]:
        raise ValueError("blocks must be square")
    return np.matmul(a, b)


def block_poly(x, coeffs):
    x = np.asarray(x, dtype=np.complex128)
    c = np.asarray(coeffs, dtype=np.complex128)
    if x.shape[-1] != x.shape[-2]:
        raise ValueError("blocks must be square")
    out = np.zeros_like(x)
    if c.size == 0:
        return out
    eye = np.eye(x.shape[-1], dtype=np.complex128)
    out = out + c[-1] * eye
    for cm in c[-2::-1]:
        out = out @ x + cm * eye
    return out
