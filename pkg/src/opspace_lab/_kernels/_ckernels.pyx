# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled block kernels over stacks of small complex matrices."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def block_matmul(a, b):
    """Per-block product ``out[p] = a[p] @ b[p]`` for stacks of shape (N, d, d)."""
    cdef double complex[:, :, ::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef double complex[:, :, ::1] bv = np.ascontiguousarray(b, dtype=np.complex128)
    if av.shape[0] != bv.shape[0] or av.shape[1] != bv.shape[1] or av.shape[2] != bv.shape[2]:
        raise ValueError("block stacks must have identical shapes")
    if av.shape[1] != av.shape[2]:
        raise ValueError("blocks must be square")
    cdef Py_ssize_t nb = av.shape[0], d = av.shape[1]
    out = np.empty((nb, d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = out
    cdef Py_ssize_t p, i, j, l
    cdef double complex acc
    with nogil:
        for p in range(nb):
            for i in range(d):
                for j in range(d):
                    acc = 0
                    for l in range(d):
                        acc = acc + av[p, i, l] * bv[p, l, j]
                    ov[p, i, j] = acc
    return out


def block_poly(x, coeffs):
    """Evaluate ``sum_m coeffs[m] * x[p]**m`` on every block by Horner's rule."""
    cdef double complex[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef double complex[::1] cv = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if xv.shape[1] != xv.shape[2]:
        raise ValueError("blocks must be square")
    cdef Py_ssize_t nb = xv.shape[0], d = xv.shape[1], deg = cv.shape[0] - 1
    out = np.zeros((nb, d, d), dtype=np.complex128)
    if deg < 0:
        return out
    tmp = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = out
    cdef double complex[:, ::1] tv = tmp
    cdef Py_ssize_t p, i, j, l, m
    cdef double complex acc
    with nogil:
        for p in range(nb):
            for i in range(d):
                ov[p, i, i] = cv[deg]
            m = deg - 1
            while m >= 0:
                for i in range(d):
                    for j in range(d):
                        acc = 0
                        for l in range(d):
                            acc = acc + ov[p, i, l] * xv[p, l, j]
                        tv[i, j] = acc
                for i in range(d):
                    for j in range(d):
                        ov[p, i, j] = tv[i, j]
                    ov[p, i, i] = ov[p, i, i] + cv[m]
                m -= 1
    return out
