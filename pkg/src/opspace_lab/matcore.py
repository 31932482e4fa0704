"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_cmatrix`
validates and converts.  Norms go through a Hermitian eigensolve of the
smaller Gram matrix instead of a full SVD.
"""
from __future__ import annotations

import numpy as np

ABS_FLOOR = 1e-14
HERMITIAN_TOL = 1e-12


class DomainError(ValueError):
    """Input outside the domain of an operation."""


def as_cmatrix(m, *, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DomainError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def scale_tol(m: np.ndarray, rel: float) -> float:
    """Tolerance relative to the largest entry magnitude, floored at ABS_FLOOR."""
    big = float(np.max(np.abs(m))) if m.size else 0.0
    return max(rel * big, ABS_FLOOR)


def _gram_eigs(m: np.ndarray) -> np.ndarray:
    r, c = m.shape
    g = m @ m.conj().T if r <= c else m.conj().T @ m
    return np.linalg.eigvalsh(g)


def spectral_norm(m) -> float:
    """Largest singular value of ``m``."""
    a = as_cmatrix(m)
    if a.size == 0:
        raise DomainError("spectral norm of an empty matrix is undefined")
    if not a.any():
        return 0.0
    # Power-of-two rescaling keeps the Gram matrix away from overflow and
    # underflow, and stays exact even for subnormal inputs.
    _, e = np.frexp(np.max(np.abs(a)))
    scaled = np.ldexp(a.real, -e) + 1j * np.ldexp(a.imag, -e)
    lam = _gram_eigs(scaled)[-1]
    return float(np.ldexp(np.sqrt(max(lam, 0.0)), e))


def smallest_singular(m) -> float:
    """Smallest singular value of a tall (or square) matrix.

    A plain SVD is used here: the Gram route loses relative accuracy for
    small singular values, which is exactly what callers certify.
    """
    a = as_cmatrix(m)
    r, c = a.shape
    if r < c:
        raise DomainError(f"smallest_singular needs rows >= cols, got {r}x{c}")
    if c == 0:
        raise DomainError("matrix has no columns")
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def kron(a, b) -> np.ndarray:
    return np.kron(as_cmatrix(a, name="a"), as_cmatrix(b, name="b"))


def conj_transpose(m) -> np.ndarray:
    return as_cmatrix(m).conj().T


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= scale_tol(m, tol))


def herm_eig_max(m) -> float:
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1] or a.size == 0:
        raise DomainError(f"herm_eig_max needs a nonempty square matrix, got {a.shape}")
    if not is_hermitian(a):
        raise DomainError("herm_eig_max called on a non-Hermitian matrix")
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[-1])


def is_unitary(u: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    u = as_cmatrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])), initial=0.0)
    return bool(err <= max(tol * u.shape[0], ABS_FLOOR))


def spectral_norm_batch(stack) -> np.ndarray:
    """Spectral norms of a stack of matrices with shape ``(..., r, c)``."""
    a = np.asarray(stack, dtype=np.complex128)
    r, c = a.shape[-2:]
    ah = np.conj(np.swapaxes(a, -1, -2))
    g = a @ ah if r <= c else ah @ a
    lam = np.linalg.eigvalsh(g)[..., -1]
    return np.sqrt(np.clip(lam, 0.0, None))


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
