"""CAR generators (Jordan-Wigner) and norms in the Fermionic operator space."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .matcore import DomainError, spectral_norm

MAX_GENERATORS = 12
MAX_SIDE = 8192
DENSE_SIDE = 512  # above this, norms use a sparse Lanczos eigensolve

_SIGMA = sparse.csr_matrix(np.array([[0, 1], [0, 0]], dtype=np.complex128))
_Z = sparse.csr_matrix(np.diag([1.0, -1.0]).astype(np.complex128))
_I2 = sparse.identity(2, dtype=np.complex128, format="csr")


class ResourceError(RuntimeError):
    """Requested dense matrix would be too large."""


@dataclass(frozen=True)
class CarSystem:
    """k generators on C^(2^k), stored sparse (one nonzero per column)."""

    k: int
    generators: tuple

    def dense(self, i: int) -> np.ndarray:
        return self.generators[i].toarray()

    def check(self) -> float:
        """Largest violation of the anticommutation relations."""
        eye = sparse.identity(2 ** self.k, dtype=np.complex128, format="csr")
        worst = 0.0
        gens = self.generators
        for i, vi in enumerate(gens):
            for j, vj in enumerate(gens[i:], start=i):
                vjh = vj.conj().T
                anti = vi @ vj + vj @ vi
                mixed = vi @ vjh + vjh @ vi
                if i == j:
                    mixed = mixed - eye
                for m in (anti, mixed):
                    if m.nnz:
                        worst = max(worst, float(np.max(np.abs(m.data))))
        return worst


@lru_cache(maxsize=None)
def _jw(k: int) -> tuple:
    gens = []
    for i in range(k):
        v = sparse.identity(1, dtype=np.complex128, format="csr")
        for j in range(k):
            v = sparse.kron(v, _Z if j < i else _SIGMA if j == i else _I2, format="csr")
        gens.append(v)
    return tuple(gens)


def car_generators(k: int) -> CarSystem:
    """v_i = Z^{(i-1)} (x) sigma (x) I^{(k-i)} with sigma = [[0,1],[0,0]]."""
    if not 1 <= k <= MAX_GENERATORS:
        raise DomainError(f"generator count must be in [1, {MAX_GENERATORS}], got {k}")
    return CarSystem(k, _jw(k))


def _assemble(coeffs, generators):
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 3 or c.shape[1] != c.shape[2]:
        raise DomainError(f"coefficients must have shape (k, n, n), got {c.shape}")
    k, n, _ = c.shape
    if k > MAX_GENERATORS:
        raise DomainError(f"at most {MAX_GENERATORS} generators supported, got {k}")
    if n * 2 ** k > MAX_SIDE:
        raise ResourceError(f"n * 2^k = {n * 2 ** k} exceeds {MAX_SIDE}")
    gens = car_generators(k).generators if generators is None else generators
    out = sparse.csr_matrix((n * 2 ** k, n * 2 ** k), dtype=np.complex128)
    for a, v in zip(c, gens):
        if a.any():
            out = out + sparse.kron(sparse.csr_matrix(a), sparse.csr_matrix(v), format="csr")
    return out


def fermi_operator(coeffs, generators=None) -> np.ndarray:
    """Assemble sum_s A_s (x) v_s as a dense (n 2^k) x (n 2^k) matrix."""
    return _assemble(coeffs, generators).toarray()


def fermi_mn_norm(coeffs, generators=None) -> float:
    """Norm of sum_s A_s (x) v_s in M_n(Phi_k)."""
    op = _assemble(coeffs, generators)
    if op.nnz == 0:
        return 0.0
    if op.shape[0] <= DENSE_SIDE:
        return spectral_norm(op.toarray())
    scale = float(np.max(np.abs(op.data)))
    op = op / scale
    gram = (op.conj().T @ op).tocsr()
    lam = eigsh(gram, k=1, which="LA", tol=0, v0=np.ones(gram.shape[0]),
                return_eigenvectors=False)[0]
    return scale * float(np.sqrt(max(lam, 0.0)))
