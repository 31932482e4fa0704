"""Independent reference constructions used by the tests.

Every oracle realizes a space concretely as operators and takes a plain
numpy spectral norm, rather than reusing the library's closed forms.
"""
import numpy as np


def unit(i, j, size):
    e = np.zeros((size, size), dtype=complex)
    e[i, j] = 1
    return e


def op_norm(m):
    return float(np.linalg.norm(m, 2))


def row_realized(c):
    k = c.shape[0]
    return op_norm(sum(np.kron(a, unit(0, s, k)) for s, a in enumerate(c)))


def column_realized(c):
    k = c.shape[0]
    return op_norm(sum(np.kron(a, unit(s, 0, k)) for s, a in enumerate(c)))


def rcapc_realized(c):
    k = c.shape[0]
    blocks = [np.block([[unit(0, s, k), np.zeros((k, k))], [np.zeros((k, k)), unit(s, 0, k)]])
              for s in range(k)]
    return op_norm(sum(np.kron(a, b) for a, b in zip(c, blocks)))


def oh_kron(c):
    return float(np.sqrt(op_norm(sum(np.kron(a, a.conj()) for a in c))))


def jordan_wigner(k):
    sig = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1, -1]).astype(complex)
    gens = []
    for i in range(k):
        facs = [z] * i + [sig] + [np.eye(2)] * (k - i - 1)
        v = facs[0]
        for f in facs[1:]:
            v = np.kron(v, f)
        gens.append(v)
    return gens


def fermi_realized(c):
    return op_norm(sum(np.kron(a, v) for a, v in zip(c, jordan_wigner(c.shape[0]))))


def min_sampled(c, rng, samples=4000):
    """sup over unit xi in C^k of ||sum xi_s A_s||, estimated by sampling."""
    k = c.shape[0]
    xi = rng.standard_normal((samples, k)) + 1j * rng.standard_normal((samples, k))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    mats = np.einsum("ps,sij->pij", xi, c)
    return float(np.linalg.norm(mats, 2, axis=(1, 2)).max())
