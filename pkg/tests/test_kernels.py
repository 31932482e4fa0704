import os
import subprocess
import sys

import numpy as np
import pytest

from opspace_lab import _kernels
from opspace_lab._kernels import _pykernels

try:
    from opspace_lab._kernels import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])


def _naive_poly(x, coeffs):
    out = np.zeros_like(x)
    for m, c in enumerate(coeffs):
        out = out + c * np.stack([np.linalg.matrix_power(b, m) for b in x])
    return out


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_backends_match_einsum(mod, d, rng):
    a = rng.standard_normal((9, d, d)) + 1j * rng.standard_normal((9, d, d))
    b = rng.standard_normal((9, d, d)) + 1j * rng.standard_normal((9, d, d))
    assert np.allclose(mod.block_matmul(a, b), np.einsum("pij,pjk->pik", a, b), atol=1e-12)
    coeffs = np.array([0.5, -1, 2j, 0.25])
    assert np.allclose(mod.block_poly(a, coeffs), _naive_poly(a, coeffs), atol=1e-10)


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_poly_edge_cases(mod, rng):
    a = rng.standard_normal((3, 2, 2)).astype(complex)
    assert np.allclose(mod.block_poly(a, np.array([], dtype=complex)), 0)
    assert np.allclose(mod.block_poly(a, np.array([2.0 + 0j])), 2 * np.eye(2))


def test_wrapper_handles_leading_axes(rng):
    x = rng.standard_normal((2, 3, 4, 2, 2)) + 0j
    out = _kernels.block_poly(x, np.array([0, 0, 1.0]))
    assert out.shape == x.shape
    assert np.allclose(out, x @ x)
    assert np.allclose(_kernels.block_matmul(x, x), x @ x)


def test_backend_selection_env():
    assert _kernels.BACKEND in {"cython", "python"}
    env = dict(os.environ, OPSPACE_LAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import opspace_lab._kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
