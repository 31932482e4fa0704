import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opspace_lab.matcore import (DomainError, as_cmatrix, herm_eig_max, is_hermitian, is_unitary,
                                 kron, random_unitary, smallest_singular, spectral_norm,
                                 spectral_norm_batch)
from strategies import cmatrices


@given(cmatrices())
def test_spectral_norm_matches_svd(m):
    ref = np.linalg.svd(m, compute_uv=False)[0]
    assert spectral_norm(m) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_spectral_norm_examples():
    assert spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    assert spectral_norm(np.zeros((3, 2))) == 0.0
    assert spectral_norm(np.ones((4, 4))) == pytest.approx(4.0)
    # tiny and huge entries survive the Gram route thanks to rescaling
    assert spectral_norm(1e-200 * np.eye(2)) == pytest.approx(1e-200)
    assert spectral_norm(1e200 * np.eye(2)) == pytest.approx(1e200)


def test_invalid_inputs():
    with pytest.raises(DomainError):
        spectral_norm(np.zeros((0, 0)))
    with pytest.raises(DomainError):
        as_cmatrix(np.ones(3))
    with pytest.raises(DomainError):
        as_cmatrix([[np.nan]])


@given(cmatrices(rows=st.integers(3, 6), cols=st.integers(1, 3)))
def test_smallest_singular_matches_svd(m):
    ref = np.linalg.svd(m, compute_uv=False)[-1]
    assert smallest_singular(m) == pytest.approx(ref, abs=1e-9 * max(1.0, np.abs(m).max()))


def test_smallest_singular_needs_tall():
    with pytest.raises(DomainError):
        smallest_singular(np.ones((2, 3)))
    assert smallest_singular(np.array([[1.0, 1.0], [0.0, 1e-8]])) > 0


def test_hermitian_helpers(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = a + a.conj().T
    assert is_hermitian(h) and not is_hermitian(a)
    assert herm_eig_max(h) == pytest.approx(np.linalg.eigvalsh(h)[-1])
    with pytest.raises(DomainError):
        herm_eig_max(a)


def test_kron_and_unitary(rng):
    u = random_unitary(5, rng)
    assert is_unitary(u)
    assert not is_unitary(2 * u)
    a, b = rng.standard_normal((2, 3)), rng.standard_normal((3, 2))
    assert np.allclose(kron(a, b), np.kron(a, b))
    assert spectral_norm(kron(a, b)) == pytest.approx(spectral_norm(a) * spectral_norm(b))


def test_batch_agrees_with_single(rng):
    stack = rng.standard_normal((7, 3, 5)) + 1j * rng.standard_normal((7, 3, 5))
    ref = [np.linalg.svd(s, compute_uv=False)[0] for s in stack]
    assert np.allclose(spectral_norm_batch(stack), ref, rtol=1e-10)
