import math

import numpy as np
import pytest

import oracles
from opspace_lab.fermion import (MAX_GENERATORS, ResourceError, car_generators, fermi_mn_norm,
                                 fermi_operator)
from opspace_lab.matcore import DomainError, random_unitary
from opspace_lab.spaces import Kind, SpaceSpec, kappa

SIGMA = np.array([[0, 1], [0, 0]])
Z = np.diag([1, -1])


def test_single_generator():
    car = car_generators(1)
    assert np.array_equal(car.dense(0), SIGMA)


def test_two_generators():
    car = car_generators(2)
    assert np.array_equal(car.dense(0), np.kron(SIGMA, np.eye(2)))
    assert np.array_equal(car.dense(1), np.kron(Z, SIGMA))
    v = [car.dense(i) for i in range(2)]
    for i in range(2):
        for j in range(2):
            assert np.allclose(v[i] @ v[j] + v[j] @ v[i], 0)
            assert np.allclose(v[i] @ v[j].conj().T + v[j].conj().T @ v[i], (i == j) * np.eye(4))


@pytest.mark.parametrize("k", range(1, 11))
def test_car_relations(k):
    assert car_generators(k).check() <= 1e-12


def test_generators_agree_with_independent_construction():
    for k in (3, 5):
        ref = oracles.jordan_wigner(k)
        car = car_generators(k)
        for i in range(k):
            assert np.array_equal(car.dense(i), ref[i])


@pytest.mark.parametrize("k", [1, 4, 7])
def test_generator_norms_are_one(k):
    car = car_generators(k)
    for i in range(k):
        assert np.linalg.norm(car.dense(i), 2) == pytest.approx(1.0)


@pytest.mark.parametrize("k", [0, MAX_GENERATORS + 1])
def test_generator_range(k):
    with pytest.raises(DomainError):
        car_generators(k)


def test_norm_examples():
    assert fermi_mn_norm(np.eye(3)[None]) == pytest.approx(1.0)
    assert fermi_mn_norm(np.ones((1, 1, 1))) == pytest.approx(1.0)
    k2 = kappa(SpaceSpec(Kind.FERMIONIC, 2), 2)
    assert math.sqrt(2) * 0.4 <= k2.upper <= math.sqrt(2) + 1e-12
    # recorded oracle value: the first-column matrix has norm exactly sqrt(2)
    assert k2.upper == pytest.approx(math.sqrt(2), abs=1e-12)
    assert fermi_mn_norm(np.zeros((2, 2, 2))) == 0.0


def test_representation_invariance(rng):
    k = 3
    c = rng.standard_normal((k, 2, 2)) + 1j * rng.standard_normal((k, 2, 2))
    u = random_unitary(2 ** k, rng)
    gens = [u @ g @ u.conj().T for g in oracles.jordan_wigner(k)]
    assert fermi_mn_norm(c, gens) == pytest.approx(fermi_mn_norm(c), rel=1e-9)


@pytest.mark.parametrize("k,n", [(7, 5), (9, 2), (6, 12)])
def test_sparse_path_matches_dense(k, n, rng):
    c = rng.standard_normal((k, n, n)) + 1j * rng.standard_normal((k, n, n))
    ref = np.linalg.norm(fermi_operator(c), 2)
    assert fermi_mn_norm(c) == pytest.approx(ref, rel=1e-9)


def test_resource_limit():
    with pytest.raises(ResourceError):
        fermi_mn_norm(np.zeros((12, 3, 3)))
    with pytest.raises(DomainError):
        fermi_operator(np.zeros((2, 2, 3)))


def test_kappa_band():
    prev = math.inf
    for n in range(1, 8):
        ratio = kappa(SpaceSpec(Kind.FERMIONIC, n), n).upper / math.sqrt(n)
        assert 0.4 <= ratio <= 1 + 1e-12
        assert ratio <= prev + 1e-12
        prev = ratio
