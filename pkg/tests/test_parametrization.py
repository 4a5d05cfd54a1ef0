import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rboqe.learn.parametrization import UnitaryParams, from_unitary, n_params, pullback, to_unitary
from conftest import random_unitary


def test_zero_angles_give_identity():
    for dim in (1, 2, 5):
        np.testing.assert_allclose(to_unitary(np.zeros(n_params(dim)), dim), np.eye(dim), atol=1e-15)


def test_single_rotation_closed_form():
    u = to_unitary([np.pi / 2, 0.0, 0.0, 0.0], 2)
    np.testing.assert_allclose(u, [[0, -1], [1, 0]], atol=1e-15)


@given(st.integers(1, 12), st.integers(0, 2**31))
def test_always_unitary(dim, seed):
    angles = np.random.default_rng(seed).uniform(-20, 20, n_params(dim))
    u = to_unitary(angles, dim)
    assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) < 1e-12


@given(st.integers(1, 8), st.integers(0, 2**31))
def test_from_unitary_round_trip(dim, seed):
    u = random_unitary(dim, np.random.default_rng(seed))
    # reach a generic point, not just the image of the mesh
    q, _ = np.linalg.qr(np.random.default_rng(seed + 1).normal(size=(dim, dim)) + 1j * u)
    np.testing.assert_allclose(to_unitary(from_unitary(q), dim), q, atol=1e-11)


def test_wrong_length_rejected():
    with pytest.raises(ValueError):
        to_unitary(np.zeros(5), 2)
    with pytest.raises(ValueError):
        UnitaryParams(3, np.zeros(4))


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_pullback_matches_finite_differences(dim, rng):
    angles = rng.uniform(0, 2 * np.pi, n_params(dim))
    target = random_unitary(dim, rng)

    def f(a):
        return float(np.sum(np.abs(to_unitary(a, dim) - target) ** 2))

    grad_u = 2 * (to_unitary(angles, dim) - target)
    g = pullback(angles, dim, grad_u)
    h = 1e-6
    fd = np.array([(f(angles + h * e) - f(angles - h * e)) / (2 * h) for e in np.eye(angles.size)])
    np.testing.assert_allclose(g, fd, atol=1e-7)
