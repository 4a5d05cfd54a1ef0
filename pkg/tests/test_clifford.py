import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rboqe import clifford as cl


def test_group_has_24_distinct_elements():
    group = cl.clifford_group()
    assert len(group) == 24
    for a, b in itertools.combinations(group, 2):
        assert not cl.equal_up_to_phase(a.unitary, b.unitary)


def test_identity_is_index_zero():
    np.testing.assert_allclose(cl.clifford_group()[0].unitary, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("gate", cl.clifford_group(), ids=lambda g: str(g.index))
def test_gate_is_unitary_and_matches_natives(gate):
    u = gate.unitary
    assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12
    assert 1 <= len(gate.natives) <= 3
    prod = np.eye(2, dtype=complex)
    for name in gate.natives:
        prod = cl.native_gate(name).unitary @ prod
    assert cl.phase_distance(prod, u) < 1e-12


@pytest.mark.parametrize(
    "name, axis, angle",
    [("+X/2", "X", np.pi / 2), ("-Y/2", "Y", -np.pi / 2), ("+X", "X", np.pi), ("-Y", "Y", -np.pi)],
)
def test_native_gate_is_axis_rotation(name, axis, angle):
    sigma = {"X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]])}[axis]
    expected = np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * sigma
    gate = cl.native_gate(name)
    np.testing.assert_allclose(gate.unitary, expected, atol=1e-14)
    assert gate.duration == 20.0


def test_native_gate_rejects_unknown_label():
    with pytest.raises(ValueError):
        cl.native_gate("+Z/2")


def test_compose_table_closure_against_brute_force():
    us = cl.clifford_unitaries()
    table = cl.compose_table()
    for a in range(24):
        for b in range(24):
            matches = [c for c in range(24) if cl.equal_up_to_phase(us[a] @ us[b], us[c])]
            assert matches == [table[a, b]]


def test_compose_identity_and_involution():
    x = cl.find_index(cl.native_gate("+X").unitary)
    for g in range(24):
        assert cl.compose(0, g) == g
        assert cl.compose(g, 0) == g
    assert cl.compose(x, x) == 0


def test_unique_inverse():
    for a in range(24):
        assert [b for b in range(24) if cl.compose(a, b) == 0] == [cl.inverse(a)]


def test_undo_gate_examples():
    x = cl.find_index(cl.native_gate("+X").unitary)
    half = cl.find_index(cl.native_gate("+X/2").unitary)
    assert cl.undo_gate([x]) == x
    assert cl.undo_gate([half, half]) == cl.find_index(cl.native_gate("-X").unitary) == x


@given(st.lists(st.integers(0, 23), min_size=1, max_size=12))
def test_undo_gate_restores_identity(prefix):
    assert cl.compose(cl.undo_gate(prefix), cl.net_gate(prefix)) == 0
    us = cl.clifford_unitaries()
    total = np.eye(2, dtype=complex)
    for g in list(prefix) + [cl.undo_gate(prefix)]:
        total = us[g] @ total
    assert cl.equal_up_to_phase(total, np.eye(2))


@settings(max_examples=50)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_sample_rb_sequence_is_rb(k, seed):
    seq = cl.sample_rb_sequence(k, np.random.default_rng(seed))
    assert len(seq) == k
    assert cl.is_rb_sequence(seq)
    assert seq == cl.sample_rb_sequence(k, np.random.default_rng(seed))


def test_k2_sequence_is_gate_and_inverse():
    seq = cl.sample_rb_sequence(2, np.random.default_rng(5))
    assert seq[1] == cl.inverse(seq[0])


def test_sample_rb_sequence_rejects_short_depth():
    with pytest.raises(ValueError):
        cl.sample_rb_sequence(1, np.random.default_rng(0))


def test_first_slot_is_uniform():
    rng = np.random.default_rng(2024)
    n = 10_000
    counts = np.bincount([cl.sample_rb_sequence(5, rng)[0] for _ in range(n)], minlength=24)
    p = 1 / 24
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) < 3 * sigma + 1)


def test_phase_insensitive_equality():
    u = cl.clifford_unitaries()[7]
    assert cl.equal_up_to_phase(u, np.exp(0.3j) * u)
    assert not cl.equal_up_to_phase(u, u + 1e-6)
