import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rboqe import clifford as cl
from rboqe.dataset import split_dataset
from rboqe.oqe import OqeModel, evolve
from rboqe.simulator import (
    Decoherence,
    TwoQubitModel,
    final_states,
    gamma_eff,
    generate_dataset,
    hamiltonian,
    run_sequence,
    run_sequences,
    step_unitary,
)

J_DEVICE = 11.30


def test_gamma_eff_values():
    assert gamma_eff(J_DEVICE, 500.0) == pytest.approx(0.51076, abs=1e-12)
    assert gamma_eff(J_DEVICE, 2 * J_DEVICE) == pytest.approx(J_DEVICE)
    assert gamma_eff(J_DEVICE, 1e12) < 1e-9


def test_gamma_eff_rejects_resonance():
    with pytest.raises(ZeroDivisionError):
        gamma_eff(J_DEVICE, 0.0)


def test_hamiltonian_decoupled_is_diagonal():
    h = hamiltonian(TwoQubitModel(J=0.0, h_S=3.0, h_E=-1.5))
    np.testing.assert_allclose(h, np.diag(np.diag(h)))
    np.testing.assert_allclose(np.diag(h).real, [1.5, 4.5, -4.5, -1.5])


def test_hamiltonian_one_excitation_block():
    m = TwoQubitModel.from_detuning(J_DEVICE, 7.0)
    h = hamiltonian(m)
    assert np.max(np.abs(h - h.conj().T)) < 1e-14
    block = h[np.ix_([1, 2], [1, 2])]
    expected = np.sqrt(m.delta_h**2 + J_DEVICE**2)
    np.testing.assert_allclose(np.linalg.eigvalsh(block), [-expected, expected], atol=1e-12)
    assert h[1, 2] == pytest.approx(J_DEVICE)


def test_step_unitary_basics():
    m = TwoQubitModel.from_detuning(J_DEVICE, 30.0)
    np.testing.assert_allclose(step_unitary(m, 0.0), np.eye(4), atol=1e-15)
    u = step_unitary(m, 37.0)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12
    np.testing.assert_allclose(step_unitary(m, 12.0) @ step_unitary(m, 25.0), u, atol=1e-10)
    with pytest.raises(ValueError):
        step_unitary(m, -1.0)


def test_full_swap_at_resonance():
    # 2 pi J t 1e-3 = pi / 2
    t_swap = 1e3 / (4 * J_DEVICE)
    u = step_unitary(TwoQubitModel(J=J_DEVICE), t_swap)
    assert abs(u[1, 2]) == pytest.approx(1.0, abs=1e-12)


def _dense_oracle(model, seq):
    # eigendecomposition propagator built from explicit basis operators
    sz = np.diag([1.0, -1.0])
    sp = np.array([[0.0, 1.0], [0.0, 0.0]])
    eye = np.eye(2)
    # frame rotating at the system frequency leaves only the detuning on E
    h = model.J * (np.kron(sp, sp.T) + np.kron(sp.T, sp)) + (model.h_E - model.h_S) * np.kron(eye, sz)
    w, v = np.linalg.eigh(h)
    t = 3 * model.gate_time_unit + model.segment_time
    idle = v @ np.diag(np.exp(-2j * np.pi * w * t * 1e-3)) @ v.conj().T
    psi = np.array([1, 0, 0, 0], dtype=complex)
    for g in seq:
        psi = idle @ np.kron(cl.clifford_unitaries()[g], eye) @ psi
    return float(np.real(psi[0] * psi[0].conj() + psi[1] * psi[1].conj()))


@pytest.mark.parametrize("seq", [[3, cl.inverse(3)], [11, cl.inverse(11)], [0, 0]])
def test_k2_fixed_duration_matches_dense_oracle(seq):
    m = TwoQubitModel.from_detuning(J_DEVICE, 20.0, fixed_duration=True)
    assert run_sequence(m, seq) == pytest.approx(_dense_oracle(m, seq), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 15), st.integers(0, 10_000), st.floats(5.0, 200.0))
def test_fixed_duration_matches_dense_oracle(k, seed, dh):
    m = TwoQubitModel.from_detuning(J_DEVICE, dh, fixed_duration=True)
    seq = cl.sample_rb_sequence(k, np.random.default_rng(seed))
    assert run_sequence(m, seq) == pytest.approx(_dense_oracle(m, seq), abs=1e-10)


@pytest.mark.parametrize("fixed", [True, False])
def test_decoupled_rb_is_perfect(fixed):
    m = TwoQubitModel(J=0.0, h_S=4.0, h_E=-9.0, fixed_duration=fixed)
    rng = np.random.default_rng(1)
    seqs = [cl.sample_rb_sequence(k, rng) for k in (2, 5, 17, 40)]
    np.testing.assert_allclose(run_sequences(m, seqs), 1.0, atol=1e-12)


def test_pure_states_stay_normalized():
    m = TwoQubitModel.from_detuning(J_DEVICE, 15.0)
    rng = np.random.default_rng(3)
    psi = final_states(m, [cl.sample_rb_sequence(30, rng) for _ in range(5)])
    np.testing.assert_allclose(np.linalg.norm(psi, axis=1), 1.0, atol=1e-12)


def test_fixed_duration_simulator_is_an_oqe_model():
    m = TwoQubitModel.from_detuning(J_DEVICE, 50.0, fixed_duration=True)
    oqe = OqeModel(step_unitary(m, m.fixed_step_time))
    rng = np.random.default_rng(9)
    for k in (2, 7, 25):
        seq = cl.sample_rb_sequence(k, rng)
        sim = final_states(m, [seq])[0]
        psi = evolve(oqe, seq)
        # equal up to the global phase picked up by the stationary initial state
        assert abs(abs(np.vdot(sim, psi)) - 1.0) < 1e-10


def test_decoherence_validation():
    with pytest.raises(ValueError):
        Decoherence(T1_S=10.0, T2_S=25.0, T1_E=10.0, T2_E=5.0)


def test_decoherence_reduces_survival():
    deco = Decoherence(T1_S=5.0, T2_S=4.0, T1_E=5.0, T2_E=4.0)
    m0 = TwoQubitModel(J=0.0)
    m1 = TwoQubitModel(J=0.0, decoherence=deco)
    seq = cl.sample_rb_sequence(30, np.random.default_rng(0))
    assert run_sequence(m0, seq) == pytest.approx(1.0)
    f = run_sequence(m1, seq)
    assert 0.5 < f < 1.0


def test_model_round_trip():
    m = TwoQubitModel.from_detuning(J_DEVICE, 12.0, decoherence=Decoherence(20.0, 30.0, 15.0, 10.0))
    assert TwoQubitModel.from_dict(m.to_dict()) == m


def test_generate_dataset_sizes_and_metadata():
    m = TwoQubitModel.from_detuning(J_DEVICE, 50.0)
    ds = generate_dataset(m, range(2, 41), 200, seed=0)
    assert len(ds) == 39 * 200
    assert ds.metadata["n"] == 200
    assert ds.metadata["k_values"] == list(range(2, 41))
    assert all(cl.is_rb_sequence(s) for s in ds.sequences[:: 97])


def test_noiseless_dataset_equals_run_sequence():
    m = TwoQubitModel.from_detuning(J_DEVICE, 25.0)
    ds = generate_dataset(m, [3, 9], 4, seed=7)
    for seq, f in zip(ds.sequences, ds.f):
        assert f == run_sequence(m, seq)


def test_generation_is_batch_independent():
    m = TwoQubitModel.from_detuning(J_DEVICE, 25.0)
    both = generate_dataset(m, [3, 9], 5, seed=[4, 2])
    only9 = generate_dataset(m, [9], 5, seed=[4, 2])
    assert both.sequences[5:] == only9.sequences
    np.testing.assert_array_equal(both.f[5:], only9.f)


def test_shot_noise_is_reproducible_and_unbiased():
    m = TwoQubitModel.from_detuning(J_DEVICE, 25.0)
    a = generate_dataset(m, [10], 300, shots=1000, seed=3)
    b = generate_dataset(m, [10], 300, shots=1000, seed=3)
    np.testing.assert_array_equal(a.f, b.f)
    exact = run_sequences(m, a.sequences)
    sigma = np.sqrt(np.sum(exact * (1 - exact)) / 1000) / len(exact)
    assert abs(a.f.mean() - exact.mean()) < 3 * sigma + 1e-12


@pytest.mark.parametrize("bad", [dict(k_values=[1, 2], n=1), dict(k_values=[2], n=0), dict(k_values=[2], n=1, shots=0)])
def test_generate_dataset_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        generate_dataset(TwoQubitModel(J=1.0), **bad)


def test_weak_coupling_curve_decays():
    m = TwoQubitModel.from_detuning(J_DEVICE, 50 * J_DEVICE)
    ds = generate_dataset(m, range(2, 41, 6), 200, seed=0)
    means = [ds.f[ds.k == k].mean() for k in ds.depths()]
    assert np.all(np.diff(means) < 5e-3)


def test_split_counts():
    m = TwoQubitModel.from_detuning(J_DEVICE, 50.0)
    ds = split_dataset(generate_dataset(m, [2, 3], 200, seed=0), 0.6, seed=1)
    for k in (2, 3):
        assert np.sum((ds.k == k) & (ds.split == "train")) == 120
        assert np.sum((ds.k == k) & (ds.split == "val")) == 80
