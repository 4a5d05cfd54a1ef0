import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rboqe import clifford as cl
from rboqe.oqe import OqeModel, predict
from rboqe.process_tensor import (
    build_ppt,
    build_pt,
    contract_with_sequence,
    dense_pt,
    export_tensors,
    reduce_pt,
    vectorize_pt,
)
from conftest import random_model, random_unitary

P1 = np.diag([0.0, 1.0])


def _gates(seq):
    us = cl.clifford_unitaries()
    return [us[g] for g in seq]


@given(st.integers(1, 4), st.integers(1, 10), st.integers(0, 2**31))
def test_three_contractions_agree(chi, k, seed):
    rng = np.random.default_rng(seed)
    model = random_model(chi, rng)
    seq = rng.integers(0, 24, k)
    f = predict(model, seq)
    assert abs(build_ppt(model, k).contract(_gates(seq)) - f) < 1e-12
    assert abs(contract_with_sequence(build_pt(model, k), _gates(seq)) - f) < 1e-12


@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 2**31))
def test_purified_norm_counts_input_legs(chi, k, seed):
    model = random_model(chi, np.random.default_rng(seed))
    assert build_ppt(model, k).norm_squared() == pytest.approx(2.0**k, rel=1e-10)
    assert build_pt(model, k).trace() == pytest.approx(2.0**k, rel=1e-10)


def test_bulk_sites_are_shared_and_bonded(rng):
    ppt = build_ppt(random_model(3, rng), 5)
    assert ppt.sites[1] is ppt.sites[4]
    assert ppt.to_mps().bond_dims == [3] * 6
    assert build_pt(ppt).bond_dims == [9, 9, 9, 9, 9, 1]
    with pytest.raises(ValueError):
        ppt.site[0, 0, 0, 0] = 1.0


def test_ppt_entropy_bounded_by_memory(rng):
    model = random_model(3, rng)
    ent = build_ppt(model, 8).to_mps().normalized().cut_entropies()
    assert np.all(ent <= np.log2(3) + 1e-10)


def test_outcomes_are_complete(rng):
    model = random_model(2, rng)
    gates = _gates(rng.integers(0, 24, 6))
    pt = build_pt(model, 6)
    assert pt.contract(gates) + pt.contract(gates, P1) == pytest.approx(1.0, abs=1e-12)


def test_superoperator_slots_match_unitaries(rng):
    model = random_model(2, rng)
    gates = _gates(rng.integers(0, 24, 4))
    supers = [np.kron(g, g.conj()) for g in gates]
    pt = build_pt(model, 4)
    assert pt.contract(supers) == pytest.approx(pt.contract(gates), abs=1e-13)
    # dephasing channel in slot 2 averages the two Z-conjugated branches
    z = np.diag([1.0, -1.0])
    deph = 0.5 * (np.eye(4) + np.kron(z, z))
    mixed = supers[:]
    mixed[2] = deph @ supers[2]
    zgates = gates[:]
    zgates[2] = z @ gates[2]
    expected = 0.5 * (pt.contract(gates) + pt.contract(zgates))
    assert build_ppt(model, 4).contract(mixed) == pytest.approx(expected, abs=1e-13)


def test_wrong_gate_count_rejected(rng):
    with pytest.raises(ValueError):
        build_pt(random_model(1, rng), 3).contract(_gates([0, 0]))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_mpdo_matches_dense_summation(k):
    rng = np.random.default_rng(k)
    for _ in range(5):
        model = random_model(int(rng.integers(1, 4)), rng)
        dense = dense_pt(model, k)
        mpdo = build_pt(model, k).to_dense()
        assert np.max(np.abs(mpdo - dense)) < 1e-12
        assert np.trace(dense).real == pytest.approx(2.0**k)
        assert np.max(np.abs(dense - dense.conj().T)) < 1e-13
        assert np.linalg.eigvalsh(dense).min() > -1e-12


def test_markovian_process_is_a_product_of_choi_states(rng):
    v = random_unitary(2, rng)
    model = OqeModel(v)
    rho0 = np.outer(v[:, 0], v[:, 0].conj())
    amp = v.T.ravel()  # index (i, o) carries <o|v|i>
    choi = np.outer(amp, amp.conj())
    expected = np.kron(np.kron(rho0, choi), choi)
    np.testing.assert_allclose(build_pt(model, 2).to_dense(), expected, atol=1e-13)


def test_dense_order_reads_outputs_and_inputs():
    # identity dynamics: o_0 = |0>, and every input is copied to the next output
    dense = build_pt(OqeModel(np.eye(2)), 1).to_dense()
    amp = np.zeros(8)
    amp[0b000] = amp[0b011] = 1.0  # (o0, i0, o1)
    np.testing.assert_allclose(dense, np.outer(amp, amp), atol=1e-15)


def test_reduce_rejects_unknown_fresh_rule(rng):
    with pytest.raises(ValueError):
        reduce_pt(build_pt(random_model(1, rng), 2), keep={("o", 1)}, fresh="maximally_mixed")


def test_vectorized_entropy_matches_dense_svd(rng):
    model = random_model(2, rng)
    pt = build_pt(model, 2)
    vec = vectorize_pt(pt)
    assert vec.norm() == pytest.approx(1.0)
    t = pt.to_dense().reshape([2] * 10)  # ket (o0 i0 o1 i1 o2), bra likewise
    for cut, left in ((0, [0]), (1, [0, 1, 2])):
        axes = [a for leg in left for a in (leg, leg + 5)]
        rest = [a for a in range(10) if a not in axes]
        mat = t.transpose(axes + rest).reshape(4 ** len(left), -1)
        s = np.linalg.svd(mat / np.linalg.norm(mat), compute_uv=False)
        p = s[s > 1e-12] ** 2
        assert vec.bipartite_entropy(cut) == pytest.approx(-np.sum(p * np.log2(p)), abs=1e-10)


def test_dense_limits():
    with pytest.raises(ValueError):
        dense_pt(OqeModel(np.eye(2)), 5)
    with pytest.raises(ValueError):
        build_pt(OqeModel(np.eye(2)), 5).to_dense()


def test_export_round_trips_through_json(rng):
    ppt = build_ppt(random_model(2, rng), 3)
    for obj, kind, n in ((ppt, "purified_process_tensor", 4), (build_pt(ppt), "process_tensor", 4)):
        blob = json.loads(json.dumps(export_tensors(obj)))
        assert blob["kind"] == kind and blob["k"] == 3
        assert len(blob["sites"]) == n
        first = blob["sites"][0]
        data = np.array([complex(*p) for p in first["data"]]).reshape(first["shape"])
        np.testing.assert_array_equal(data, np.asarray(obj.sites[0] if obj is ppt else obj.initial))
    with pytest.raises(TypeError):
        export_tensors(object())
