"""Open-quantum-evolution (OQE) model: a system qubit plus a chi-level memory.

Joint vectors use the system-major index ``s * chi + m``. Starting from
``|0_S, 0_M>``, a ``k``-gate sequence produces::

    psi_k = U (G_k x I) U ... U (G_1 x I) U psi_0

so ``k`` gates use ``k + 1`` applications of ``U``. The predicted outcome is
``<psi_k| M x I |psi_k>``.
"""

from __future__ import annotations

import numpy as np

from ._io import complex_to_pairs, pairs_to_complex
from ._validation import SequenceBatch, check_measurement, check_sequences, check_unitary
from .clifford import clifford_unitaries

P0 = np.diag([1.0, 0.0]).astype(complex)


class OqeModel:
    """Time-independent system-memory unitary with fixed initial state and POVM element.

    Parameters
    ----------
    unitary : array, shape (2 chi, 2 chi)
        The system-memory step unitary.
    measurement : array, shape (2, 2), optional
        Measured POVM element on the system. Defaults to ``|0><0|``.
    """

    def __init__(self, unitary, measurement=None, atol: float = 1e-10):
        u = check_unitary(unitary, atol=atol)
        if u.shape[0] % 2:
            raise ValueError("unitary dimension must be 2 * chi")
        self.unitary = u
        self.measurement = P0.copy() if measurement is None else check_measurement(measurement)

    @property
    def chi(self) -> int:
        return self.unitary.shape[0] // 2

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def __repr__(self):
        return f"OqeModel(chi={self.chi})"

    def initial_state(self) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[0] = 1.0
        return psi

    def evolve(self, seq) -> np.ndarray:
        return evolve(self, seq)

    def predict(self, seq) -> float:
        return predict(self, seq)

    def predict_many(self, sequences) -> np.ndarray:
        batch = check_sequences(sequences)
        return batch.unsort(batch_predict(self.unitary, batch, self.measurement))

    def predict_average(self, sequences) -> float:
        return predict_average(self, sequences)

    # --- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "chi": self.chi,
            "U": complex_to_pairs(self.unitary),
            "measurement": complex_to_pairs(self.measurement),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OqeModel":
        u = pairs_to_complex(data["U"])
        chi = int(data.get("chi", u.shape[0] // 2))
        if u.shape != (2 * chi, 2 * chi):
            raise ValueError(f"U has shape {u.shape}, expected {(2 * chi, 2 * chi)} for chi={chi}")
        m = data.get("measurement")
        return cls(u, None if m is None else pairs_to_complex(m))


def _gate_matrices(seq) -> np.ndarray:
    arr = np.asarray(seq)
    if arr.ndim == 3 and arr.shape[1:] == (2, 2):
        return arr.astype(complex)
    idx = np.asarray(seq, dtype=np.int64).ravel()
    return clifford_unitaries()[idx]


def evolve(model: OqeModel, seq) -> np.ndarray:
    """Final joint state for a sequence of Clifford indices or 2x2 unitaries."""
    gates = _gate_matrices(seq)
    u = model.unitary
    chi = model.chi
    psi = u @ model.initial_state()
    for g in gates:
        if g.shape != (2, 2):
            raise ValueError(f"gate has shape {g.shape}, expected (2, 2)")
        psi = u @ (g @ psi.reshape(2, chi)).ravel()
    return psi


def expectation(psi: np.ndarray, measurement: np.ndarray) -> float:
    amp = psi.reshape(2, -1)
    return float(np.real(np.vdot(amp, measurement @ amp)))


def predict(model: OqeModel, seq) -> float:
    return expectation(evolve(model, seq), model.measurement)


def predict_average(model: OqeModel, sequences) -> float:
    sequences = list(sequences)
    if not sequences:
        raise ValueError("need at least one sequence to average")
    return float(np.mean(model.predict_many(sequences)))


# --- batched engine --------------------------------------------------------


def batch_forward(u: np.ndarray, batch: SequenceBatch, store: bool = False):
    """Final states of all rows of ``batch`` (in batch order).

    With ``store=True`` also return the list of pre-``U`` states
    ``(G_j x I) phi_{j-1}`` for every step, as needed by the reverse sweep.
    """
    cliffs = clifford_unitaries()
    d = u.shape[0]
    chi = d // 2
    n = len(batch)
    finals = np.empty((n, d), dtype=complex)
    phi = np.broadcast_to(u[:, 0], (n, d)).copy()
    finals[batch.n_active[0]:] = phi[batch.n_active[0]:]
    inputs = []
    ut = u.T
    for j in range(batch.width):
        m = batch.n_active[j]
        phi = phi[:m]
        g = cliffs[batch.gates[:m, j]]
        x = np.matmul(g, phi.reshape(m, 2, chi)).reshape(m, d)
        if store:
            inputs.append(x)
        phi = x @ ut
        done = batch.n_active[j + 1]
        finals[done:m] = phi[done:]
    if store:
        return finals, inputs
    return finals


def batch_predict(u: np.ndarray, batch: SequenceBatch, measurement: np.ndarray = P0) -> np.ndarray:
    finals = batch_forward(u, batch)
    amp = finals.reshape(len(batch), 2, -1)
    return np.einsum("nai,ab,nbi->n", amp.conj(), measurement, amp).real
