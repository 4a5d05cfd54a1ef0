"""Input checks shared by the estimators and the process-tensor code."""

from __future__ import annotations

import numpy as np

from .clifford import N_CLIFFORD


class SequenceBatch:
    """Ragged Clifford-index sequences packed for step-synchronous evaluation.

    Rows are sorted by decreasing length so that the sequences still running
    at step ``j`` are always the leading ``n_active[j]`` rows.
    """

    def __init__(self, sequences):
        seqs = [np.asarray(s, dtype=np.int64).ravel() for s in sequences]
        if not seqs:
            raise ValueError("at least one sequence is required")
        lengths = np.array([len(s) for s in seqs], dtype=np.int64)
        order = np.argsort(-lengths, kind="stable")
        self.order = order
        self.lengths = lengths[order]
        self.width = int(self.lengths[0])
        self.gates = np.zeros((len(seqs), self.width), dtype=np.int64)
        for row, src in enumerate(order):
            self.gates[row, : lengths[src]] = seqs[src]
        if np.any(self.gates < 0) or np.any(self.gates >= N_CLIFFORD):
            raise ValueError(f"gate indices must lie in [0, {N_CLIFFORD})")
        # n_active[j]: rows with length > j, j = 0..width
        self.n_active = np.array([np.sum(self.lengths > j) for j in range(self.width + 1)])

    def __len__(self):
        return len(self.lengths)

    def unsort(self, values: np.ndarray) -> np.ndarray:
        out = np.empty_like(values)
        out[self.order] = values
        return out

    def sort(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values)[self.order]


def check_sequences(X) -> SequenceBatch:
    if isinstance(X, SequenceBatch):
        return X
    if isinstance(X, np.ndarray) and X.ndim == 2:
        X = list(X)
    try:
        return SequenceBatch(list(X))
    except TypeError as exc:
        raise TypeError("X must be a sequence of Clifford-index sequences") from exc


def check_outcomes(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.shape != (n,):
        raise ValueError(f"expected {n} outcomes, got {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError("outcomes must be finite")
    return y


def check_unitary(u, atol: float = 1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > atol:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {err:.2e})")
    return u


def check_measurement(m, atol: float = 1e-10) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("measurement operator must be 2x2")
    if np.max(np.abs(m - m.conj().T)) > atol:
        raise ValueError("measurement operator must be Hermitian")
    ev = np.linalg.eigvalsh(m)
    if ev[0] < -atol or ev[-1] > 1 + atol:
        raise ValueError("measurement operator must satisfy 0 <= M <= I")
    return m
