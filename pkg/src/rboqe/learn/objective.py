"""Mean-square RB loss and its exact gradient by a reverse sweep.

For sequences ``l`` with observed outcomes ``f_l`` the loss is
``mean_l (f_l - f~_l)^2``: the sum over records divided by the record count
of the split, which equals ``n * |K|`` when every depth has ``n`` records.
"""

from __future__ import annotations

import numpy as np

from .._validation import SequenceBatch, check_outcomes, check_sequences
from ..clifford import clifford_unitaries
from ..oqe import P0, batch_forward
from .parametrization import UnitaryParams, pullback, to_unitary


def unitary_value_and_grad(u: np.ndarray, batch: SequenceBatch, y_sorted: np.ndarray, measurement=P0):
    """Loss and ``dL/dRe(U) + i dL/dIm(U)`` for targets given in batch order."""
    d = u.shape[0]
    chi = d // 2
    n = len(batch)
    finals, inputs = batch_forward(u, batch, store=True)
    amp = finals.reshape(n, 2, chi)
    m_amp = np.matmul(measurement, amp)
    pred = np.einsum("nai,nai->n", amp.conj(), m_amp).real
    resid = pred - y_sorted
    value = float(np.dot(resid, resid) / n)

    seed_adj = ((4.0 / n) * resid)[:, None] * m_amp.reshape(n, d)
    cliffs_dag = clifford_unitaries().conj().transpose(0, 2, 1)
    u_conj = u.conj()
    grad = np.zeros((d, d), dtype=complex)
    adj = np.zeros((0, d), dtype=complex)
    for j in range(batch.width - 1, -1, -1):
        m = batch.n_active[j]
        done = batch.n_active[j + 1]
        adj = np.concatenate([adj, seed_adj[done:m]])
        grad += adj.T @ inputs[j].conj()
        adj = adj @ u_conj
        g_dag = cliffs_dag[batch.gates[:m, j]]
        adj = np.matmul(g_dag, adj.reshape(m, 2, chi)).reshape(m, d)
    adj = np.concatenate([adj, seed_adj[batch.n_active[0]:]])
    grad[:, 0] += adj.sum(axis=0)
    return value, grad


class Objective:
    """Loss over fixed data as a function of mesh angles.

    Calling the object returns ``(loss, gradient)``; :meth:`value` skips the
    reverse sweep.
    """

    def __init__(self, X, y, dim: int, measurement=P0):
        self.batch = check_sequences(X)
        self.y = self.batch.sort(check_outcomes(y, len(self.batch)))
        self.dim = dim
        self.measurement = np.asarray(measurement, dtype=complex)
        self.n_calls = 0

    def __call__(self, angles):
        self.n_calls += 1
        u = to_unitary(angles, self.dim)
        value, grad_u = unitary_value_and_grad(u, self.batch, self.y, self.measurement)
        return value, pullback(angles, self.dim, grad_u)

    def value(self, angles) -> float:
        return unitary_loss(to_unitary(angles, self.dim), self.batch, self.y, self.measurement)


def unitary_loss(u, batch: SequenceBatch, y_sorted, measurement=P0) -> float:
    finals = batch_forward(u, batch)
    amp = finals.reshape(len(batch), 2, -1)
    pred = np.einsum("nai,ab,nbi->n", amp.conj(), measurement, amp).real
    resid = pred - y_sorted
    return float(np.dot(resid, resid) / len(batch))


def _split_xy(ds, split):
    X, y = ds.xy(split)
    if not X:
        raise ValueError(f"split {split!r} is empty")
    return X, y


def _angles(params, dim):
    if isinstance(params, UnitaryParams):
        return params.angles, params.dim
    angles = np.asarray(params, dtype=float)
    return angles, dim or int(round(np.sqrt(angles.size)))


def loss(params, ds, split: str | None = "train", dim: int | None = None) -> float:
    """Mean-square loss of the model encoded by ``params`` on one dataset split."""
    angles, dim = _angles(params, dim)
    X, y = _split_xy(ds, split)
    return Objective(X, y, dim).value(angles)


def loss_gradient(params, ds, split: str | None = "train", dim: int | None = None) -> np.ndarray:
    angles, dim = _angles(params, dim)
    X, y = _split_xy(ds, split)
    return Objective(X, y, dim)(angles)[1]
