"""Triangular Givens-mesh chart of the unitary group.

A ``d x d`` unitary is written as ``D @ T_L @ ... @ T_1`` with
``L = d (d - 1) / 2`` nearest-neighbour two-level rotations and a diagonal
phase layer ``D``. Each rotation acts on modes ``(c, c + 1)`` as::

    [[exp(i phi) cos(theta), -sin(theta)],
     [exp(i phi) sin(theta),  cos(theta)]]

The angle vector is ``[theta_1, phi_1, ..., theta_L, phi_L, delta_0, ...,
delta_{d-1}]``, ``d**2`` reals in total. Rotations are ordered so that
:func:`from_unitary` can recover angles for any unitary by column nulling,
which makes the chart surjective.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def mesh_modes(dim: int) -> tuple[int, ...]:
    """Lower mode ``c`` of every rotation, in application order."""
    return tuple(c for r in range(dim - 1, 0, -1) for c in range(r))


def n_params(dim: int) -> int:
    return dim * dim


def _block(theta: float, phi: float) -> np.ndarray:
    e = np.exp(1j * phi)
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[e * c, -s], [e * s, c]])


def _split(angles: np.ndarray, dim: int):
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n_params(dim),):
        raise ValueError(f"expected {n_params(dim)} angles for dim={dim}, got shape {angles.shape}")
    n_rot = dim * (dim - 1) // 2
    return angles[: 2 * n_rot : 2], angles[1 : 2 * n_rot : 2], angles[2 * n_rot :]


@dataclass(frozen=True)
class UnitaryParams:
    dim: int
    angles: np.ndarray

    def __post_init__(self):
        _split(self.angles, self.dim)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "UnitaryParams":
        return cls(dim, rng.uniform(0.0, 2 * np.pi, size=n_params(dim)))

    def to_unitary(self) -> np.ndarray:
        return to_unitary(self.angles, self.dim)


def to_unitary(angles, dim: int | None = None) -> np.ndarray:
    if isinstance(angles, UnitaryParams):
        angles, dim = angles.angles, angles.dim
    if dim is None:
        dim = int(round(np.sqrt(len(angles))))
    thetas, phis, deltas = _split(angles, dim)
    p = np.eye(dim, dtype=complex)
    for c, th, ph in zip(mesh_modes(dim), thetas, phis):
        p[c : c + 2] = _block(th, ph) @ p[c : c + 2]
    return np.exp(1j * deltas)[:, None] * p


def from_unitary(u: np.ndarray) -> np.ndarray:
    """Angles reproducing ``u`` exactly (thetas in ``[0, pi/2]``)."""
    w = np.array(u, dtype=complex)
    dim = w.shape[0]
    thetas, phis = [], []
    for r in range(dim - 1, 0, -1):
        for c in range(r):
            a, b = w[r, c], w[r, c + 1]
            th = float(np.arctan2(abs(a), abs(b)))
            ph = float(np.angle(a) - np.angle(b)) if abs(a) > 1e-15 else 0.0
            w[:, c : c + 2] = w[:, c : c + 2] @ _block(th, ph).conj().T
            thetas.append(th)
            phis.append(ph)
    out = np.empty(n_params(dim))
    n_rot = len(thetas)
    out[: 2 * n_rot : 2] = thetas
    out[1 : 2 * n_rot : 2] = phis
    out[2 * n_rot :] = np.angle(np.diag(w))
    return out


def pullback(angles, dim: int, grad_u: np.ndarray) -> np.ndarray:
    """Gradient with respect to the angles.

    ``grad_u`` holds ``dL/dRe(U) + i dL/dIm(U)`` for a real loss ``L``, so
    that ``dL = Re sum(conj(grad_u) * dU)``.
    """
    thetas, phis, deltas = _split(angles, dim)
    modes = mesh_modes(dim)
    u = to_unitary(angles, dim)
    out = np.empty(n_params(dim))
    n_rot = len(modes)
    out[2 * n_rot :] = np.real(np.sum(np.conj(grad_u) * (1j * u), axis=1))

    phase = np.exp(-1j * deltas)[:, None]
    back = phase * grad_u  # S_i^dag G with S_L = D
    prefix = phase * u  # P_i = T_i ... T_1, starting from P_L
    for i in range(n_rot - 1, -1, -1):
        c, th, ph = modes[i], thetas[i], phis[i]
        t_dag = _block(th, ph).conj().T
        prefix[c : c + 2] = t_dag @ prefix[c : c + 2]
        local = back[c : c + 2] @ prefix[c : c + 2].conj().T
        e = np.exp(1j * ph)
        cs, sn = np.cos(th), np.sin(th)
        d_theta = np.array([[-e * sn, -cs], [e * cs, -sn]])
        d_phi = np.array([[1j * e * cs, 0.0], [1j * e * sn, 0.0]])
        out[2 * i] = np.real(np.sum(np.conj(local) * d_theta))
        out[2 * i + 1] = np.real(np.sum(np.conj(local) * d_phi))
        back[c : c + 2] = t_dag @ back[c : c + 2]
    return out
