"""Exact simulator for one system qubit exchange-coupled to one environment qubit.

Energies are in MHz (frequency units, h = 1) and times in ns, so a free
evolution over ``t`` ns is ``expm(-2j * pi * H * t * 1e-3)``. Two-qubit
vectors use the system-major basis ``|s e>`` (index ``2 * s + e``) with
``sigma_z |0> = +|0>``.

Free evolution is computed in the frame rotating at the system frequency,
``H - h_S (Z_S + Z_E)``. The subtracted term commutes with the exchange
Hamiltonian, so measurement statistics are unchanged while the Clifford
gates keep their nominal form, as they do in a rotating-frame drive.

Timing regimes:

* ``fixed_duration=True``: each Clifford acts instantaneously and is
  followed by free evolution for ``3 * gate_time_unit + segment_time``.
  Every step is then ``U_step @ (G kron I)``, i.e. an exact memory-2 model.
* ``fixed_duration=False``: each native rotation acts instantaneously and is
  followed by ``gate_time_unit`` of free evolution, then the gate is padded
  by ``segment_time`` of idling. Step durations and operators depend on the
  gate, which breaks the time-independent model assumption on purpose.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from . import clifford
from .dataset import RbDataset

_SZ = np.diag([1.0, -1.0]).astype(complex)
_SP = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
_I2 = np.eye(2, dtype=complex)
_P0 = np.diag([1.0, 0.0]).astype(complex)


@dataclass(frozen=True)
class Decoherence:
    """Per-qubit relaxation and dephasing times in microseconds."""

    T1_S: float
    T2_S: float
    T1_E: float
    T2_E: float

    def __post_init__(self):
        for t1, t2, who in ((self.T1_S, self.T2_S, "system"), (self.T1_E, self.T2_E, "environment")):
            if t1 <= 0 or t2 <= 0:
                raise ValueError(f"{who} T1/T2 must be positive")
            if t2 > 2 * t1 + 1e-12:
                raise ValueError(f"{who} T2={t2} exceeds 2*T1={2 * t1}")


@dataclass(frozen=True)
class TwoQubitModel:
    J: float
    h_S: float = 0.0
    h_E: float = 0.0
    segment_time: float = 100.0
    gate_time_unit: float = 20.0
    fixed_duration: bool = False
    decoherence: Decoherence | None = None

    def __post_init__(self):
        if self.J < 0:
            raise ValueError(f"coupling J must be non-negative, got {self.J}")
        if self.segment_time <= 0 or self.gate_time_unit <= 0:
            raise ValueError("segment_time and gate_time_unit must be positive")
        if isinstance(self.decoherence, dict):
            object.__setattr__(self, "decoherence", Decoherence(**self.decoherence))

    @classmethod
    def from_detuning(cls, J: float, delta_h: float, **kwargs) -> "TwoQubitModel":
        """Model with ``h_S - h_E = delta_h`` split symmetrically."""
        return cls(J=J, h_S=delta_h / 2, h_E=-delta_h / 2, **kwargs)

    @property
    def delta_h(self) -> float:
        return self.h_S - self.h_E

    @property
    def fixed_step_time(self) -> float:
        return 3 * self.gate_time_unit + self.segment_time

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TwoQubitModel":
        data = dict(data)
        if "delta_h" in data:
            delta_h = data.pop("delta_h")
            return cls.from_detuning(data.pop("J"), delta_h, **data)
        return cls(**data)


def gamma_eff(J: float, delta_h: float) -> float:
    """Dispersive exchange rate ``2 J^2 / delta_h``."""
    if delta_h == 0:
        raise ZeroDivisionError("gamma_eff is undefined at resonance (delta_h = 0)")
    return 2.0 * J**2 / delta_h


def hamiltonian(model: TwoQubitModel) -> np.ndarray:
    """Lab-frame two-qubit Hamiltonian in MHz."""
    hop = np.kron(_SP, _SP.conj().T)
    return (
        model.J * (hop + hop.conj().T)
        + model.h_S * np.kron(_SZ, _I2)
        + model.h_E * np.kron(_I2, _SZ)
    )


def frame_hamiltonian(model: TwoQubitModel) -> np.ndarray:
    return hamiltonian(model) - model.h_S * (np.kron(_SZ, _I2) + np.kron(_I2, _SZ))


def step_unitary(model: TwoQubitModel, duration: float, frame: str = "rotating") -> np.ndarray:
    """Free propagator over ``duration`` ns."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    if frame == "rotating":
        h = frame_hamiltonian(model)
    elif frame == "lab":
        h = hamiltonian(model)
    else:
        raise ValueError(f"unknown frame {frame!r}")
    return expm(-2j * np.pi * h * duration * 1e-3)


def _superop(u: np.ndarray) -> np.ndarray:
    # row-major vec: vec(A rho B) = kron(A, B.T) vec(rho)
    return np.kron(u, u.conj())


def _qubit_noise(t1: float, t2: float, t_ns: float) -> list[np.ndarray]:
    t_us = t_ns * 1e-3
    gamma = 1.0 - np.exp(-t_us / t1)
    rate_phi = max(1.0 / t2 - 0.5 / t1, 0.0)
    lam = 1.0 - np.exp(-2.0 * t_us * rate_phi)
    amp = [np.array([[1, 0], [0, np.sqrt(1 - gamma)]]), np.array([[0, np.sqrt(gamma)], [0, 0]])]
    phase = [np.array([[1, 0], [0, np.sqrt(1 - lam)]]), np.array([[0, 0], [0, np.sqrt(lam)]])]
    return [p @ a for p in phase for a in amp]


def decoherence_superop(deco: Decoherence, t_ns: float) -> np.ndarray:
    """Amplitude damping then pure dephasing on both qubits over ``t_ns``."""
    ks = _qubit_noise(deco.T1_S, deco.T2_S, t_ns)
    ke = _qubit_noise(deco.T1_E, deco.T2_E, t_ns)
    out = np.zeros((16, 16), dtype=complex)
    for a in ks:
        for b in ke:
            out += _superop(np.kron(a, b))
    return out


def _free_superop(model: TwoQubitModel, t_ns: float) -> np.ndarray:
    sup = _superop(step_unitary(model, t_ns))
    if model.decoherence is not None:
        sup = decoherence_superop(model.decoherence, t_ns) @ sup
    return sup


@lru_cache(maxsize=64)
def step_operators(model: TwoQubitModel) -> np.ndarray:
    """Per-Clifford step maps, shape ``(24, 4, 4)`` or ``(24, 16, 16)``.

    Unitaries are returned when the model has no decoherence, row-major
    superoperators otherwise.
    """
    unit = model.gate_time_unit
    mixed = model.decoherence is not None
    lift = _superop if mixed else (lambda u: u)
    free = (lambda t: _free_superop(model, t)) if mixed else (lambda t: step_unitary(model, t))
    ops = []
    if model.fixed_duration:
        idle = free(model.fixed_step_time)
        for g in clifford.clifford_group():
            ops.append(idle @ lift(np.kron(g.unitary, _I2)))
    else:
        after_native = free(unit)
        idle = free(model.segment_time)
        for g in clifford.clifford_group():
            op = np.eye(16 if mixed else 4, dtype=complex)
            for name in g.natives:
                op = after_native @ lift(np.kron(clifford.native_gate(name).unitary, _I2)) @ op
            ops.append(idle @ op)
    out = np.stack(ops)
    out.setflags(write=False)
    return out


def _as_padded(sequences) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([len(s) for s in sequences], dtype=np.int64)
    width = int(lengths.max()) if len(lengths) else 0
    padded = np.zeros((len(sequences), width), dtype=np.int64)
    for row, seq in enumerate(sequences):
        padded[row, : len(seq)] = seq
    return padded, lengths


def run_sequences(model: TwoQubitModel, sequences) -> np.ndarray:
    """Survival probabilities of ``|0_S>`` for many Clifford-index sequences."""
    sequences = [list(map(int, s)) for s in sequences]
    if not sequences:
        return np.zeros(0)
    padded, lengths = _as_padded(sequences)
    ops = step_operators(model)
    n = len(sequences)
    proj = np.kron(_P0, _I2)
    if model.decoherence is None:
        state = np.zeros((n, 4), dtype=complex)
        state[:, 0] = 1.0
        for j in range(padded.shape[1]):
            live = lengths > j
            state[live] = np.einsum("nab,nb->na", ops[padded[live, j]], state[live])
        f = np.einsum("na,ab,nb->n", state.conj(), proj, state).real
    else:
        rho = np.zeros((n, 16), dtype=complex)
        rho[:, 0] = 1.0
        for j in range(padded.shape[1]):
            live = lengths > j
            rho[live] = np.einsum("nab,nb->na", ops[padded[live, j]], rho[live])
        f = np.einsum("nab,ba->n", rho.reshape(n, 4, 4), proj).real
    return np.clip(f, 0.0, 1.0)


def run_sequence(model: TwoQubitModel, seq) -> float:
    """Probability of finding the system in ``|0>`` after ``seq``."""
    return float(run_sequences(model, [seq])[0])


def final_states(model: TwoQubitModel, sequences) -> np.ndarray:
    """Final joint pure states ``(n, 4)``; requires a model without decoherence."""
    if model.decoherence is not None:
        raise ValueError("pure final states are undefined with decoherence")
    padded, lengths = _as_padded([list(map(int, s)) for s in sequences])
    ops = step_operators(model)
    state = np.zeros((len(lengths), 4), dtype=complex)
    state[:, 0] = 1.0
    for j in range(padded.shape[1]):
        live = lengths > j
        state[live] = np.einsum("nab,nb->na", ops[padded[live, j]], state[live])
    return state


def _entropy(seed, k: int, index: int) -> list[int]:
    base = [int(s) for s in np.atleast_1d(seed)]
    return base + [int(k), int(index)]


def generate_dataset(
    model: TwoQubitModel,
    k_values,
    n: int,
    shots: int | None = None,
    seed=0,
) -> RbDataset:
    """Sample ``n`` RB sequences for every depth in ``k_values`` and simulate them.

    Each sequence draws from its own generator seeded by ``(seed, k, index)``,
    so records do not depend on how generation is batched. With ``shots``,
    outcomes are binomial sample means.
    """
    k_values = sorted({int(k) for k in k_values})
    if not k_values or k_values[0] < 2:
        raise ValueError("all depths must be >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    if shots is not None and shots < 1:
        raise ValueError("shots must be a positive integer")
    ks, seqs, fs = [], [], []
    for k in k_values:
        rngs = [np.random.default_rng(_entropy(seed, k, i)) for i in range(n)]
        batch = [clifford.sample_rb_sequence(k, rng) for rng in rngs]
        f = run_sequences(model, batch)
        if shots is not None:
            f = np.array([rng.binomial(shots, p) / shots for rng, p in zip(rngs, f)])
        ks.extend([k] * n)
        seqs.extend(batch)
        fs.extend(f.tolist())
    metadata = {
        "model": model.to_dict(),
        "k_values": k_values,
        "n": n,
        "shots": shots,
        "seed": [int(s) for s in np.atleast_1d(seed)],
    }
    return RbDataset(ks, seqs, fs, metadata=metadata)
