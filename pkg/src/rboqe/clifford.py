"""Single-qubit Clifford group built from X/Y native rotations.

The 24 group elements are enumerated by closing the native gate set
``{+-X/2, +-Y/2, +-X, +-Y, I}`` under products of at most three natives.
Each element keeps the shortest native decomposition found (ties broken by
the position of the natives in :data:`NATIVE_ORDER`), and elements are
indexed by a canonical key on their phase-normalized matrix entries with
the identity at index 0.

Native lists are stored in time order, so the unitary of a gate with
natives ``[n1, n2, n3]`` is ``U(n3) @ U(n2) @ U(n1)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

N_CLIFFORD = 24
PHASE_ATOL = 1e-10
NATIVE_DURATION_NS = 20.0

NATIVE_ORDER = ("+X/2", "-X/2", "+Y/2", "-Y/2", "+X", "-X", "+Y", "-Y", "I")

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def rotation(axis: str, angle: float) -> np.ndarray:
    """Return ``exp(-i angle sigma_axis / 2)``."""
    sigma = _PAULI[axis]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * sigma


@dataclass(frozen=True)
class NativeGate:
    identifier: str
    unitary: np.ndarray
    duration: float = NATIVE_DURATION_NS

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError(f"native gate duration must be positive, got {self.duration}")


def _parse_native(identifier: str) -> tuple[str, float]:
    if identifier == "I":
        return "X", 0.0
    sign = 1.0 if identifier[0] == "+" else -1.0
    axis = identifier[1]
    angle = np.pi / 2 if identifier.endswith("/2") else np.pi
    return axis, sign * angle


def native_gate(identifier: str, duration: float = NATIVE_DURATION_NS) -> NativeGate:
    if identifier not in NATIVE_ORDER:
        raise ValueError(f"unknown native gate {identifier!r}")
    axis, angle = _parse_native(identifier)
    return NativeGate(identifier, rotation(axis, angle), duration)


@dataclass(frozen=True)
class CliffordGate:
    index: int
    unitary: np.ndarray
    natives: tuple[str, ...]

    @property
    def duration(self) -> float:
        return NATIVE_DURATION_NS * len(self.natives)


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max-entry distance between ``a`` and ``b`` after aligning global phase."""
    overlap = np.vdot(b, a)
    if abs(overlap) < 1e-14:
        return float(np.max(np.abs(a - b)))
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(a - phase * b)))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = PHASE_ATOL) -> bool:
    return phase_distance(a, b) < atol


def _canonical_key(u: np.ndarray) -> tuple[float, ...]:
    flat = u.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 1e-6)]
    v = flat * (np.conj(pivot) / abs(pivot))
    parts = np.round(np.stack([v.real, v.imag], axis=1).ravel(), 9) + 0.0
    return tuple(float(x) for x in parts)


def _word_unitary(word: tuple[str, ...]) -> np.ndarray:
    u = np.eye(2, dtype=complex)
    for name in word:
        u = native_gate(name).unitary @ u
    return u


@lru_cache(maxsize=1)
def _group() -> tuple[CliffordGate, ...]:
    found: list[tuple[np.ndarray, tuple[str, ...]]] = []
    words = [("I",)]
    movers = NATIVE_ORDER[:-1]
    for length in (1, 2, 3):
        # itertools.product yields words in lexicographic NATIVE_ORDER order
        words.extend(itertools.product(movers, repeat=length))
    for word in words:
        u = _word_unitary(word)
        if not any(equal_up_to_phase(u, v) for v, _ in found):
            found.append((u, tuple(word)))
    if len(found) != N_CLIFFORD:
        raise RuntimeError(f"closure produced {len(found)} elements, expected {N_CLIFFORD}")
    # descending canonical key puts the identity first
    found.sort(key=lambda item: _canonical_key(item[0]), reverse=True)
    return tuple(CliffordGate(i, u, w) for i, (u, w) in enumerate(found))


def clifford_group() -> list[CliffordGate]:
    """All 24 single-qubit Cliffords; index 0 is the identity."""
    return list(_group())


@lru_cache(maxsize=1)
def clifford_unitaries() -> np.ndarray:
    """Stacked ``(24, 2, 2)`` unitaries indexed like :func:`clifford_group`."""
    arr = np.stack([g.unitary for g in _group()])
    arr.setflags(write=False)
    return arr


def find_index(u: np.ndarray) -> int:
    """Index of the Clifford equal to ``u`` up to global phase."""
    for gate in _group():
        if equal_up_to_phase(u, gate.unitary):
            return gate.index
    raise ValueError("matrix is not a single-qubit Clifford")


@lru_cache(maxsize=1)
def _tables() -> tuple[np.ndarray, np.ndarray]:
    mats = clifford_unitaries()
    table = np.empty((N_CLIFFORD, N_CLIFFORD), dtype=np.int64)
    for a in range(N_CLIFFORD):
        for b in range(N_CLIFFORD):
            table[a, b] = find_index(mats[a] @ mats[b])
    inverse = np.argmax(table == 0, axis=1)
    table.setflags(write=False)
    inverse.setflags(write=False)
    return table, inverse


def compose_table() -> np.ndarray:
    """``table[a, b]`` is the index of ``U_a @ U_b`` (apply b, then a)."""
    return _tables()[0]


def compose(a: int, b: int) -> int:
    return int(_tables()[0][a, b])


def inverse(a: int) -> int:
    return int(_tables()[1][a])


def net_gate(seq) -> int:
    """Index of the net operation ``G_k ... G_1`` of a time-ordered sequence."""
    table = _tables()[0]
    acc = 0
    for g in seq:
        acc = table[int(g), acc]
    return int(acc)


def undo_gate(prefix) -> int:
    """Gate that returns ``prefix`` to the identity when appended after it."""
    return inverse(net_gate(prefix))


def sample_rb_sequence(k: int, rng: np.random.Generator) -> list[int]:
    """Draw ``k - 1`` uniform Cliffords followed by their undo gate."""
    if k < 2:
        raise ValueError(f"RB depth must be at least 2, got {k}")
    prefix = [int(g) for g in rng.integers(0, N_CLIFFORD, size=k - 1)]
    return prefix + [undo_gate(prefix)]


def is_rb_sequence(seq) -> bool:
    seq = list(seq)
    return len(seq) >= 2 and net_gate(seq) == 0
