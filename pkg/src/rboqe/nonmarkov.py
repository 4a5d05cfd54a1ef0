"""Memory and non-Markovianity measures of an OQE model's process tensor.

Entropies are in bits unless ``base`` says otherwise. Choi matrices of
single-step maps are returned with trace 2 (map semantics); entropy
computations renormalize to unit trace internally.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .mps import entropy_from_weights
from .oqe import OqeModel
from .process_tensor import DENSE_K_MAX, ProcessTensor, build_ppt, build_pt, reduce_pt, vectorize_pt

DEFAULT_BUFFER = 10
SUPPORT_TOL = 1e-8
CLIP_TOL = 1e-10
NULL_RTOL = 1e-15
CONSTRUCTIONS = {"modified_trace": "trace", "main_text": "zero"}


def _fresh(construction: str) -> str:
    try:
        return CONSTRUCTIONS[construction]
    except KeyError:
        raise ValueError(f"construction must be one of {sorted(CONSTRUCTIONS)}, got {construction!r}") from None


def _unit_trace(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if tr <= 0:
        raise ValueError("matrix has non-positive trace")
    return rho / tr


def von_neumann_entropy(rho, base: float = 2.0) -> float:
    """Entropy of ``rho / tr(rho)``."""
    w = np.linalg.eigvalsh(_unit_trace(np.asarray(rho, dtype=complex)))
    return entropy_from_weights(np.clip(w, 0.0, None), base)


def memory_complexity(model: OqeModel, j: int, k: int | None = None, base: float = 2.0) -> float:
    """Entropy of the ``j``-step process tensor from the purified chain of length ``k >= j``."""
    if j < 1:
        raise ValueError("j must be >= 1")
    k = j if k is None else k
    if k < j:
        raise ValueError(f"k={k} must be >= j={j}")
    return build_ppt(model, k).to_mps().normalized().bipartite_entropy(j, base)


def memory_complexities(model: OqeModel, j_max: int, base: float = 2.0) -> np.ndarray:
    """``M_1 .. M_{j_max}`` from a single chain."""
    ent = build_ppt(model, j_max).to_mps().normalized().cut_entropies(base)
    return ent[1 : j_max + 1]


def osee_nonmarkovianity(
    model: OqeModel, j: int, k: int | None = None, buffer: int = DEFAULT_BUFFER, base: float = 2.0
) -> float:
    """Operator-space entanglement of the vectorized process tensor at cut ``j``.

    ``k`` defaults to ``j + buffer`` to keep the cut away from the open end.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    k = j + buffer if k is None else k
    if k < j:
        raise ValueError(f"k={k} must be >= j={j}")
    return vectorize_pt(build_pt(model, k)).bipartite_entropy(j, base)


def osee_profile(model: OqeModel, j_max: int, buffer: int = DEFAULT_BUFFER, base: float = 2.0) -> np.ndarray:
    """``N_1 .. N_{j_max}`` from one chain of length ``j_max + buffer``."""
    ent = vectorize_pt(build_pt(model, j_max + buffer)).cut_entropies(base)
    return ent[1 : j_max + 1]


def _as_pt(source, k):
    if isinstance(source, ProcessTensor):
        if k is not None and k != source.k:
            raise ValueError(f"process tensor has k={source.k}, got k={k}")
        return source
    return build_pt(source, k)


def markov_marginal(source, k: int | None, j: int) -> np.ndarray:
    """Choi matrix (trace 2) of the step map from input ``j-1`` to output ``j``.

    Rows and columns are ordered ``(i_{j-1}, o_j)``. Every other slot is
    closed with the identity gate.
    """
    pt = _as_pt(source, k)
    if not 1 <= j <= pt.k:
        raise ValueError(f"j must be in [1, {pt.k}], got {j}")
    choi = reduce_pt(pt, keep={("i", j - 1), ("o", j)})
    return 2.0 * _unit_trace(choi)


def initial_marginal(source, k: int | None = None) -> np.ndarray:
    """Unit-trace state on the first output leg."""
    return _unit_trace(reduce_pt(_as_pt(source, k), keep={("o", 0)}))


def markov_process_tensor(source, k: int | None = None) -> ProcessTensor:
    """Product of the initial marginal and all single-step marginals, as a bond-1 MPDO."""
    pt = _as_pt(source, k)
    rho0 = initial_marginal(pt)
    sites = []
    for j in range(1, pt.k + 1):
        e = markov_marginal(pt, None, j).reshape(2, 2, 2, 2)  # [i, o, i', o']
        sites.append(e.transpose(0, 2, 1, 3).reshape(2, 2, 2, 2, 1, 1, 1, 1))
    return ProcessTensor(rho0.reshape(2, 2, 1, 1), tuple(sites))


def relative_entropy_dense(a, b, base: float = 2.0, tol: float = SUPPORT_TOL) -> float:
    """``S(a || b)`` of the unit-trace normalized matrices.

    Returns ``inf`` when more than ``tol`` of the weight of ``a`` lies in the
    numerical kernel of ``b``.
    """
    a = _unit_trace(np.asarray(a, dtype=complex))
    b = _unit_trace(np.asarray(b, dtype=complex))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    wa, va = np.linalg.eigh(a)
    wb, vb = np.linalg.eigh(b)
    wa = np.clip(wa, 0.0, None)
    null_b = wb <= NULL_RTOL * max(wb.max(), 0.0) * len(wb)
    # weight of a inside the kernel of b
    if np.any(null_b):
        leak = np.real(np.einsum("ij,jk,ki->", vb[:, null_b].conj().T, a, vb[:, null_b]))
        if leak > tol:
            return math.inf
    pos = wa > 0
    s_a = float(np.sum(wa[pos] * np.log(wa[pos])))
    log_b = np.zeros_like(wb)
    log_b[~null_b] = np.log(wb[~null_b])
    overlap = np.abs(vb.conj().T @ va[:, pos]) ** 2  # |<b_m|a_n>|^2
    cross = float(np.sum(overlap * (log_b[:, None] * wa[pos][None, :])))
    return max((s_a - cross) / math.log(base), 0.0)


def nonmarkovianity_dense(model: OqeModel, k: int, base: float = 2.0) -> float:
    """Relative entropy between the dense process tensor and its Markov product."""
    if not 1 <= k <= DENSE_K_MAX:
        raise ValueError(f"k must be in [1, {DENSE_K_MAX}], got {k}")
    pt = build_pt(model, k)
    return relative_entropy_dense(pt.to_dense(), markov_process_tensor(pt).to_dense(), base)


def confusion_probability(n_value: float, lam: float, base: float = 2.0) -> float:
    """``exp(-lam * N)`` with ``N`` given in units of ``log(base)``."""
    if n_value < 0:
        raise ValueError("non-Markovianity must be >= 0")
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    if math.isinf(lam):
        return 0.0 if n_value > 0 else 1.0
    return math.exp(-lam * n_value * math.log(base))


def two_slot_choi(source, x: int, y: int, k: int | None = None, construction: str = "modified_trace") -> np.ndarray:
    """Unit-trace joint object over ``(i_{y-1}, o_y, i_{x-1}, o_x)``."""
    if k is None and not isinstance(source, ProcessTensor):
        k = x
    pt = _as_pt(source, k)
    if not 1 <= y < x <= pt.k:
        raise ValueError(f"need 1 <= y < x <= {pt.k}, got x={x}, y={y}")
    keep = {("i", y - 1), ("o", y), ("i", x - 1), ("o", x)}
    return _unit_trace(reduce_pt(pt, keep=keep, fresh=_fresh(construction)))


def _partial_traces(joint):
    t = joint.reshape(4, 4, 4, 4)
    return np.einsum("abcb->ac", t), np.einsum("abad->bd", t)


def mutual_information(
    model, x: int, y: int, k: int | None = None, construction: str = "modified_trace", base: float = 2.0
) -> float:
    """``S(y) + S(x) - S(xy)`` of the two-slot object and its partial traces."""
    joint = two_slot_choi(model, x, y, k, construction)
    rho_y, rho_x = _partial_traces(joint)
    value = von_neumann_entropy(rho_y, base) + von_neumann_entropy(rho_x, base) - von_neumann_entropy(joint, base)
    if value < -CLIP_TOL:
        raise FloatingPointError(f"mutual information {value} is negative beyond tolerance")
    return max(value, 0.0)


@dataclass
class MeasureReport:
    model_id: str
    k: int
    buffer: int
    base: float
    j: list[int]
    memory_complexity: list[float]
    osee: list[float]
    mutual_information: list[tuple[int, int, float]] = field(default_factory=list)
    dense_nonmarkovianity: dict[int, float] = field(default_factory=dict)
    construction: str = "modified_trace"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mutual_information"] = [list(t) for t in self.mutual_information]
        out["dense_nonmarkovianity"] = {str(k): v for k, v in self.dense_nonmarkovianity.items()}
        return out

    def measures_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "M_j", "N_j"])
        for row in zip(self.j, self.memory_complexity, self.osee):
            w.writerow([row[0], repr(row[1]), repr(row[2])])
        return buf.getvalue()

    def mutual_information_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "I"])
        for x, y, v in self.mutual_information:
            w.writerow([x, y, repr(v)])
        return buf.getvalue()


def measure_report(
    model: OqeModel,
    k: int = 40,
    pairs=None,
    buffer: int = DEFAULT_BUFFER,
    dense_k: int = 0,
    construction: str = "modified_trace",
    base: float = 2.0,
    model_id: str = "",
) -> MeasureReport:
    """``M_j`` and ``N_j`` for ``j = 1..k``, ``I(x, y)`` for each pair, dense ``N`` up to ``dense_k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if buffer < 0:
        raise ValueError("buffer must be >= 0")
    if dense_k > DENSE_K_MAX:
        raise ValueError(f"dense_k must be <= {DENSE_K_MAX}")
    if pairs is None:
        pairs = [(x, x - 1) for x in range(2, k + 1)]
    mi_pt = {}
    mi = []
    for x, y in pairs:
        if not 1 <= y < x:
            raise ValueError(f"invalid pair (x={x}, y={y})")
        if x not in mi_pt:
            mi_pt[x] = build_pt(model, x)
        mi.append((int(x), int(y), mutual_information(mi_pt[x], x, y, construction=construction, base=base)))
    return MeasureReport(
        model_id=model_id,
        k=k,
        buffer=buffer,
        base=base,
        j=list(range(1, k + 1)),
        memory_complexity=[float(v) for v in memory_complexities(model, k, base)],
        osee=[float(v) for v in osee_profile(model, k, buffer, base)],
        mutual_information=mi,
        dense_nonmarkovianity={kk: nonmarkovianity_dense(model, kk, base) for kk in range(1, dense_k + 1)},
        construction=construction,
    )
