"""Process tensors of an OQE model as MPS (purified) and MPDO objects.

Index conventions, shared by every routine here:

* Slot ``l`` (``0 <= l < k``) is the time at which the ``(l+1)``-th gate acts.
  The system leaves the process on output leg ``o_l`` and re-enters on input
  leg ``i_l``. The final output is ``o_k``.
* Site 0 of the purified process tensor is the joint state presented to the
  first gate, ``U |0_S 0_M>`` (the leading free step of the OQE sequence), so
  contracting ``k`` gates reproduces the OQE prediction for those gates.
* Bulk sites are ``B[i, o, a, b] = <o, b| U |i, a>``: input leg ``i`` with left
  memory bond ``a`` maps to output leg ``o`` with right memory bond ``b``.
* MPDO sites are ``W = B (x) conj(B)`` with legs
  ``[i, i', o, o', a, a', b, b']``; the last site has its memory bond traced.
* Dense operators are ordered ``(o_0, i_0, o_1, i_1, ..., i_{k-1}, o_k)``
  with ``o_0`` most significant, ket index first.
* A CP map on a gate slot is a 4x4 superoperator acting on row-major
  vectorized density matrices: ``vec(G rho G^dag) = kron(G, conj(G)) vec(rho)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._io import complex_to_pairs
from .mps import MPS
from .oqe import P0, OqeModel

DENSE_K_MAX = 4


def _unitary4(model: OqeModel) -> np.ndarray:
    chi = model.chi
    return model.unitary.reshape(2, chi, 2, chi)


@dataclass(frozen=True)
class PurifiedProcessTensor:
    initial: np.ndarray  # [o0, a0]
    site: np.ndarray  # [i, o, a, b]
    k: int

    @property
    def chi(self) -> int:
        return self.initial.shape[1]

    @property
    def sites(self) -> list[np.ndarray]:
        return [self.initial] + [self.site] * self.k

    def to_mps(self) -> MPS:
        """Chain of ``k + 2`` sites; the last one carries the dangling memory leg."""
        chi = self.chi
        bulk = self.site.transpose(2, 0, 1, 3).reshape(chi, 4, chi)
        tensors = [self.initial.reshape(1, 2, chi)] + [bulk] * self.k
        tensors.append(np.eye(chi, dtype=complex).reshape(chi, chi, 1))
        return MPS(tensors)

    def norm_squared(self) -> float:
        return self.to_mps().norm() ** 2

    def contract(self, gates, measurement=P0) -> float:
        gates = _check_gates(gates, self.k)
        if any(g.shape == (4, 4) for g in gates):
            return build_pt(self).contract(gates, measurement)
        v = self.initial
        for g in gates:
            v = np.einsum("ioab,ia->ob", self.site, g @ v)
        return float(np.real(np.vdot(v, np.asarray(measurement) @ v)))


@dataclass(frozen=True)
class ProcessTensor:
    initial: np.ndarray  # [o, o', b, b']
    sites: tuple  # k tensors [i, i', o, o', a, a', b, b']; last has b, b' of size 1

    @property
    def k(self) -> int:
        return len(self.sites)

    @property
    def bond_dims(self) -> list[int]:
        # ket and bra memory legs together
        return [self.initial.shape[2] * self.initial.shape[3]] + [s.shape[6] * s.shape[7] for s in self.sites]

    def contract(self, gates, measurement=P0) -> float:
        gates = _check_gates(gates, self.k)
        ops = {l: _as_superop(g) for l, g in enumerate(gates)}
        rho = reduce_pt(self, keep={("o", self.k)}, gates=ops)
        return float(np.real(np.trace(np.asarray(measurement) @ rho)))

    def final_state(self, gates) -> np.ndarray:
        gates = _check_gates(gates, self.k)
        ops = {l: _as_superop(g) for l, g in enumerate(gates)}
        return reduce_pt(self, keep={("o", self.k)}, gates=ops)

    def to_dense(self) -> np.ndarray:
        if self.k > DENSE_K_MAX:
            raise ValueError(f"dense process tensors are limited to k <= {DENSE_K_MAX}")
        keep = {("o", l) for l in range(self.k + 1)} | {("i", l) for l in range(self.k)}
        return reduce_pt(self, keep=keep)

    def trace(self) -> float:
        """Full trace over every leg; ``2**k`` for a physical process."""
        env = np.einsum("ooac->ac", self.initial)
        for w in self.sites:
            env = np.einsum("ac,iiooacbd->bd", env, w)
        return float(np.real(env[0, 0]))


def build_ppt(model: OqeModel, k: int) -> PurifiedProcessTensor:
    if k < 1:
        raise ValueError("k must be >= 1")
    u4 = _unitary4(model)
    initial = (model.unitary @ model.initial_state()).reshape(2, model.chi)
    site = np.ascontiguousarray(u4.transpose(2, 0, 3, 1))
    initial.setflags(write=False)
    site.setflags(write=False)
    return PurifiedProcessTensor(initial, site, k)


def build_pt(source, k: int | None = None) -> ProcessTensor:
    """MPDO from an :class:`OqeModel` (with ``k``) or from a purified process tensor."""
    ppt = source if isinstance(source, PurifiedProcessTensor) else build_ppt(source, k)
    b0, b = ppt.initial, ppt.site
    initial = np.einsum("oa,pc->opac", b0, b0.conj())
    bulk = np.einsum("ioab,jpcd->ijopacbd", b, b.conj())
    last = np.einsum("ioab,jpcb->ijopac", b, b.conj())[..., None, None]
    return ProcessTensor(initial, tuple([bulk] * (ppt.k - 1) + [last]))


def _check_gates(gates, k):
    gates = [np.asarray(g, dtype=complex) for g in gates]
    if len(gates) != k:
        raise ValueError(f"expected {k} gates, got {len(gates)}")
    for g in gates:
        if g.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"gate must be a 2x2 unitary or 4x4 superoperator, got {g.shape}")
    return gates


def _as_superop(g):
    return np.kron(g, g.conj()) if g.shape == (2, 2) else g


def reduce_pt(pt: ProcessTensor, keep=frozenset(), gates=None, fresh: str = "trace") -> np.ndarray:
    """Contract an MPDO leaving the legs in ``keep`` open.

    ``keep`` holds ``("o", l)`` and ``("i", l)`` pairs. At each slot:

    * neither leg kept: the output feeds the input through ``gates[l]``
      (identity when absent), i.e. the modified trace;
    * only ``i_l`` kept: ``o_l`` is traced out;
    * only ``o_l`` kept: ``i_l`` receives the identity (``fresh="trace"``) or
      ``|0><0|`` (``fresh="zero"``).

    An unkept final output is traced. Returns the matrix over the kept legs
    in temporal order (ket multi-index first).
    """
    gates = gates or {}
    if fresh == "trace":
        rho_in = np.eye(2, dtype=complex)
    elif fresh == "zero":
        rho_in = np.diag([1.0, 0.0]).astype(complex)
    else:
        raise ValueError(f"unknown fresh-input rule {fresh!r}")
    r = pt.initial[None, None]  # [K, L, o, o', a, a']
    for l, w in enumerate(pt.sites):
        kk, ll = r.shape[:2]
        keep_o, keep_i = ("o", l) in keep, ("i", l) in keep
        if keep_o:
            x = r.transpose(0, 2, 1, 3, 4, 5).reshape(kk * 2, ll * 2, *r.shape[4:])
        elif keep_i:
            x = np.einsum("KLooac->KLac", r)
        if keep_i:
            r = np.einsum("KLac,ijopacbd->KiLjopbd", x, w)
            r = r.reshape(x.shape[0] * 2, x.shape[1] * 2, *r.shape[4:])
            continue
        if keep_o:
            r_in = np.einsum("KLac,ij->KLijac", x, rho_in)
        elif l in gates:
            r_in = np.einsum("ijop,KLopac->KLijac", np.asarray(gates[l]).reshape(2, 2, 2, 2), r)
        else:
            r_in = r
        r = np.einsum("KLijac,ijopacbd->KLopbd", r_in, w)
    r = r[..., 0, 0]
    kk, ll = r.shape[:2]
    if ("o", pt.k) in keep:
        return r.transpose(0, 2, 1, 3).reshape(kk * 2, ll * 2)
    return np.einsum("KLoo->KL", r)


def contract_with_sequence(pt, gates, measurement=P0) -> float:
    """Outcome probability for one gate per slot (unitaries or superoperators)."""
    return pt.contract(gates, measurement)


def dense_pt(model: OqeModel, k: int) -> np.ndarray:
    """Dense process tensor by explicit summation over every leg configuration."""
    if not 1 <= k <= DENSE_K_MAX:
        raise ValueError(f"dense_pt supports 1 <= k <= {DENSE_K_MAX}, got {k}")
    u4 = _unitary4(model)
    start = (model.unitary @ model.initial_state()).reshape(2, model.chi)
    rows = []
    for cfg in itertools.product((0, 1), repeat=2 * k + 1):
        v = start[cfg[0]]
        for j in range(1, k + 1):
            v = u4[cfg[2 * j], :, cfg[2 * j - 1], :] @ v
        rows.append(v)
    amp = np.array(rows)
    return amp @ amp.conj().T


def vectorize_pt(pt: ProcessTensor) -> MPS:
    """``vec(Y) / ||Y||_2`` as an MPS with physical dims 4 (site 0) and 16."""
    chi0 = pt.initial.shape[2]
    tensors = [pt.initial.reshape(1, 4, chi0 * chi0)]
    for w in pt.sites:
        a, b = w.shape[4], w.shape[6]
        tensors.append(w.transpose(4, 5, 0, 1, 2, 3, 6, 7).reshape(a * a, 16, b * b))
    return MPS(tensors).normalized()


def export_tensors(obj) -> dict:
    """JSON-ready dump: kind, k and every site as shape plus row-major ``[re, im]`` data."""
    if isinstance(obj, PurifiedProcessTensor):
        kind, sites = "purified_process_tensor", obj.sites
    elif isinstance(obj, ProcessTensor):
        kind, sites = "process_tensor", [obj.initial, *obj.sites]
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    return {
        "kind": kind,
        "k": obj.k,
        "sites": [{"shape": list(s.shape), "data": complex_to_pairs(np.ravel(s))} for s in sites],
    }
