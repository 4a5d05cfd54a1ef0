"""Minimal open-boundary MPS with bipartite entanglement entropies.

Site tensors have legs ``(left bond, physical, right bond)``; boundary bonds
have dimension 1.
"""

from __future__ import annotations

import numpy as np

SV_FLOOR = 1e-12


def entropy_from_weights(p, base: float = 2.0) -> float:
    """Shannon entropy of weights ``p`` (normalized here), with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    if p.size == 0:
        return 0.0
    p = p / p.sum()
    return float(max(-np.sum(p * np.log(p)) / np.log(base), 0.0))


def _entropy_from_singular_values(s, base):
    s = np.asarray(s, dtype=float)
    norm = np.linalg.norm(s)
    if norm == 0:
        return 0.0
    s = s / norm
    s = s[s >= SV_FLOOR]
    return entropy_from_weights(s * s, base)


class MPS:
    def __init__(self, tensors):
        self.tensors = [np.asarray(t, dtype=complex) for t in tensors]
        if not self.tensors:
            raise ValueError("an MPS needs at least one site")
        for i, t in enumerate(self.tensors):
            if t.ndim != 3:
                raise ValueError(f"site {i} must have 3 legs, got shape {t.shape}")
        for i, (a, b) in enumerate(zip(self.tensors, self.tensors[1:])):
            if a.shape[2] != b.shape[0]:
                raise ValueError(f"bond {i} mismatch: {a.shape[2]} vs {b.shape[0]}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")

    def __len__(self):
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def physical_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors]

    def log_norm(self) -> float:
        env = np.ones((1, 1), dtype=complex)
        log_scale = 0.0
        for t in self.tensors:
            env = np.einsum("ab,asc,bsd->cd", env, t, t.conj())
            s = np.max(np.abs(env))
            if s > 0:
                env /= s
                log_scale += np.log(s)
        val = abs(env[0, 0].real)
        return float(0.5 * (np.log(val) + log_scale)) if val > 0 else -np.inf

    def norm(self) -> float:
        return float(np.exp(self.log_norm()))

    def normalized(self) -> "MPS":
        log_nrm = self.log_norm()
        if not np.isfinite(log_nrm):
            raise ValueError("cannot normalize a zero MPS")
        # spread the factor to keep entries O(1) on long chains
        factor = np.exp(log_nrm / len(self))
        return MPS([t / factor for t in self.tensors])

    def to_dense(self) -> np.ndarray:
        """Full state vector (small chains only), first site most significant."""
        out = self.tensors[0].reshape(-1, self.tensors[0].shape[2])
        for t in self.tensors[1:]:
            out = np.einsum("pa,asb->psb", out, t).reshape(-1, t.shape[2])
        return out.ravel()

    def _right_factors(self) -> list[np.ndarray]:
        """``R[i]``: triangular factor carrying sites ``i..end`` (QR from the right)."""
        factors = [None] * (len(self) + 1)
        r = np.ones((1, 1), dtype=complex)
        factors[len(self)] = r
        for i in range(len(self) - 1, -1, -1):
            t = np.einsum("asb,bc->asc", self.tensors[i], r)
            dl = t.shape[0]
            # t = r_new @ q with q right-orthonormal
            q, rr = np.linalg.qr(t.reshape(dl, -1).T)
            r = rr.T
            nrm = np.linalg.norm(r)
            if nrm > 0:
                r = r / nrm
            factors[i] = r
        return factors

    def bipartite_entropy(self, cut: int, base: float = 2.0) -> float:
        """Entanglement entropy between sites ``0..cut`` and ``cut+1..end``."""
        if not 0 <= cut < len(self):
            raise ValueError(f"cut must be in [0, {len(self)}), got {cut}")
        left = np.ones((1, 1), dtype=complex)
        for i in range(cut + 1):
            t = np.einsum("ab,bsc->asc", left, self.tensors[i])
            _, left = np.linalg.qr(t.reshape(-1, t.shape[2]))
            nrm = np.linalg.norm(left)
            if nrm > 0:
                left = left / nrm
        right = np.ones((1, 1), dtype=complex)
        for i in range(len(self) - 1, cut, -1):
            t = np.einsum("asb,bc->asc", self.tensors[i], right)
            q, rr = np.linalg.qr(t.reshape(t.shape[0], -1).T)
            right = rr.T
            nrm = np.linalg.norm(right)
            if nrm > 0:
                right = right / nrm
        s = np.linalg.svd(left @ right, compute_uv=False)
        return _entropy_from_singular_values(s, base)

    def cut_entropies(self, base: float = 2.0) -> np.ndarray:
        """Entropies at every cut ``0 .. len-1`` from one canonicalizing sweep."""
        rights = self._right_factors()
        out = np.zeros(len(self))
        left = np.ones((1, 1), dtype=complex)
        for i in range(len(self)):
            t = np.einsum("ab,bsc->asc", left, self.tensors[i])
            _, left = np.linalg.qr(t.reshape(-1, t.shape[2]))
            nrm = np.linalg.norm(left)
            if nrm > 0:
                left = left / nrm
            s = np.linalg.svd(left @ rights[i + 1], compute_uv=False)
            out[i] = _entropy_from_singular_values(s, base)
        return out


def bipartite_entropy(mps: MPS, cut: int, log_base: float = 2.0) -> float:
    return mps.bipartite_entropy(cut, log_base)
