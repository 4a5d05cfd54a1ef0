"""RB datasets: records, per-depth splits and the JSON-lines file format.

A dataset file has one metadata header line followed by one record per line::

    {"metadata": {...}}
    {"k": 3, "seq": [5, 17, 2], "f": 0.9921, "split": "train"}

``split`` is ``"train"``, ``"val"``, ``"pred"`` or ``null`` when unassigned.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ._io import atomic_write_text

SPLITS = ("train", "val", "pred")


class RbDataset:
    """Collection of ``(k, sequence, outcome)`` records with split labels."""

    def __init__(self, k, sequences, f, split=None, metadata=None):
        self.k = np.asarray(k, dtype=np.int64)
        self.sequences = [tuple(int(g) for g in s) for s in sequences]
        self.f = np.asarray(f, dtype=float)
        n = len(self.sequences)
        if self.k.shape != (n,) or self.f.shape != (n,):
            raise ValueError("k, sequences and f must have the same length")
        if split is None:
            split = [None] * n
        self.split = np.array(split, dtype=object)
        if self.split.shape != (n,):
            raise ValueError("split labels must match the number of records")
        self.metadata = dict(metadata or {})
        self._check()

    def _check(self):
        if np.any(self.f < 0) or np.any(self.f > 1):
            raise ValueError("outcomes must lie in [0, 1]")
        for kk, seq in zip(self.k, self.sequences):
            if len(seq) != kk:
                raise ValueError(f"record depth {kk} does not match sequence length {len(seq)}")
        bad = set(self.split.tolist()) - set(SPLITS) - {None}
        if bad:
            raise ValueError(f"unknown split labels {sorted(bad)}")

    def __len__(self):
        return len(self.sequences)

    def __repr__(self):
        counts = {s: int(np.sum(self.split == s)) for s in SPLITS}
        return f"RbDataset(n={len(self)}, k={sorted(set(self.k.tolist()))[:3]}..., splits={counts})"

    def indices(self, split: str | None = None) -> np.ndarray:
        if split is None:
            return np.arange(len(self))
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return np.flatnonzero(self.split == split)

    def subset(self, idx) -> "RbDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return RbDataset(
            self.k[idx],
            [self.sequences[i] for i in idx],
            self.f[idx],
            self.split[idx],
            self.metadata,
        )

    def select(self, split: str | None) -> "RbDataset":
        return self.subset(self.indices(split))

    def xy(self, split: str | None = None):
        """``(sequences, outcomes)`` for one split, ready for an estimator."""
        idx = self.indices(split)
        return [self.sequences[i] for i in idx], self.f[idx]

    def depths(self) -> list[int]:
        return sorted(set(self.k.tolist()))

    # --- files ---------------------------------------------------------

    def to_jsonl(self) -> str:
        lines = [json.dumps({"metadata": self.metadata}, sort_keys=True)]
        for kk, seq, f, s in zip(self.k, self.sequences, self.f, self.split):
            lines.append(json.dumps({"k": int(kk), "seq": list(seq), "f": float(f), "split": s}))
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        atomic_write_text(path, self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "RbDataset":
        metadata = {}
        ks, seqs, fs, splits = [], [], [], []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            if "metadata" in row:
                metadata = row["metadata"]
                continue
            try:
                ks.append(int(row["k"]))
                seqs.append(row["seq"])
                fs.append(float(row["f"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"line {lineno}: malformed record ({exc})") from None
            splits.append(row.get("split"))
        return cls(ks, seqs, fs, splits, metadata)

    @classmethod
    def load(cls, path) -> "RbDataset":
        return cls.from_jsonl(Path(path).read_text())


def split_dataset(ds: RbDataset, train_fraction: float = 0.6, seed=0) -> RbDataset:
    """Stratified per-depth split into ``train`` and ``val`` records."""
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    split = np.array(["val"] * len(ds), dtype=object)
    base = [int(s) for s in np.atleast_1d(seed)]
    for k in ds.depths():
        idx = np.flatnonzero(ds.k == k)
        rng = np.random.default_rng(base + [k])
        order = rng.permutation(idx)
        n_train = int(round(train_fraction * len(idx)))
        split[order[:n_train]] = "train"
    meta = dict(ds.metadata, train_fraction=train_fraction, split_seed=base)
    return RbDataset(ds.k, ds.sequences, ds.f, split, meta)


def attach_prediction(ds: RbDataset, pred: RbDataset) -> RbDataset:
    """Append every record of ``pred`` to ``ds`` under the ``pred`` split."""
    meta = dict(ds.metadata)
    meta["pred_metadata"] = pred.metadata
    return RbDataset(
        np.concatenate([ds.k, pred.k]),
        ds.sequences + pred.sequences,
        np.concatenate([ds.f, pred.f]),
        list(ds.split) + ["pred"] * len(pred),
        meta,
    )
