"""RB curve averages, exponential decay fits and coupling-sweep tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .simulator import gamma_eff

FIT_XTOL = 1e-10
DEGENERATE_PTP = 1e-12


@dataclass(frozen=True)
class CurvePoint:
    k: int
    mean: float
    stderr: float
    n: int


def average_curve(ds, split: str | None = None) -> list[CurvePoint]:
    """Per-depth mean outcome and standard error (sample std over ``sqrt(n)``)."""
    idx = ds.indices(split)
    if len(idx) == 0:
        raise ValueError(f"split {split!r} is empty")
    k = np.asarray(ds.k)[idx]
    f = np.asarray(ds.f, dtype=float)[idx]
    out = []
    for depth in np.unique(k):
        vals = f[k == depth]
        se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        out.append(CurvePoint(int(depth), float(vals.mean()), se, int(vals.size)))
    return out


@dataclass(frozen=True)
class DecayFit:
    a: float
    p: float
    b: float
    residual_rms: float
    r_squared: float
    degenerate: bool = False

    @property
    def physical(self) -> bool:
        return 0.0 < self.p <= 1.0

    def __call__(self, k):
        return self.a * np.power(self.p, np.asarray(k, dtype=float)) + self.b


def _as_xy(curve):
    if isinstance(curve, tuple) and len(curve) == 2:
        k, f = curve
    else:
        pts = list(curve)
        if pts and isinstance(pts[0], CurvePoint):
            k, f = [p.k for p in pts], [p.mean for p in pts]
        else:
            k, f = [p[0] for p in pts], [p[1] for p in pts]
    return np.asarray(k, dtype=float), np.asarray(f, dtype=float)


def _initial_guess(k, f):
    b0 = float(f.min())
    dk = np.diff(k)
    df = np.diff(f)
    ratios = []
    for i in range(len(df) - 1):
        if df[i] != 0 and df[i + 1] / df[i] > 0:
            ratios.append((df[i + 1] / df[i]) ** (1.0 / dk[i + 1]))
    p0 = float(np.median(ratios)) if ratios else 0.9
    p0 = min(max(p0, 1e-3), 1.0 - 1e-9)
    a0 = float((f[0] - b0) / p0 ** k[0])
    if a0 == 0:
        a0 = float(f[0] - f[-1]) or 1e-3
    return np.array([a0, p0, b0])


def fit_exponential(curve) -> DecayFit:
    """Least-squares fit of ``F_k = a p^k + b``.

    ``curve`` is a list of :class:`CurvePoint`, of ``(k, F, ...)`` tuples, or a
    pair of arrays ``(k, F)``.
    """
    k, f = _as_xy(curve)
    if k.size < 4:
        raise ValueError(f"need at least 4 points, got {k.size}")
    if np.ptp(f) < DEGENERATE_PTP:
        return DecayFit(0.0, 1.0, float(f.mean()), float(np.sqrt(np.mean((f - f.mean()) ** 2))), 1.0, True)

    def resid(x):
        return x[0] * x[1] ** k + x[2] - f

    def jac(x):
        pk = x[1] ** k
        return np.column_stack([pk, x[0] * k * x[1] ** (k - 1), np.ones_like(k)])

    sol = least_squares(resid, _initial_guess(k, f), jac=jac, method="lm", xtol=FIT_XTOL, ftol=1e-15, gtol=1e-15)
    a, p, b = (float(v) for v in sol.x)
    r = resid(sol.x)
    ss_tot = float(np.sum((f - f.mean()) ** 2))
    return DecayFit(a, p, b, float(np.sqrt(np.mean(r * r))), 1.0 - float(r @ r) / ss_tot)


def overlay_rows(ds, model=None, split: str | None = None) -> list[dict]:
    """Rows of ``k, F_k, F~_k, stderr``; ``F~_k`` averages the model over the same sequences."""
    from .oqe import predict_average

    rows = []
    idx = ds.indices(split)
    k = np.asarray(ds.k)
    for pt in average_curve(ds, split) if len(idx) else []:
        row = {"k": pt.k, "F_k": pt.mean, "F_tilde_k": None, "stderr": pt.stderr}
        if model is not None:
            seqs = [ds.sequences[i] for i in idx if k[i] == pt.k]
            row["F_tilde_k"] = float(predict_average(model, seqs))
        rows.append(row)
    return rows


def sweep_report(entries) -> list[dict]:
    """Rows ``delta_h, J, gamma_eff, chi, train/val/pred loss`` from ``(truth, report)`` pairs.

    ``truth`` is the ground-truth :class:`~rboqe.simulator.TwoQubitModel`;
    ``report`` anything with ``chi`` and ``*_loss`` attributes.
    """
    rows = []
    for truth, rep in entries:
        dh = truth.delta_h
        rows.append(
            {
                "delta_h": dh,
                "J": truth.J,
                "gamma_eff": gamma_eff(truth.J, dh) if dh != 0 else math.inf,
                "delta_h_over_gamma_eff": dh / gamma_eff(truth.J, dh) if dh != 0 else 0.0,
                "chi": rep.chi,
                "train_loss": rep.train_loss,
                "val_loss": rep.val_loss,
                "pred_loss": rep.pred_loss,
            }
        )
    rows.sort(key=lambda r: (r["delta_h"], r["chi"]))
    return rows


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c]) for c in columns])
    return buf.getvalue()
