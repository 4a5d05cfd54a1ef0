"""scikit-learn style estimator that learns a hidden OQE model from RB data."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_measurement, check_outcomes, check_sequences
from ..oqe import P0, OqeModel, batch_predict
from .bfgs import bfgs_minimize
from .objective import Objective, unitary_loss
from .parametrization import UnitaryParams, to_unitary


DEFAULT_DEPTH_SCHEDULE = (6, 8, 10, 12, 16, 20, 24, 32)


def _restart_rng(seed: int, chi: int, restart: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(chi), int(restart)])


def _stage_objectives(X, y, dim, measurement, schedule):
    """One objective per depth cap below the deepest record, then the full data."""
    lengths = np.array([len(s) for s in X])
    stages = []
    for cap in sorted(set(schedule or ())):
        sel = np.flatnonzero(lengths <= cap)
        if 0 < sel.size < len(X):
            stages.append(Objective([X[i] for i in sel], y[sel], dim, measurement))
    stages.append(Objective(X, y, dim, measurement))
    return stages


def _run_restart(stages, seed, chi, restart, max_iter, gtol):
    x = UnitaryParams.random(stages[-1].dim, _restart_rng(seed, chi, restart)).angles
    trace, n_iter = [], 0
    for obj in stages:
        res = bfgs_minimize(obj, x, max_iter=max_iter, gtol=gtol)
        x = res.x
        trace.extend(res.trace)
        n_iter += res.n_iter
    res.trace, res.n_iter = trace, n_iter
    return res


class OQERegressor(RegressorMixin, BaseEstimator):
    """Fit the system-memory unitary of an OQE model to RB survival data.

    ``X`` is a list of Clifford-index sequences (ragged), ``y`` the measured
    outcomes. Each restart draws mesh angles uniformly in ``[0, 2 pi)`` and
    runs BFGS on the mean-square loss; the lowest final loss wins.

    With a ``depth_schedule``, each restart first fits only the records with
    depth ``<= cap`` for every cap in turn, warm-starting the next stage, and
    finishes on all records. Deep sequences raise ``U`` to high powers, which
    makes the full loss landscape rugged; the shallow stages land the
    parameters in the right basin. ``depth_schedule=None`` fits all records
    from the random start.

    Parameters
    ----------
    chi : int
        Memory dimension.
    n_restarts : int
        Independent random initializations.
    max_iter : int
        BFGS iteration cap per stage.
    gtol : float
        Gradient-norm stopping tolerance.
    measurement : array (2, 2), optional
        Measured POVM element, ``|0><0|`` by default.
    random_state : int
        Seed; restart ``r`` uses the stream ``(random_state, chi, r)``.
    n_jobs : int, optional
        Restarts run in parallel through joblib. Results do not depend on it.
    depth_schedule : sequence of int, optional
        Increasing depth caps for the warm-started stages.

    Attributes
    ----------
    model_ : OqeModel
    params_ : UnitaryParams
    loss_ : float
        Training loss of the selected restart.
    restart_losses_ : list of float
    loss_curves_ : list of list of float
    n_iter_ : list of int
    status_ : list of str
    """

    def __init__(
        self,
        chi: int = 2,
        n_restarts: int = 5,
        max_iter: int = 200,
        gtol: float = 1e-9,
        measurement=None,
        random_state: int = 0,
        n_jobs: int | None = None,
        depth_schedule=DEFAULT_DEPTH_SCHEDULE,
    ):
        self.chi = chi
        self.n_restarts = n_restarts
        self.max_iter = max_iter
        self.gtol = gtol
        self.measurement = measurement
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.depth_schedule = depth_schedule

    def _measurement(self):
        return P0 if self.measurement is None else check_measurement(self.measurement)

    def fit(self, X, y):
        if int(self.chi) < 1:
            raise ValueError(f"chi must be >= 1, got {self.chi}")
        if int(self.n_restarts) < 1:
            raise ValueError("n_restarts must be >= 1")
        batch = check_sequences(X)
        y = check_outcomes(y, len(batch))
        dim = 2 * int(self.chi)
        X = [batch.gates[r, : batch.lengths[r]] for r in np.argsort(batch.order)]
        stages = _stage_objectives(X, y, dim, self._measurement(), self.depth_schedule)
        seed = 0 if self.random_state is None else int(self.random_state)
        jobs = [
            delayed(_run_restart)(stages, seed, self.chi, r, self.max_iter, self.gtol)
            for r in range(self.n_restarts)
        ]
        if self.n_jobs in (None, 1):
            results = [fn(*args, **kw) for fn, args, kw in jobs]
        else:
            results = Parallel(n_jobs=self.n_jobs)(jobs)
        losses = [r.fun for r in results]
        best = int(np.argmin(losses))
        self.params_ = UnitaryParams(dim, results[best].x)
        self.model_ = OqeModel(to_unitary(results[best].x, dim), self._measurement())
        self.loss_ = float(losses[best])
        self.best_restart_ = best
        self.restart_losses_ = [float(v) for v in losses]
        self.loss_curves_ = [[float(v) for v in r.trace] for r in results]
        self.n_iter_ = [r.n_iter for r in results]
        self.status_ = [r.status for r in results]
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        batch = check_sequences(X)
        return batch.unsort(batch_predict(self.model_.unitary, batch, self.model_.measurement))

    def loss(self, X, y) -> float:
        """Mean-square loss of the fitted model on ``(X, y)``."""
        check_is_fitted(self, "model_")
        batch = check_sequences(X)
        y = check_outcomes(y, len(batch))
        return unitary_loss(self.model_.unitary, batch, batch.sort(y), self.model_.measurement)


@dataclass
class TrainReport:
    model: OqeModel
    chi: int
    seed: int
    restart_losses: list[float]
    loss_curves: list[list[float]]
    n_iter: list[int]
    status: list[str]
    train_loss: float
    val_loss: float | None = None
    pred_loss: float | None = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def best_loss(self) -> float:
        return min(self.restart_losses)

    def to_dict(self) -> dict:
        # wall time is left out so identical runs serialize identically
        return {
            "chi": self.chi,
            "seed": self.seed,
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "pred_loss": self.pred_loss,
            "restart_losses": self.restart_losses,
            "n_iter": self.n_iter,
            "status": self.status,
            "loss_curves": self.loss_curves,
        }


def _split_loss(est: OQERegressor, ds, split):
    X, y = ds.xy(split)
    return est.loss(X, y) if X else None


def train(
    ds,
    chi: int,
    restarts: int = 5,
    seed: int = 0,
    max_iter: int = 200,
    gtol: float = 1e-9,
    n_jobs=None,
    depth_schedule=DEFAULT_DEPTH_SCHEDULE,
) -> TrainReport:
    """Fit on the ``train`` split and report losses on every non-empty split."""
    X, y = ds.xy("train")
    if not X:
        raise ValueError("dataset has no train split; call split_dataset first")
    start = time.perf_counter()
    est = OQERegressor(
        chi=chi,
        n_restarts=restarts,
        max_iter=max_iter,
        gtol=gtol,
        random_state=seed,
        n_jobs=n_jobs,
        depth_schedule=depth_schedule,
    )
    est.fit(X, y)
    return TrainReport(
        model=est.model_,
        chi=chi,
        seed=seed,
        restart_losses=est.restart_losses_,
        loss_curves=est.loss_curves_,
        n_iter=est.n_iter_,
        status=est.status_,
        train_loss=est.loss_,
        val_loss=_split_loss(est, ds, "val"),
        pred_loss=_split_loss(est, ds, "pred"),
        wall_time=time.perf_counter() - start,
    )


def chi_ramp(ds, chi_max: int = 6, restarts: int = 5, seed: int = 0, **kwargs) -> list[TrainReport]:
    """Independent :func:`train` runs for ``chi = 1 .. chi_max``."""
    if chi_max < 1:
        raise ValueError("chi_max must be >= 1")
    return [train(ds, chi, restarts=restarts, seed=seed, **kwargs) for chi in range(1, chi_max + 1)]
