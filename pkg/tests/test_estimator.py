import numpy as np
import pytest
from sklearn.base import clone

from rboqe.dataset import split_dataset
from rboqe.learn import OQERegressor, chi_ramp, train
from rboqe.simulator import TwoQubitModel, generate_dataset


@pytest.fixture(scope="module")
def decoupled():
    return split_dataset(generate_dataset(TwoQubitModel(J=0.0), range(2, 8), 6, seed=0), 0.5, seed=1)


@pytest.fixture(scope="module")
def coupled():
    m = TwoQubitModel.from_detuning(11.3, 40.0, fixed_duration=True)
    return split_dataset(generate_dataset(m, range(2, 9), 8, seed=0), 0.6, seed=1)


def test_sklearn_params_and_clone():
    est = OQERegressor(chi=3, n_restarts=2, depth_schedule=(4,))
    assert est.get_params()["chi"] == 3
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert not hasattr(twin, "model_")


def test_chi1_learns_decoupled_data(decoupled):
    X, y = decoupled.xy("train")
    # single restarts can stall in rotation-like local minima
    est = OQERegressor(chi=1, n_restarts=3, random_state=0).fit(X, y)
    assert est.loss_ < 1e-10
    assert max(est.restart_losses_) > 0.1
    Xv, yv = decoupled.xy("val")
    assert est.loss(Xv, yv) < 1e-10
    np.testing.assert_allclose(est.predict(Xv), 1.0, atol=1e-5)


def test_fit_is_deterministic(coupled):
    X, y = coupled.xy("train")
    a = OQERegressor(chi=2, n_restarts=2, max_iter=30, random_state=7).fit(X, y)
    b = OQERegressor(chi=2, n_restarts=2, max_iter=30, random_state=7).fit(X, y)
    assert a.restart_losses_ == b.restart_losses_
    np.testing.assert_array_equal(a.model_.unitary, b.model_.unitary)


def test_parallel_restarts_match_serial(coupled):
    X, y = coupled.xy("train")
    serial = OQERegressor(chi=2, n_restarts=2, max_iter=20, n_jobs=1).fit(X, y)
    parallel = OQERegressor(chi=2, n_restarts=2, max_iter=20, n_jobs=2).fit(X, y)
    assert serial.restart_losses_ == parallel.restart_losses_


def test_best_restart_is_lowest(coupled):
    X, y = coupled.xy("train")
    est = OQERegressor(chi=2, n_restarts=3, max_iter=25, depth_schedule=None).fit(X, y)
    assert est.loss_ == min(est.restart_losses_)
    assert est.loss(X, y) == pytest.approx(est.loss_, rel=1e-10, abs=1e-24)
    for curve in est.loss_curves_:
        assert np.all(np.diff(curve) <= 1e-15)


def test_predict_requires_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        OQERegressor().predict([[0, 0]])


def test_rejects_bad_chi(decoupled):
    X, y = decoupled.xy("train")
    with pytest.raises(ValueError):
        OQERegressor(chi=0).fit(X, y)


def test_train_reports_every_split(decoupled):
    report = train(decoupled, 1, restarts=3)
    assert report.val_loss < 1e-10
    assert report.pred_loss is None
    assert "wall_time" not in report.to_dict()


def test_chi_ramp_length(decoupled):
    reports = chi_ramp(decoupled, chi_max=2, restarts=1, max_iter=10)
    assert [r.chi for r in reports] == [1, 2]
    with pytest.raises(ValueError):
        chi_ramp(decoupled, chi_max=0)


def test_train_without_split_rejected():
    ds = generate_dataset(TwoQubitModel(J=0.0), [2], 2)
    with pytest.raises(ValueError):
        train(ds, 1)
