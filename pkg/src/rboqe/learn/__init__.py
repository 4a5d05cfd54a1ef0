from .bfgs import BFGSResult, NonFiniteObjectiveError, bfgs_minimize
from .estimator import OQERegressor, TrainReport, chi_ramp, train
from .objective import Objective, loss, loss_gradient
from .parametrization import UnitaryParams, from_unitary, to_unitary

__all__ = [
    "BFGSResult",
    "NonFiniteObjectiveError",
    "OQERegressor",
    "Objective",
    "TrainReport",
    "UnitaryParams",
    "bfgs_minimize",
    "chi_ramp",
    "from_unitary",
    "loss",
    "loss_gradient",
    "to_unitary",
    "train",
]
