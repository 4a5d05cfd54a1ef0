"""Learning open-quantum-evolution models from randomized benchmarking data."""

from .clifford import clifford_group, compose, inverse, sample_rb_sequence, undo_gate
from .dataset import RbDataset, attach_prediction, split_dataset
from .learn import OQERegressor, train
from .nonmarkov import (
    confusion_probability,
    markov_marginal,
    markov_process_tensor,
    memory_complexity,
    mutual_information,
    nonmarkovianity_dense,
    osee_nonmarkovianity,
    relative_entropy_dense,
)
from .oqe import OqeModel, predict
from .process_tensor import build_ppt, build_pt, contract_with_sequence, dense_pt, vectorize_pt
from .simulator import TwoQubitModel, gamma_eff, generate_dataset

__all__ = [
    "OQERegressor",
    "OqeModel",
    "RbDataset",
    "TwoQubitModel",
    "attach_prediction",
    "build_ppt",
    "build_pt",
    "clifford_group",
    "compose",
    "confusion_probability",
    "contract_with_sequence",
    "dense_pt",
    "gamma_eff",
    "generate_dataset",
    "inverse",
    "markov_marginal",
    "markov_process_tensor",
    "memory_complexity",
    "mutual_information",
    "nonmarkovianity_dense",
    "osee_nonmarkovianity",
    "predict",
    "relative_entropy_dense",
    "sample_rb_sequence",
    "split_dataset",
    "train",
    "undo_gate",
    "vectorize_pt",
]
