"""Feature-inference attacks on vertically partitioned tabular classifiers.

The library trains four model families over a vertical feature split,
runs three inference attacks against their released confidence scores
(equality solving, path restriction, generative regression), applies
rounding/dropout defenses, and scores everything with per-feature MSE,
correct-branching rate, and an analytic error ceiling.
"""

from .data import Dataset, NormStats, SynthConfig
from .errors import (
    AttackInfeasibleError,
    ConfigError,
    DegenerateProblemError,
    InputError,
    NumericError,
    ParseError,
    ShapeError,
    VflinferError,
)
from .linalg import Rng, derive_seed, logit, matmul, pinv, sigmoid, softmax
from .metrics import AttackScore, cbr, corr_adv, corr_v, mse_per_feature, mse_upper_bound, pearson
from .partition import VerticalPartition, sample_partition

__version__ = "0.1.0"

__all__ = [
    "AttackInfeasibleError",
    "AttackScore",
    "ConfigError",
    "Dataset",
    "DegenerateProblemError",
    "InputError",
    "NormStats",
    "NumericError",
    "ParseError",
    "Rng",
    "ShapeError",
    "SynthConfig",
    "VerticalPartition",
    "VflinferError",
    "cbr",
    "corr_adv",
    "corr_v",
    "derive_seed",
    "logit",
    "matmul",
    "mse_per_feature",
    "mse_upper_bound",
    "pearson",
    "pinv",
    "sample_partition",
    "sigmoid",
    "softmax",
    "__version__",
]
