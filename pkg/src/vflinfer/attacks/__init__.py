"""Feature-inference attacks and their random-guess baselines."""

from .baselines import (
    baseline_gaussian,
    baseline_gaussian_batch,
    baseline_uniform,
    baseline_uniform_batch,
)
from .esa import EsaProblem, esa, esa_batch, esa_problem
from .grn import (
    GrnConfig,
    direct_regression_infer,
    direct_regression_infer_batch,
    grn_batch_loss_and_grads,
    grn_infer,
    grn_infer_batch,
    grn_train,
)
from .pra import (
    BranchConstraint,
    PraResult,
    constraint_matches,
    path_constraints,
    pra_candidates,
    pra_infer,
)
from .surrogate import (
    SurrogateConfig,
    default_num_dummy,
    distill_rf,
    forest_confidences,
    top_class_agreement,
)

__all__ = [
    "BranchConstraint",
    "EsaProblem",
    "GrnConfig",
    "PraResult",
    "SurrogateConfig",
    "baseline_gaussian",
    "baseline_gaussian_batch",
    "baseline_uniform",
    "baseline_uniform_batch",
    "constraint_matches",
    "default_num_dummy",
    "direct_regression_infer",
    "direct_regression_infer_batch",
    "distill_rf",
    "esa",
    "esa_batch",
    "esa_problem",
    "forest_confidences",
    "grn_batch_loss_and_grads",
    "grn_infer",
    "grn_infer_batch",
    "grn_train",
    "path_constraints",
    "pra_candidates",
    "pra_infer",
    "top_class_agreement",
]
