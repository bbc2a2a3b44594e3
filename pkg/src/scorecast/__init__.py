"""scorecast: collaborative completion of sparse model-benchmark score
matrices, with sigmoidal scaling-curve baselines, rank metrics, exact
Shapley factor attribution, and a reproducible experiment harness."""

__version__ = "0.1.0"

from .dataset import (  # noqa: F401
    ModelRecord,
    ScoreMatrix,
    SplitSpec,
    TaskRecord,
    load_bundled,
    load_model_factors,
    load_scores,
    load_task_factors,
    mask_to_sparsity,
    split,
)
from .metrics import EvalReport, derive_ranks, rank_metrics, score_losses  # noqa: F401
from .mf import MFModel, TrainConfig, init_mf, train_mf  # noqa: F401
from .ncf import NCFModel, encode_factors, forward, predict_ncf, train_ncf  # noqa: F401
from .scaling import ScalingCurve, fit_curve, predict_curve, scaling_predict_for_model  # noqa: F401
from .shapley import ShapleyReport, exact_shapley, mask_factor, value_function  # noqa: F401
