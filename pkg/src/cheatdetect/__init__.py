"""Collusion detection from binary test scores.

Fits a one-parameter logistic response model extended with pairwise
examinee couplings, recovers the coupling support either by decimation with
a tilted-pseudo-likelihood stopping rule or by an L1 baseline, and ships a
seeded experiment harness that emits CSV reports.
"""

from .model import (
    ModelParams,
    all_pairs,
    column_energy,
    column_log_prob_exact,
    column_probabilities_exact,
    conditional_prob,
    gauge_shift,
    pair_key,
    validate_score_matrix,
)
from .sampler import (
    GenerationConfig,
    exact_sample_column,
    generate_scores,
    generate_truth,
    gibbs_sample_column,
)
from .plm import (
    FitDivergedError,
    FitOptions,
    PLGradient,
    PriorConfig,
    plm_gradient,
    plm_maximize,
    pseudo_log_likelihood,
)
from .decimation import (
    DecimationStep,
    DecimationTrajectory,
    compute_anchors,
    run_decimation,
    select_decimation_set,
    tilted_pl,
)
from .l1 import (
    L1Record,
    L1SweepResult,
    default_lambda_grid,
    lambda_sweep,
    plm_l1_maximize,
    threshold_support,
)
from .metrics import (
    RecoveryMetrics,
    RocCurve,
    UndefinedMetricError,
    err_d,
    err_theta,
    err_w,
    roc_from_trajectory,
    tpr_tnr,
)

__version__ = "0.1.0"
