"""Unsupervised performance estimation for OOD detectors.

Fits two-component models to a test set's OOD-score distribution, turns
the fit into a scalar separability (Gscore), and maps Gscore to detector
performance (FPR@TPR, AUROC, detection error, AUPR) with a regression
trained on a labeled meta-suite.
"""

from ._backend import BACKEND
from .errors import (
    ConfigError,
    DegenerateError,
    FormatVersionError,
    GenerationError,
    IllConditionedError,
    InputError,
    LeakageError,
    MetricError,
    ParseError,
    ToolkitError,
    UndefinedStatError,
)
from .fitting import (
    DEFAULT_VAL_SIZE,
    SIGMA_FLOOR,
    GaussianParams,
    TwoComponentFit,
    fit_gmm2,
    fit_kmeans2,
    fit_ude,
    fit_val_gaussian,
    ude_lower_bound,
    ude_membership,
)
from .gscore import (
    GscoreConfig,
    compute_gscore,
    compute_gscore_fit,
    kl_distance,
    l2_distance,
    wasserstein_distance,
)
from .regression import (
    MetaSuite,
    RegressionModel,
    evaluate_suite,
    fit_regression,
    load_model,
    predict,
    save_model,
    train_on_suite,
    tune_tau,
)
from .scores import (
    LogitRow,
    MetricReport,
    ScoreSet,
    SetRecord,
    TargetMetric,
    aupr,
    auroc,
    detection_error,
    detector_score,
    detector_scores,
    fpr_at_tpr,
    pearson,
    rmse,
    spearman,
)
from .synth import (
    SuiteSpec,
    SynthSpec,
    downsample_set,
    gaussian_auroc,
    gen_score_set,
    gen_suite,
    gen_val_scores,
    plan_suite,
    ratio_size_sweep,
    splitmix64,
)

__version__ = "0.1.0"
