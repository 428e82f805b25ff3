"""Model-independent prediction-quality assessment for surrogate models.

Train polynomial / Moving Least Squares / Kriging surrogates on tabular
simulation data, estimate their prognosis quality via cross-validation (CoP),
attach bootstrap confidence bounds and local error fields, scale Sobol
sensitivities by the CoP, and let a model/subspace competition pick the best
metamodel. Field outputs on a shared grid get stationary CoD/CoP variants.
"""

from .bootstrap import (
    BootstrapDistribution,
    ConfidenceInterval,
    bootstrap_residuals,
    confidence_interval,
)
from .crossval import CvResult, FoldAssignment, assign_folds, k_fold_cv, loo_cv
from .errors import (
    ArgumentError,
    BoundsError,
    CompetitionError,
    ConditioningError,
    DataError,
    DegenerateOutputError,
    DimensionError,
    ExtrapolationWarning,
    IsolationError,
    NumericError,
    PrognosisError,
    SingularFitError,
    StudyError,
    UnknownBenchmarkError,
)
from .experiments import RunRecord, StudyConfig, StudyResult, run_study
from .field import (
    FieldCvResult,
    FieldDataset,
    FieldQualityReport,
    field_cross_validate,
    field_report,
)
from .mop import LeaderboardEntry, MopResult, run_competition, subspace_sequence
from .quality import (
    LocalErrorField,
    QualityReport,
    compute_report,
    delta_sse,
    local_cop,
    local_error_field,
    local_rmse,
    sample_cop,
)
from .sampling import (
    Benchmark,
    Bounds,
    DesignMatrix,
    OutputVector,
    benchmark_names,
    eval_benchmark,
    get_benchmark,
    improve_lhs,
    lhs_sample,
    uniform_bounds,
)
from .sensitivity import (
    SaltelliBundle,
    SensitivityResult,
    saltelli_design,
    scale_by_cop,
    sobol_indices,
)
from .surrogate import ModelSpec, TrainedSurrogate, predict, train

__version__ = "0.1.0"
