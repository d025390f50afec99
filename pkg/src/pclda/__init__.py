"""Principal-component linear discriminant classification.

Fits linear discriminant rules for high-dimensional features that follow a
latent factor structure: project onto a low-dimensional basis (typically
the leading principal components of the training or an auxiliary matrix),
regress the labels on the projected features, and correct the intercept for
class imbalance.  Includes the population quantities of the factor model
(separations, Bayes risks, SNR diagnostics), data-driven rank selection,
cross-fitted and multi-class variants, and a Monte Carlo experiment driver.
"""

from .errors import (
    DataFormatError,
    DegenerateLabelsError,
    NumericalError,
    RankDeficiencyError,
    ShapeError,
)
from .numerics import SvdResult, as_matrix, center_columns, min_norm_lstsq, thin_svd
from .model import (
    FactorModelParams,
    OracleRule,
    PopulationSummary,
    SnrDiagnostics,
    bayes_risk_x,
    bayes_risk_z,
    delta_x,
    load_params,
    mahalanobis_delta,
    oracle_ls_fit,
    oracle_rules,
    population_summary,
    risk_gap,
    save_params,
    snr_diagnostics,
)
from .projection import (
    KSelection,
    Projection,
    ProjectionSpec,
    principal_component_basis,
    resolve_projection,
    select_k,
)
from .classifier import (
    BinaryFit,
    MulticlassFit,
    decision_value,
    fit_binary,
    fit_crossfit,
    fit_multiclass,
    fit_with_auxiliary,
    load_fit,
    multiclass_scores,
    predict,
    predict_multiclass,
    predict_multiclass_averaged,
    save_fit,
)
from .simulation import (
    METHODS,
    ExperimentGrid,
    GeneratorConfig,
    RiskReport,
    RiskRow,
    gen_params,
    misclassification_rate,
    run_grid,
    sample_dataset,
)

__version__ = "0.1.0"
