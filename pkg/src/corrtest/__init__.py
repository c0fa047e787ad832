"""Tests of general linear hypotheses about correlation matrices.

For independent groups of multivariate observations, the library tests
hypotheses of the form C r = zeta about the pooled vector r of
vectorized correlation matrices, using an ANOVA-type quadratic form with
Monte-Carlo, parametric-bootstrap, wild-bootstrap or second-order
Monte-Carlo critical values.  A combined multiple-contrast procedure
compares covariance and correlation matrices of two groups
simultaneously, and a simulation lab reproduces the reference type-I
error and power studies.
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .combined import (
    CombinedVerdict,
    ContrastStatistic,
    contrast_statistic,
    coordinate_labels,
    equicoordinate_test,
    taylor_combined_test,
)
from .errors import (
    ArgumentError,
    ConfigError,
    CorrTestError,
    DegenerateDataError,
    DegenerateHypothesisError,
    DimensionError,
    NumericalError,
    TransformDomainError,
)
from .estimators import (
    GroupSample,
    MomentSet,
    PooledMoments,
    m_transform,
    moment_set,
    pooled_moments,
    sample_moments,
    sigma_hat,
)
from .hypotheses import (
    HypothesisSpec,
    custom,
    equal_correlation_matrices,
    equal_correlations,
    given_correlation,
    identity_correlation,
)
from .matops import (
    Dims,
    IndexVectors,
    StructuralMatrices,
    centering_projector,
    direct_sum,
    index_vectors,
    structural,
    vech,
    vech_minus,
)
from .methods import METHODS, run_method
from .quadform import (
    TestReport,
    ats_statistic,
    fisherz_ats,
    limit_eigenvalues,
    mc_test,
    weighted_chisq_quantile,
)
from .resampling import (
    ResamplingConfig,
    TaylorContext,
    parametric_bootstrap_test,
    taylor_context,
    taylor_f,
    taylor_mc_test,
    wild_bootstrap_test,
)
from .simlab import (
    CovarianceSpec,
    DistributionSpec,
    SimScenario,
    draw_group,
    power_curve,
    scenario,
    type1_experiment,
)

__all__ = [
    "ArgumentError",
    "CombinedVerdict",
    "ConfigError",
    "ContrastStatistic",
    "CorrTestError",
    "CovarianceSpec",
    "DegenerateDataError",
    "DegenerateHypothesisError",
    "DimensionError",
    "Dims",
    "DistributionSpec",
    "GroupSample",
    "HypothesisSpec",
    "IndexVectors",
    "METHODS",
    "MomentSet",
    "NumericalError",
    "PooledMoments",
    "ResamplingConfig",
    "SimScenario",
    "StructuralMatrices",
    "TaylorContext",
    "TestReport",
    "TransformDomainError",
    "ats_statistic",
    "backend_name",
    "centering_projector",
    "contrast_statistic",
    "coordinate_labels",
    "custom",
    "direct_sum",
    "draw_group",
    "equal_correlation_matrices",
    "equal_correlations",
    "equicoordinate_test",
    "fisherz_ats",
    "given_correlation",
    "identity_correlation",
    "index_vectors",
    "limit_eigenvalues",
    "m_transform",
    "mc_test",
    "moment_set",
    "parametric_bootstrap_test",
    "pooled_moments",
    "power_curve",
    "run_method",
    "sample_moments",
    "scenario",
    "sigma_hat",
    "structural",
    "taylor_combined_test",
    "taylor_context",
    "taylor_f",
    "taylor_mc_test",
    "type1_experiment",
    "vech",
    "vech_minus",
    "weighted_chisq_quantile",
]
