"""Tail-risk measurement toolkit."""

__version__ = "0.1.0"

from .errors import (
    DegenerateTailWarning,
    DomainError,
    InsufficientDataError,
    InsufficientTailError,
    InvalidParameterError,
    MalformedInputError,
    RiskError,
)
from .measures import (
    DescriptiveStats,
    ReturnSeries,
    RiskConfig,
    RiskReport,
    descriptive_stats,
    es_hs,
    log_returns,
    sd_hs,
    sdr_hs,
    var_hs,
)
from .simulation import (
    SCENARIO_NAMES,
    GarchParams,
    ScenarioSpec,
    SimState,
    path_from_innovations,
    replicate_seed,
    scenario_params,
    simulate_path,
    standardized_innovation,
    student_scale,
)
from .axioms import (
    AxiomEntry,
    AxiomReport,
    CheckConfig,
    Density,
    acceptance_identity,
    check_coherence,
    check_deviation,
    check_ordering_and_parameters,
    dilation_check,
    es_dual_lp,
    es_dual_weights,
    random_densities,
    sd_envelope_bound,
)
from .experiments import (
    MEASURE_ORDER,
    CurveTable,
    MeasureRow,
    ReplicationSpec,
    RollingResult,
    SummaryTable,
    SurfaceGrid,
    alpha_beta_surface,
    measure_curves,
    rolling_measures,
    run_replication,
)
from .io import read_series, read_series_labeled
