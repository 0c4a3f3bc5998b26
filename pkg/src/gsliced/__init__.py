"""Gaussian-smoothed sliced divergences between empirical distributions."""

from .divergences import (
    DivergenceError,
    DivergenceKind,
    DivergenceSpec,
    base_divergence,
    divergence_power,
    mmd_1d,
    sinkhorn_divergence_1d,
    wasserstein_1d,
)
from .entropic import SinkhornConvergenceWarning, entropic_ot_1d
from .estimator import (
    EstimateReport,
    EstimationError,
    SmoothedSliceConfig,
    analytic_gsswd_gaussian,
    estimate_gssd,
    estimate_variance_A2,
    two_level_constant,
)
from .experiments import SweepPlan, SweepResult, __version__, fit_loglog_slope, run_sweep
from .sampling import DatasetError, RngStream, SampleSet, gen_gaussian, load_csv, sample_sphere

__all__ = [
    "DatasetError", "DivergenceError", "DivergenceKind", "DivergenceSpec", "EstimateReport",
    "EstimationError", "RngStream", "SampleSet", "SinkhornConvergenceWarning",
    "SmoothedSliceConfig", "SweepPlan", "SweepResult", "analytic_gsswd_gaussian",
    "base_divergence", "divergence_power", "entropic_ot_1d", "estimate_gssd",
    "estimate_variance_A2", "fit_loglog_slope", "gen_gaussian", "load_csv", "mmd_1d",
    "run_sweep", "sample_sphere", "sinkhorn_divergence_1d", "two_level_constant",
    "wasserstein_1d", "__version__",
]
