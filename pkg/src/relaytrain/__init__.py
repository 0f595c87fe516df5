"""Training-based achievable rates for three-node fading relay links."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .estimation import (
    Estimator,
    EstimationProfile,
    NumericalAccuracyError,
    RelayNetworkSpec,
    TrainingConfig,
    alias_free_error_variance,
    build_profile,
    single_pilot_error_variance,
    single_pilot_error_variance_at,
    single_pilot_gain,
    wiener_error_variance,
)
from .fading import (
    FadingProcess,
    GaussMarkov,
    Lowpass,
    autocorrelation,
    psd,
    sample_path,
    spectrum_integral,
    undersampled_psd,
)
from .optimize import (
    AllocationResult,
    BitEnergy,
    CollapseMode,
    OptimizationConfig,
    SnrDefinition,
    TrainingSweep,
    bit_energy,
    optimize_allocation,
    optimize_training,
    project_simplex,
    uniform_allocation,
)
from .rates import (
    GaussLaguerre,
    MonteCarlo,
    PowerAllocation,
    Protocol,
    RateResult,
    Scheme,
    SchemeSelector,
    SnrTerms,
    effective_noise_variances,
    evaluate_rate,
    evaluate_rate_for_profile,
    kernel_f,
    kernel_q,
    per_slot_rate,
)
from .simulate import SimReport, empirical_single_pilot, empirical_wiener

__version__ = "0.1.0"

__all__ = [
    "AllocationResult",
    "BitEnergy",
    "CollapseMode",
    "ConfigError",
    "Estimator",
    "EstimationProfile",
    "ExperimentConfig",
    "FadingProcess",
    "GaussLaguerre",
    "GaussMarkov",
    "Lowpass",
    "MonteCarlo",
    "NumericalAccuracyError",
    "OptimizationConfig",
    "PowerAllocation",
    "Protocol",
    "RateResult",
    "RelayNetworkSpec",
    "Scheme",
    "SchemeSelector",
    "SimReport",
    "SnrDefinition",
    "SnrTerms",
    "TrainingConfig",
    "TrainingSweep",
    "alias_free_error_variance",
    "autocorrelation",
    "bit_energy",
    "build_profile",
    "effective_noise_variances",
    "empirical_single_pilot",
    "empirical_wiener",
    "evaluate_rate",
    "evaluate_rate_for_profile",
    "kernel_f",
    "kernel_q",
    "load_config",
    "optimize_allocation",
    "optimize_training",
    "parse_config",
    "per_slot_rate",
    "project_simplex",
    "psd",
    "sample_path",
    "single_pilot_error_variance",
    "single_pilot_error_variance_at",
    "single_pilot_gain",
    "spectrum_integral",
    "undersampled_psd",
    "uniform_allocation",
    "wiener_error_variance",
]
