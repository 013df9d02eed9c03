"""Grover search in two-amplitude form with per-step Gaussian noise.

Exact kernel, noise injection, breaking-noise ladder searches with
zero-step-size extrapolation, scaling fits, and the iterated-search
break-even analysis, plus a CLI that persists everything as CSV.
"""

from .errors import (
    ConfigError,
    DegenerateStateError,
    FitBoundaryError,
    FitDomainError,
    FitError,
    FitRankError,
    NoisyGroverError,
    OracleSizeError,
    SigmaCeilingError,
)
from .fitting import (
    ExtrapolationFit,
    LinearFit,
    PowerLawFit,
    WeightedPoint,
    average_exponent,
    fit_linear,
    fit_power_law,
    fit_shifted_power,
)
from .kernel import (
    AmplitudePair,
    ProblemSize,
    RotationAngles,
    amplitude_closed_form,
    angles,
    exact_step,
    full_matrix_oracle,
    initial_state,
    m_max,
    success_probability,
)
from .ladder import (
    LadderConfig,
    LadderRun,
    SigmaMaxStat,
    cell_master_seed,
    extrapolate_to_zero_step,
    run_seed,
    sigma_max_averaged,
    sigma_max_runs,
    sigma_max_single_run,
    stat_from_runs,
    trajectory_curve,
    trajectory_success_probability,
)
from .noise import (
    DEFAULT_CONVENTION,
    NoiseConvention,
    NoiseSample,
    NoiseSpec,
    RandomStream,
    noisy_step,
    renormalize,
    sample_noise,
    sample_noise_block,
)
from .iterated import (
    BreakevenRow,
    IteratedParams,
    build_breakeven_table,
    iterated_params,
    min_p_cut,
    repetition_count,
)
from .experiment import ExperimentConfig, RunRecord

__version__ = "0.1.0"

__all__ = [
    "AmplitudePair",
    "BreakevenRow",
    "ConfigError",
    "DEFAULT_CONVENTION",
    "DegenerateStateError",
    "ExperimentConfig",
    "ExtrapolationFit",
    "FitBoundaryError",
    "FitDomainError",
    "FitError",
    "FitRankError",
    "IteratedParams",
    "LadderConfig",
    "LadderRun",
    "LinearFit",
    "NoiseConvention",
    "NoiseSample",
    "NoiseSpec",
    "NoisyGroverError",
    "OracleSizeError",
    "PowerLawFit",
    "ProblemSize",
    "RandomStream",
    "RotationAngles",
    "RunRecord",
    "SigmaCeilingError",
    "SigmaMaxStat",
    "WeightedPoint",
    "amplitude_closed_form",
    "angles",
    "average_exponent",
    "build_breakeven_table",
    "cell_master_seed",
    "exact_step",
    "extrapolate_to_zero_step",
    "fit_linear",
    "fit_power_law",
    "fit_shifted_power",
    "full_matrix_oracle",
    "initial_state",
    "iterated_params",
    "m_max",
    "min_p_cut",
    "noisy_step",
    "renormalize",
    "repetition_count",
    "run_seed",
    "sample_noise",
    "sample_noise_block",
    "sigma_max_averaged",
    "sigma_max_runs",
    "sigma_max_single_run",
    "stat_from_runs",
    "success_probability",
    "trajectory_curve",
    "trajectory_success_probability",
]
