"""State estimation for continuous-discrete nonlinear stochastic systems.

Models are SDEs ``dx = f dt + sigma domega`` observed through noisy
discrete samples.  The package bundles four filters over one shared model
abstraction — an extended and an unscented Kalman filter, a stochastic
ensemble Kalman filter, and a bootstrap particle filter — plus a truth
simulator, a quadruple-tank benchmark process, and a CLI that reproduces
the accuracy/run-time comparison on it.
"""

from .bench import (
    BenchSummary,
    FilterSummary,
    FilterTrace,
    RunRecord,
    emit_csv,
    mape,
    read_record_csv,
    read_truth_csv,
    run_benchmark,
    run_filters,
    run_many,
    simulate_truth,
    write_outputs,
    write_truth_csv,
)
from .config import FILTER_NAMES, BenchConfig, parse_config, parse_config_text
from .ekf import EkfState, ekf_measurement_update, ekf_time_update
from .enkf import (
    enkf_init,
    enkf_measurement_update,
    enkf_time_update,
    ensemble_mean_cov,
)
from .errors import (
    AllWeightsZero,
    CdfiltError,
    ConfigError,
    DegenerateScaling,
    DimensionMismatch,
    DivisionByZeroTruth,
    NonFiniteState,
    NotPositiveDefinite,
    OutOfRange,
    SingularAtEmptyTank,
    WeightSumMismatch,
)
from .fourtank import THETA_INDEX, FourTankParams, four_tank_model, steady_state
from .integrate import euler_maruyama_step, rk4_step
from .models import (
    GaussianBelief,
    Model,
    NoiseSpec,
    SignalProfile,
    check_jacobians,
    fd_jacobian,
)
from .pf import (
    effective_sample_size,
    pf_estimate,
    pf_init,
    pf_likelihood_weights,
    pf_time_update,
    systematic_resample,
)
from .rng import RngStream, named_stream
from .simulate import SimConfig, TruthRecord, sample_initial_state, simulate
from .ukf import UkfParams, UkfState, ukf_measurement_update, ukf_time_update

__version__ = "0.1.0"

__all__ = [
    "AllWeightsZero",
    "BenchConfig",
    "BenchSummary",
    "CdfiltError",
    "ConfigError",
    "DegenerateScaling",
    "DimensionMismatch",
    "DivisionByZeroTruth",
    "EkfState",
    "FILTER_NAMES",
    "FilterSummary",
    "FilterTrace",
    "FourTankParams",
    "GaussianBelief",
    "Model",
    "NoiseSpec",
    "NonFiniteState",
    "NotPositiveDefinite",
    "OutOfRange",
    "RngStream",
    "RunRecord",
    "SignalProfile",
    "SimConfig",
    "SingularAtEmptyTank",
    "THETA_INDEX",
    "TruthRecord",
    "UkfParams",
    "UkfState",
    "WeightSumMismatch",
    "check_jacobians",
    "effective_sample_size",
    "ekf_measurement_update",
    "ekf_time_update",
    "emit_csv",
    "enkf_init",
    "enkf_measurement_update",
    "enkf_time_update",
    "ensemble_mean_cov",
    "euler_maruyama_step",
    "fd_jacobian",
    "four_tank_model",
    "mape",
    "named_stream",
    "parse_config",
    "parse_config_text",
    "pf_estimate",
    "pf_init",
    "pf_likelihood_weights",
    "pf_time_update",
    "read_record_csv",
    "read_truth_csv",
    "rk4_step",
    "run_benchmark",
    "run_filters",
    "run_many",
    "sample_initial_state",
    "simulate",
    "simulate_truth",
    "steady_state",
    "systematic_resample",
    "ukf_measurement_update",
    "ukf_time_update",
    "write_outputs",
    "write_truth_csv",
]
