"""Integrated-volatility estimation under market microstructure noise.

Simulation of noisy high-frequency observations of an Ito process, a
frequency-by-frequency shrinkage estimator of integrated volatility built on
a Whittle-type spectral fit, classical subsampling benchmarks, the implied
time-domain smoothing kernel, and a reproducible Monte Carlo harness.
"""

from .errors import (
    ConfigError,
    DegenerateFitError,
    DomainError,
    ExperimentError,
    FitFailedError,
    InvalidParameterError,
    SpecvolError,
)
from .estimators import (
    ESTIMATOR_TAGS,
    EstimateReport,
    FisherMatrix,
    fisher_matrix,
    fit_series,
    m1_from_fit,
    multiscale_m1,
    nbar,
    optimal_subsample_count,
    oracle_m2,
    parse_noise_model,
    predicted_variance_w,
    realized_volatility,
    sparse_optimal_subsample,
    sparse_quarticity,
    tsrv_avg,
    tsrv_first_best,
    whittle_w,
)
from .kernel import (
    Kernel,
    kernel_closed_form,
    kernel_from_ratio,
    kernel_laplace,
    time_domain_m1,
)
from .mcharness import (
    ExperimentConfig,
    MCReport,
    ModelSpec,
    OrderSelectionReport,
    PathResult,
    path_seeds,
    run_experiment,
    run_order_selection,
)
from .noise import NoiseSpec, ObservedSeries, observe, sample_noise
from .sdesim import (
    Grid,
    HestonParams,
    LatentPath,
    SECONDS_PER_TRADING_DAY,
    TRADING_DAY_YEARS,
    simulate_brownian,
    simulate_heston,
    simulate_ou,
    true_integrated_volatility,
)
from .spectral import (
    IncrementSeries,
    Periodogram,
    dft_increments,
    increments,
    ma_gain,
    ma_noise_spectrum,
    noise_spectrum,
    periodogram,
    white_noise_spectrum,
)
from .whittle import (
    FitOptions,
    OrderRow,
    RatioCurve,
    WhittleFit,
    aicc_value,
    fit_ma,
    fit_white,
    multiscale_ratio,
    select_order_aicc,
    whittle_loglik,
)

__version__ = "0.1.0"
