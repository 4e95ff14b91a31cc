"""Probabilistic hourly electricity-load forecasting toolkit."""

from . import errors
from .series import (
    CalendarStamp,
    HourlySeries,
    StationTable,
    calendar_arrays,
    mean_temperature,
    stamp,
    stamp_of,
)
from .synth import SynthConfig, SyntheticData, generate_synthetic
from .dataio import (
    ingest_load_csv,
    ingest_temperature_csv,
    read_quantile_csv,
    write_load_csv,
    write_quantile_csv,
    write_temperature_csv,
)
from .optim import (
    LinearProgram,
    ScalarObjective,
    VectorObjective,
    grid_search,
    minimize_bounded_scalar,
    minimize_nelder_mead,
    solve_lp_simplex,
)
from .kernels import (
    CKD_T,
    CKD_W,
    KDE_W,
    DensityEstimate,
    KernelParams,
    cross_validate_kernel,
    ckdt_density,
    ckdw_density,
    decay_exponent,
    density_quantiles,
    forecast_kernel,
    gaussian_kernel,
    kde_plain,
    kdew_density,
)
from .tempmodel import (
    TemperatureModelParams,
    build_design,
    fit_temperature,
    forecast_temperature,
    mape,
)
from .quantreg import (
    QUANTILE_LEVELS,
    QuantileForecast,
    QRModelParams,
    fit_quantile_lp,
    pinball_loss_term,
    qr_forecast,
    repair_crossing,
)
from .mixing import (
    HybridTask,
    HybridWeights,
    hybrid,
    mix1,
    mix2,
    read_weights,
    train_weights,
    write_weights,
)
from .evaluation import (
    MethodScore,
    TaskScore,
    benchmark_forecast,
    pinball_score,
    run_task,
    weighted_final_score,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "CalendarStamp",
    "HourlySeries",
    "StationTable",
    "calendar_arrays",
    "mean_temperature",
    "stamp",
    "stamp_of",
    "SynthConfig",
    "SyntheticData",
    "generate_synthetic",
    "ingest_load_csv",
    "ingest_temperature_csv",
    "read_quantile_csv",
    "write_load_csv",
    "write_quantile_csv",
    "write_temperature_csv",
    "LinearProgram",
    "ScalarObjective",
    "VectorObjective",
    "grid_search",
    "minimize_bounded_scalar",
    "minimize_nelder_mead",
    "solve_lp_simplex",
    "CKD_T",
    "CKD_W",
    "KDE_W",
    "DensityEstimate",
    "KernelParams",
    "cross_validate_kernel",
    "ckdt_density",
    "ckdw_density",
    "decay_exponent",
    "density_quantiles",
    "forecast_kernel",
    "gaussian_kernel",
    "kde_plain",
    "kdew_density",
    "TemperatureModelParams",
    "build_design",
    "fit_temperature",
    "forecast_temperature",
    "mape",
    "QUANTILE_LEVELS",
    "QuantileForecast",
    "QRModelParams",
    "fit_quantile_lp",
    "pinball_loss_term",
    "qr_forecast",
    "repair_crossing",
    "HybridTask",
    "HybridWeights",
    "hybrid",
    "mix1",
    "mix2",
    "read_weights",
    "train_weights",
    "write_weights",
    "MethodScore",
    "TaskScore",
    "benchmark_forecast",
    "pinball_score",
    "run_task",
    "weighted_final_score",
]
