"""FourierGNN multivariate time-series forecaster (C++ core)."""

from ._core import (
    ConfigError,
    DataError,
    FgnnError,
    FitResult,
    Model,
    ModelConfig,
    NumericError,
    ShapeError,
    TrainConfig,
    dft,
    fit,
    idft,
    load_csv,
    metrics,
    mse,
    run_cli,
    sliding_windows,
    synthetic,
    verify_convolution_theorem,
    verify_multi_order_equivalence,
)

__all__ = [
    "ConfigError",
    "DataError",
    "FgnnError",
    "FitResult",
    "Model",
    "ModelConfig",
    "NumericError",
    "ShapeError",
    "TrainConfig",
    "dft",
    "fit",
    "idft",
    "load_csv",
    "metrics",
    "mse",
    "run_cli",
    "sliding_windows",
    "synthetic",
    "verify_convolution_theorem",
    "verify_multi_order_equivalence",
]

__version__ = "0.1.0"
