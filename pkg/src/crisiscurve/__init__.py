"""Bayesian regression toolkit: logistic epidemic-curve forecasting and
crisis-indicator stock-return regression over a built-in MCMC engine."""

from .analytics import (
    BoxStats,
    ForecastKind,
    ForecastSummary,
    PeakEstimate,
    RankDirection,
    box_stats,
    estimate_peak,
    forecast,
    quantile,
    rank_tickers,
)
from .diagnostics import (
    DEGENERATE_CONSTANT,
    DiagnosticsReport,
    compute_diagnostics,
    effective_sample_size,
    split_rhat,
)
from .errors import (
    ConfigError,
    CrisisCurveError,
    DataCleaningWarning,
    InputError,
    ParseError,
    RegionNotFoundError,
    SingularDesignError,
)
from .fit import CrisisFitResult, LogisticFitResult, fit_crisis, fit_logistic, fit_logistic_series
from .ingest import (
    DEFAULT_CRISIS_WINDOWS,
    CaseSeries,
    CrisisDesign,
    CrisisWindow,
    PriceSeries,
    ReturnSeries,
    build_crisis_design,
    daily_returns,
    load_case_csv,
    load_price_csv,
    to_week_axis,
)
from .models import (
    CASE_SCALE,
    CrisisParams,
    HalfCauchy,
    HalfNormal,
    Likelihood,
    LogisticParams,
    Normal,
    OLSFit,
    PriorSpec,
    crisis_log_likelihood,
    crisis_log_posterior,
    crisis_log_posterior_grad,
    daily_new_cases,
    default_crisis_priors,
    default_logistic_priors,
    logistic_log_likelihood,
    logistic_log_posterior,
    logistic_log_posterior_grad,
    logistic_mean,
    ols_fit,
)
from .sampler import ChainConfig, Kernel, PosteriorSamples, sample

__version__ = "0.1.0"

__all__ = [
    "BoxStats", "ForecastKind", "ForecastSummary", "PeakEstimate", "RankDirection",
    "box_stats", "estimate_peak", "forecast", "quantile", "rank_tickers",
    "DEGENERATE_CONSTANT", "DiagnosticsReport", "compute_diagnostics",
    "effective_sample_size", "split_rhat",
    "ConfigError", "CrisisCurveError", "DataCleaningWarning", "InputError",
    "ParseError", "RegionNotFoundError", "SingularDesignError",
    "CrisisFitResult", "LogisticFitResult", "fit_crisis", "fit_logistic", "fit_logistic_series",
    "DEFAULT_CRISIS_WINDOWS", "CaseSeries", "CrisisDesign", "CrisisWindow",
    "PriceSeries", "ReturnSeries", "build_crisis_design", "daily_returns",
    "load_case_csv", "load_price_csv", "to_week_axis",
    "CASE_SCALE", "CrisisParams", "HalfCauchy", "HalfNormal", "Likelihood",
    "LogisticParams", "Normal", "OLSFit", "PriorSpec",
    "crisis_log_likelihood", "crisis_log_posterior", "crisis_log_posterior_grad",
    "daily_new_cases", "default_crisis_priors", "default_logistic_priors",
    "logistic_log_likelihood", "logistic_log_posterior", "logistic_log_posterior_grad",
    "logistic_mean", "ols_fit",
    "ChainConfig", "Kernel", "PosteriorSamples", "sample",
]
