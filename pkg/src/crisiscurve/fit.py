"""End-to-end model fits: priors, MAP-based initialization, sampling, and
the transform back to native parameter space.

The sampler works on unconstrained vectors; fits locate the posterior
mode with a deterministic L-BFGS run, read per-dimension scales off the
local curvature, and hand both to the kernel. Returned draws are in
native units (alpha, beta, t0, sigma / intercept, weights, sigma, nu) so
analytics and reports never see the raw parameterization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import models
from .diagnostics import DiagnosticsReport, compute_diagnostics
from .ingest import CaseSeries, CrisisWindow, ReturnSeries, build_crisis_design, to_week_axis
from .models import (
    CASE_SCALE,
    CrisisParams,
    Likelihood,
    LogisticParams,
    OLSFit,
    PriorSpec,
    unpack_logistic_raw,
)
from .sampler import ChainConfig, PosteriorSamples, sample

_SCALE_FLOOR = 1e-8
_SCALE_CEIL = 10.0


@dataclass(frozen=True)
class LogisticFitResult:
    samples: PosteriorSamples  # parameters: alpha, beta, t0, sigma
    diagnostics: DiagnosticsReport
    priors: dict[str, models.Prior]
    map_estimate: LogisticParams


@dataclass(frozen=True)
class CrisisFitResult:
    samples: PosteriorSamples  # parameters: intercept, w_<window>..., sigma[, nu]
    diagnostics: DiagnosticsReport
    priors: dict[str, models.Prior]
    ols: OLSFit
    ols_coefficients: dict[str, float]
    covered_windows: tuple[str, ...]
    uncovered_windows: tuple[str, ...]


def _curvature_scales(grad_fn, mode: np.ndarray) -> np.ndarray:
    """Per-dimension scales 1/sqrt(-d2 logpost / dx_i^2) at the mode."""
    scales = np.empty(mode.size)
    for i in range(mode.size):
        h = 1e-5 * max(1.0, abs(mode[i]))
        up = mode.copy()
        up[i] += h
        down = mode.copy()
        down[i] -= h
        curv = -(grad_fn(up)[i] - grad_fn(down)[i]) / (2.0 * h)
        scales[i] = 1.0 / math.sqrt(curv) if curv > 0 else 0.1
    return np.clip(scales, _SCALE_FLOOR, _SCALE_CEIL)


def _map_mode(logpost, grad, start: np.ndarray) -> np.ndarray:
    result = minimize(
        lambda x: -logpost(x),
        start,
        jac=lambda x: -grad(x),
        method="L-BFGS-B",
        options={"maxiter": 500},
    )
    mode = np.asarray(result.x, dtype=float)
    if not (np.isfinite(mode).all() and math.isfinite(logpost(mode))):
        return start
    return mode


def fit_logistic(t, counts, config: ChainConfig,
                 priors: PriorSpec | None = None) -> LogisticFitResult:
    """Fit the logistic growth model to (week-axis, cumulative count) data."""
    t = np.asarray(t, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if priors is None:
        priors = models.default_logistic_priors(t, counts)
    else:
        priors = dict(priors)

    def logpost(raw):
        return models.logistic_log_posterior(raw, t, counts, priors)

    def grad(raw):
        return models.logistic_log_posterior_grad(raw, t, counts, priors)

    peak = float(counts.max())
    half = peak / 2.0
    t0_guess = float(t[int(np.argmin(np.abs(counts - half)))])
    start = np.array([
        math.log(max(1.2 * peak / CASE_SCALE, 1e-6)),
        math.log(0.5),
        t0_guess,
        math.log(max(0.05 * peak, 1.0)),
    ])
    mode = _map_mode(logpost, grad, start)
    scales = _curvature_scales(grad, mode)
    raw_samples = sample(
        logpost, 4, mode, config, grad=grad, scales=scales,
        param_names=("log_alpha", "log_beta", "t0", "log_sigma"),
    )
    draws = raw_samples.draws.copy()
    draws[:, :, 0] = np.exp(draws[:, :, 0])
    draws[:, :, 1] = np.exp(draws[:, :, 1])
    draws[:, :, 3] = np.exp(draws[:, :, 3])
    samples = PosteriorSamples(
        ("alpha", "beta", "t0", "sigma"), draws, config,
        raw_samples.acceptance_rates, raw_samples.warnings,
    )
    return LogisticFitResult(
        samples=samples,
        diagnostics=compute_diagnostics(samples),
        priors=priors,
        map_estimate=unpack_logistic_raw(mode),
    )


def fit_logistic_series(series: CaseSeries, config: ChainConfig,
                        priors: PriorSpec | None = None) -> LogisticFitResult:
    t = to_week_axis(series.dates, series.date0)
    return fit_logistic(t, series.cumulative, config, priors)


def fit_crisis(returns: ReturnSeries, windows: list[CrisisWindow] | tuple[CrisisWindow, ...],
               config: ChainConfig, likelihood: Likelihood = Likelihood.NORMAL,
               priors: PriorSpec | None = None) -> CrisisFitResult:
    """Fit the crisis-indicator regression for one ticker.

    Windows with no covered trading date are excluded from the design
    (their weight is unidentifiable) and reported in
    ``uncovered_windows``; callers mark them "unidentified".
    """
    likelihood = Likelihood(likelihood)
    if priors is None:
        priors = models.default_crisis_priors()
    else:
        priors = dict(priors)
    design = build_crisis_design(returns.dates, windows)
    counts = design.column_counts()
    covered = tuple(name for name in design.window_names if counts[name] > 0)
    uncovered = tuple(name for name in design.window_names if counts[name] == 0)
    keep_cols = [0] + [1 + i for i, name in enumerate(design.window_names) if name in covered]
    x = design.matrix[:, keep_cols]
    y = returns.returns

    names = ["intercept"] + [f"w_{name}" for name in covered]
    ols = models.ols_fit(x, y, column_names=["intercept"] + list(covered))
    n, p = x.shape
    dof = max(n - p, 1)
    sigma0 = math.sqrt(max(ols.rss / dof, 1e-12))

    def logpost(raw):
        return models.crisis_log_posterior(raw, y, x, priors, likelihood)

    def grad(raw):
        return models.crisis_log_posterior_grad(raw, y, x, priors, likelihood)

    init = list(ols.coefficients) + [math.log(sigma0)]
    xtx_inv_diag = np.diag(np.linalg.inv(x.T @ x))
    scales = list(np.sqrt(np.maximum(xtx_inv_diag, 1e-12)) * sigma0)
    scales.append(1.0 / math.sqrt(2.0 * n))
    raw_names = names + ["log_sigma"]
    if likelihood is Likelihood.STUDENT_T:
        init.append(math.log(30.0))  # nu - 1
        scales.append(0.5)
        raw_names.append("log_nu_minus_1")
    mode = _map_mode(logpost, grad, np.asarray(init, dtype=float))
    raw_samples = sample(
        logpost, len(init), mode, config, grad=grad,
        scales=np.clip(np.asarray(scales), _SCALE_FLOOR, _SCALE_CEIL),
        param_names=raw_names,
    )
    draws = raw_samples.draws.copy()
    sig_col = len(names)
    draws[:, :, sig_col] = np.exp(draws[:, :, sig_col])
    out_names = names + ["sigma"]
    if likelihood is Likelihood.STUDENT_T:
        draws[:, :, sig_col + 1] = 1.0 + np.exp(draws[:, :, sig_col + 1])
        out_names.append("nu")
    samples = PosteriorSamples(tuple(out_names), draws, config,
                               raw_samples.acceptance_rates, raw_samples.warnings)
    return CrisisFitResult(
        samples=samples,
        diagnostics=compute_diagnostics(samples),
        priors=priors,
        ols=ols,
        ols_coefficients={name: float(c) for name, c in zip(names, ols.coefficients)},
        covered_windows=covered,
        uncovered_windows=uncovered,
    )


def crisis_params_from_draw(result: CrisisFitResult, chain: int, draw: int) -> CrisisParams:
    """Native-space parameters of one stored draw (mostly for debugging)."""
    samples = result.samples
    values = {name: float(samples.draws[chain, draw, i])
              for i, name in enumerate(samples.param_names)}
    weights = tuple(values[f"w_{name}"] for name in result.covered_windows)
    if "nu" in values:
        return CrisisParams(values["intercept"], weights, values["sigma"], values["nu"])
    return CrisisParams(values["intercept"], weights, values["sigma"])
