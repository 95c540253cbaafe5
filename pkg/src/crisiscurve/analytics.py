"""Posterior summaries: forecast bands, peak-day estimates, box-plot
statistics, and ticker rankings.

All quantiles in this module use one documented rule so outputs are
bit-comparable across implementations: for sorted values x_0 <= ... <=
x_{n-1} and level q, let h = (n - 1) * q; the quantile is
x_{floor(h)} + (h - floor(h)) * (x_{floor(h)+1} - x_{floor(h)})
(linear interpolation between order statistics).
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from .errors import InputError
from .ingest import Date, to_week_axis
from .models import CASE_SCALE
from .rng import tagged_rng
from .sampler import PosteriorSamples

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)


def quantile(values, q: float) -> float:
    """The documented linear-interpolation quantile of a 1-d sample."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise InputError("quantile of an empty sample")
    if not 0.0 <= q <= 1.0:
        raise InputError(f"quantile level must lie in [0,1], got {q}")
    h = (x.size - 1) * q
    low = math.floor(h)
    if low == x.size - 1:
        return float(x[-1])
    frac = h - low
    return float(x[low] + frac * (x[low + 1] - x[low]))


class ForecastKind(str, Enum):
    MEAN_CURVE = "mean_curve"
    PREDICTIVE = "predictive"


@dataclass(frozen=True)
class ForecastSummary:
    """Per-date posterior mean and quantile bands of the case curve."""

    dates: tuple[Date, ...]
    mean: np.ndarray
    quantiles: dict[float, np.ndarray]
    kind: ForecastKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "kind", ForecastKind(self.kind))
        levels = sorted(self.quantiles)
        stack = np.array([self.quantiles[q] for q in levels])
        if (np.diff(stack, axis=0) < 0).any():
            raise InputError("quantile bands must be non-decreasing in level at every date")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "dates": [d.isoformat() for d in self.dates],
            "mean": [float(v) for v in self.mean],
            "quantiles": {
                f"{q:g}": [float(v) for v in band] for q, band in sorted(self.quantiles.items())
            },
        }

    def to_csv(self) -> str:
        levels = sorted(self.quantiles)
        header = "date,mean," + ",".join(f"q{q:g}" for q in levels)
        lines = [header]
        for i, d in enumerate(self.dates):
            vals = [repr(float(self.mean[i]))] + [repr(float(self.quantiles[q][i])) for q in levels]
            lines.append(d.isoformat() + "," + ",".join(vals))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PeakEstimate:
    """Posterior location of the daily-new-cases peak."""

    peak_date: Date
    interval_low: Date
    interval_high: Date
    peak_cases_quantiles: dict[float, float]

    def __post_init__(self) -> None:
        if not self.interval_low <= self.peak_date <= self.interval_high:
            raise InputError("peak interval endpoints out of order")

    def to_json_dict(self) -> dict:
        return {
            "peak_date": self.peak_date.isoformat(),
            "interval_5": self.interval_low.isoformat(),
            "interval_95": self.interval_high.isoformat(),
            "peak_cases_per_week_quantiles": {
                f"{q:g}": float(v) for q, v in sorted(self.peak_cases_quantiles.items())
            },
        }


@dataclass(frozen=True)
class BoxStats:
    """Box-plot summary of pooled draws: quartiles, Tukey 1.5*IQR whiskers
    clipped to the data range, and the sample standard deviation."""

    label: str
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    std_dev: float

    def __post_init__(self) -> None:
        if not (self.whisker_low <= self.q1 <= self.median <= self.q3 <= self.whisker_high):
            raise InputError(f"box fields out of order for {self.label!r}")

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "std_dev": self.std_dev,
        }


def _require_params(samples: PosteriorSamples, names: Sequence[str]) -> None:
    missing = [n for n in names if n not in samples.param_names]
    if missing:
        raise InputError(f"samples are missing parameters {missing}; have {list(samples.param_names)}")


def forecast(
    samples: PosteriorSamples,
    date0: Date,
    horizon: Sequence[Date],
    kind: ForecastKind = ForecastKind.MEAN_CURVE,
    seed: int | None = None,
) -> ForecastSummary:
    """Push every posterior draw through the logistic curve over ``horizon``.

    ``mean_curve`` summarizes the noiseless curves; ``predictive`` adds
    Normal(0, sigma) observation noise per draw and date, seeded from
    ``seed`` (default: the sampling seed, so repeated calls reproduce).
    """
    kind = ForecastKind(kind)
    horizon = tuple(horizon)
    if not horizon:
        raise InputError("forecast horizon is empty")
    needed = ("alpha", "beta", "t0") if kind is ForecastKind.MEAN_CURVE else ("alpha", "beta", "t0", "sigma")
    _require_params(samples, needed)
    t = to_week_axis(horizon, date0)
    alpha = samples.pooled("alpha")[:, None]
    beta = samples.pooled("beta")[:, None]
    t0 = samples.pooled("t0")[:, None]
    curves = CASE_SCALE * alpha * expit(beta * (t[None, :] - t0))
    if kind is ForecastKind.PREDICTIVE:
        if seed is None:
            if samples.config is None:
                raise InputError("predictive forecast needs a seed when samples carry no config")
            seed = samples.config.seed
        rng = tagged_rng(seed, "predictive-forecast")
        curves = curves + samples.pooled("sigma")[:, None] * rng.standard_normal(curves.shape)
    mean = curves.mean(axis=0)
    bands = {q: np.array([quantile(curves[:, j], q) for j in range(len(horizon))])
             for q in QUANTILE_LEVELS}
    return ForecastSummary(dates=horizon, mean=mean, quantiles=bands, kind=kind)


def _weeks_to_date(date0: Date, weeks: float) -> Date:
    # nearest whole day, half away from zero
    days = math.floor(7.0 * weeks + 0.5)
    return date0 + dt.timedelta(days=days)


def estimate_peak(samples: PosteriorSamples, date0: Date) -> PeakEstimate:
    """Summarize the per-draw peak of the daily-new-cases curve.

    For each draw the peak sits exactly at t0 with height
    alpha * 1e5 * beta / 4, so only draw summaries are needed.
    """
    _require_params(samples, ("alpha", "beta", "t0"))
    t0 = samples.pooled("t0")
    heights = CASE_SCALE * samples.pooled("alpha") * samples.pooled("beta") / 4.0
    return PeakEstimate(
        peak_date=_weeks_to_date(date0, quantile(t0, 0.5)),
        interval_low=_weeks_to_date(date0, quantile(t0, 0.05)),
        interval_high=_weeks_to_date(date0, quantile(t0, 0.95)),
        peak_cases_quantiles={q: quantile(heights, q) for q in QUANTILE_LEVELS},
    )


def box_stats_from_values(label: str, values) -> BoxStats:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InputError(f"no values for {label!r}")
    q1 = quantile(x, 0.25)
    q3 = quantile(x, 0.75)
    iqr = q3 - q1
    low_fence = q1 - 1.5 * iqr
    high_fence = q3 + 1.5 * iqr
    return BoxStats(
        label=label,
        median=quantile(x, 0.5),
        q1=q1,
        q3=q3,
        whisker_low=float(x[x >= low_fence].min()),
        whisker_high=float(x[x <= high_fence].max()),
        std_dev=float(x.std(ddof=1)) if x.size > 1 else 0.0,
    )


def box_stats(samples: PosteriorSamples, param: str) -> BoxStats:
    """Box-plot statistics of one parameter's pooled draws."""
    return box_stats_from_values(param, samples.pooled(param))


class RankDirection(str, Enum):
    MOST_NEGATIVE = "most_negative"
    MOST_POSITIVE = "most_positive"


def rank_tickers(
    summaries: Mapping[str, Mapping[str, float]],
    crisis: str,
    direction: RankDirection,
    k: int,
) -> list[tuple[str, float]]:
    """Top-k tickers by posterior median weight for one crisis.

    ``summaries`` maps ticker -> {crisis name -> median weight}; tickers
    without a median for the crisis (unidentified windows) are skipped.
    Ties break lexicographically by ticker.
    """
    direction = RankDirection(direction)
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if not summaries:
        raise InputError("no ticker summaries to rank")
    if not any(crisis in medians for medians in summaries.values()):
        raise InputError(f"unknown crisis {crisis!r}; no ticker carries a weight for it")
    entries = [(ticker, float(medians[crisis]))
               for ticker, medians in summaries.items() if crisis in medians]
    if direction is RankDirection.MOST_NEGATIVE:
        entries.sort(key=lambda e: (e[1], e[0]))
    else:
        entries.sort(key=lambda e: (-e[1], e[0]))
    return entries[:k]
