"""Model definitions: logistic growth curve, crisis-indicator return
regression, priors, and an OLS baseline.

The logistic mean is ``alpha * 1e5 / (1 + exp(-beta * (t - t0)))`` with t
in weeks; the 1e5 factor is a fixed constant that keeps alpha O(1)-O(100)
for numerical conditioning. Both Bayesian models are exposed as
log-posteriors over an unconstrained vector (positive parameters are
log-transformed, with the Jacobian terms included) so MCMC kernels can
explore freely, plus matching analytic gradients for HMC and MAP
initialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.special import digamma, expit, gammaln

from . import ingest
from .errors import InputError, SingularDesignError

CASE_SCALE = 1e5

_LOG_2PI = math.log(2.0 * math.pi)
_NEG_BIG = -1e300  # finite stand-in for log-density underflow/overflow regions


# ---------------------------------------------------------------------------
# priors

@dataclass(frozen=True)
class Normal:
    mean: float
    scale: float

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise InputError(f"normal prior scale must be positive, got {self.scale}")

    def logpdf(self, x: float) -> float:
        z = (x - self.mean) / self.scale
        return -0.5 * _LOG_2PI - math.log(self.scale) - 0.5 * z * z

    def dlogpdf(self, x: float) -> float:
        return -(x - self.mean) / (self.scale * self.scale)


@dataclass(frozen=True)
class HalfNormal:
    """Half-normal on (0, inf)."""

    scale: float

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise InputError(f"half-normal prior scale must be positive, got {self.scale}")

    def logpdf(self, x: float) -> float:
        if x <= 0:
            return -math.inf
        return 0.5 * math.log(2.0 / math.pi) - math.log(self.scale) - 0.5 * (x / self.scale) ** 2

    def dlogpdf(self, x: float) -> float:
        return -x / (self.scale * self.scale)


@dataclass(frozen=True)
class HalfCauchy:
    """Half-Cauchy on (0, inf); heavy-tailed scale prior."""

    scale: float

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise InputError(f"half-Cauchy prior scale must be positive, got {self.scale}")

    def logpdf(self, x: float) -> float:
        if x <= 0:
            return -math.inf
        return math.log(2.0 / math.pi) - math.log(self.scale) - math.log1p((x / self.scale) ** 2)

    def dlogpdf(self, x: float) -> float:
        return -2.0 * x / (self.scale * self.scale + x * x)


Prior = Union[Normal, HalfNormal, HalfCauchy]

#: Maps parameter name -> prior. Logistic model keys: alpha, beta, t0, sigma.
#: Crisis model keys: intercept, weight (shared by all windows), sigma, nu
#: (applied to nu - 1).
PriorSpec = Mapping[str, Prior]

LOGISTIC_PARAM_NAMES = ("alpha", "beta", "t0", "sigma")
CRISIS_PRIOR_NAMES = ("intercept", "weight", "sigma", "nu")


def parse_prior(text: str) -> Prior:
    """Parse CLI prior syntax: ``half_normal:2.0``, ``normal:0,0.05``,
    ``half_cauchy:0.02``."""
    try:
        kind, argtext = text.split(":", 1)
        args = [float(a) for a in argtext.split(",")]
    except ValueError:
        raise InputError(f"bad prior spec {text!r}; expected e.g. 'half_normal:2.0'") from None
    kind = kind.strip().lower()
    if kind == "half_normal" and len(args) == 1:
        return HalfNormal(args[0])
    if kind == "half_cauchy" and len(args) == 1:
        return HalfCauchy(args[0])
    if kind == "normal" and len(args) == 2:
        return Normal(args[0], args[1])
    raise InputError(f"bad prior spec {text!r}; expected half_normal:s, normal:m,s or half_cauchy:s")


def default_logistic_priors(t: Sequence[float], counts: Sequence[float]) -> dict[str, Prior]:
    """Weakly informative, data-scaled defaults for the logistic model."""
    t = np.asarray(t, dtype=float)
    counts = np.asarray(counts, dtype=float)
    span = float(t.max() - t.min())
    return {
        "alpha": HalfNormal(max(2.0 * float(counts.max()) / CASE_SCALE, 1e-6)),
        "beta": HalfNormal(1.0),
        "t0": Normal(float(t.min()) + span / 2.0, max(span, 1e-6)),
        "sigma": HalfCauchy(max(float(counts.std()), 1.0)),
    }


def default_crisis_priors() -> dict[str, Prior]:
    """Defaults in daily-return units for the crisis regression."""
    return {
        "intercept": Normal(0.0, 0.05),
        "weight": Normal(0.0, 0.05),
        "sigma": HalfCauchy(0.02),
        "nu": HalfNormal(30.0),
    }


def _check_priors(priors: PriorSpec, required: Sequence[str]) -> None:
    missing = [k for k in required if k not in priors]
    if missing:
        raise InputError(f"priors missing entries for {missing}")


# ---------------------------------------------------------------------------
# logistic growth model

@dataclass(frozen=True)
class LogisticParams:
    """Point in the logistic model's native parameter space.

    alpha scales the asymptotic maximum (alpha * 1e5 cumulative cases),
    beta is the spread rate per week, t0 the inflection time in weeks
    since the axis origin, sigma the observation noise in cases.
    """

    alpha: float
    beta: float
    t0: float
    sigma: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0 and self.sigma > 0):
            raise InputError(
                f"alpha, beta, sigma must be positive, got "
                f"({self.alpha}, {self.beta}, {self.sigma})"
            )


def logistic_mean(params: LogisticParams, t):
    """Expected cumulative cases at week(s) ``t``; saturates instead of
    overflowing for extreme ``beta * (t - t0)``."""
    t_arr = np.asarray(t, dtype=float)
    out = CASE_SCALE * params.alpha * expit(params.beta * (t_arr - params.t0))
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def daily_new_cases(params: LogisticParams, t):
    """Time-derivative of :func:`logistic_mean` (cases per week): the
    new-cases curve, peaking at t0 with height alpha * 1e5 * beta / 4."""
    t_arr = np.asarray(t, dtype=float)
    s = expit(params.beta * (t_arr - params.t0))
    out = CASE_SCALE * params.alpha * params.beta * s * (1.0 - s)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def unpack_logistic_raw(raw: Sequence[float]) -> LogisticParams:
    """Map an unconstrained vector (log alpha, log beta, t0, log sigma) to
    native parameters."""
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (4,):
        raise InputError(f"logistic raw vector must have 4 entries, got shape {raw.shape}")
    return LogisticParams(
        alpha=math.exp(raw[0]), beta=math.exp(raw[1]), t0=float(raw[2]), sigma=math.exp(raw[3])
    )


def logistic_log_likelihood(params: LogisticParams, t, counts) -> float:
    """Sum of Normal(mu(t), sigma) log-densities of the observed counts."""
    t = np.asarray(t, dtype=float)
    counts = np.asarray(counts, dtype=float)
    mu = logistic_mean(params, t)
    n = counts.size
    z = (counts - mu) / params.sigma
    return -0.5 * n * _LOG_2PI - n * math.log(params.sigma) - 0.5 * float(np.sum(z * z))


def _validate_logistic_data(t, counts):
    t = np.asarray(t, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if t.shape != counts.shape:
        raise InputError(f"t has shape {t.shape} but counts {counts.shape}")
    if t.size < 4:
        raise InputError(f"need at least 4 observations, got {t.size}")
    if (counts < 0).any():
        raise InputError("counts must be non-negative")
    return t, counts


def logistic_log_posterior(raw, t, counts, priors: PriorSpec) -> float:
    """Unnormalized log-posterior over (log alpha, log beta, t0, log sigma),
    log-Jacobian terms included. Finite for every finite raw input (regions
    where the density over- or underflows return a large negative value)."""
    t, counts = _validate_logistic_data(t, counts)
    _check_priors(priors, LOGISTIC_PARAM_NAMES)
    raw = np.asarray(raw, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            params = unpack_logistic_raw(raw)
        except (OverflowError, InputError):
            return _NEG_BIG
        value = logistic_log_likelihood(params, t, counts)
        value += priors["alpha"].logpdf(params.alpha) + raw[0]
        value += priors["beta"].logpdf(params.beta) + raw[1]
        value += priors["t0"].logpdf(params.t0)
        value += priors["sigma"].logpdf(params.sigma) + raw[3]
    return value if math.isfinite(value) else _NEG_BIG


def logistic_log_posterior_grad(raw, t, counts, priors: PriorSpec) -> np.ndarray:
    """Analytic gradient of :func:`logistic_log_posterior`. Returns zeros in
    the guarded non-finite region (the sampler rejects such points anyway)."""
    t, counts = _validate_logistic_data(t, counts)
    _check_priors(priors, LOGISTIC_PARAM_NAMES)
    raw = np.asarray(raw, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            params = unpack_logistic_raw(raw)
        except (OverflowError, InputError):
            return np.zeros(4)
        alpha, beta, t0, sigma = params.alpha, params.beta, params.t0, params.sigma
        s = expit(beta * (t - t0))
        mu = CASE_SCALE * alpha * s
        resid = counts - mu
        w = resid / (sigma * sigma)
        n = counts.size
        dmu_common = CASE_SCALE * alpha * s * (1.0 - s) * beta
        grad = np.array([
            float(np.sum(w * mu)) + alpha * priors["alpha"].dlogpdf(alpha) + 1.0,
            float(np.sum(w * dmu_common * (t - t0))) + beta * priors["beta"].dlogpdf(beta) + 1.0,
            float(np.sum(w * (-dmu_common))) + priors["t0"].dlogpdf(t0),
            -n + float(np.sum(resid * resid)) / (sigma * sigma)
            + sigma * priors["sigma"].dlogpdf(sigma) + 1.0,
        ])
    return grad if np.isfinite(grad).all() else np.zeros(4)


# ---------------------------------------------------------------------------
# crisis-indicator return regression

class Likelihood(str, Enum):
    NORMAL = "normal"
    STUDENT_T = "student_t"


@dataclass(frozen=True)
class CrisisParams:
    """Native parameters of the crisis regression: intercept and one impact
    weight per window (daily-return units), residual scale sigma, and the
    Student-t degrees of freedom nu (None under the Normal likelihood)."""

    intercept: float
    weights: tuple[float, ...]
    sigma: float
    nu: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.sigma <= 0:
            raise InputError(f"sigma must be positive, got {self.sigma}")
        if self.nu is not None and self.nu <= 1:
            raise InputError(f"nu must exceed 1, got {self.nu}")


def crisis_dim(n_windows: int, likelihood: Likelihood) -> int:
    """Length of the unconstrained crisis parameter vector."""
    return n_windows + 2 + (1 if Likelihood(likelihood) is Likelihood.STUDENT_T else 0)


def unpack_crisis_raw(raw, n_windows: int, likelihood: Likelihood) -> CrisisParams:
    """Map (intercept, weights..., log sigma[, log(nu-1)]) to native space."""
    likelihood = Likelihood(likelihood)
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (crisis_dim(n_windows, likelihood),):
        raise InputError(
            f"crisis raw vector must have {crisis_dim(n_windows, likelihood)} entries, "
            f"got shape {raw.shape}"
        )
    nu = 1.0 + math.exp(raw[n_windows + 2]) if likelihood is Likelihood.STUDENT_T else None
    return CrisisParams(
        intercept=float(raw[0]),
        weights=tuple(raw[1:1 + n_windows]),
        sigma=math.exp(raw[n_windows + 1]),
        nu=nu,
    )


def _as_return_array(returns) -> np.ndarray:
    if isinstance(returns, ingest.ReturnSeries):
        return returns.returns
    return np.asarray(returns, dtype=float)


def _as_design_matrix(design) -> np.ndarray:
    if isinstance(design, ingest.CrisisDesign):
        return design.matrix
    return np.asarray(design, dtype=float)


def _check_alignment(returns, design) -> tuple[np.ndarray, np.ndarray]:
    y = _as_return_array(returns)
    x = _as_design_matrix(design)
    if isinstance(returns, ingest.ReturnSeries) and isinstance(design, ingest.CrisisDesign):
        if returns.dates != design.dates:
            raise InputError("design rows are not date-aligned with the return series")
    if x.ndim != 2 or x.shape[0] != y.size:
        raise InputError(f"design has {x.shape[0] if x.ndim == 2 else '?'} rows for {y.size} returns")
    return y, x


def crisis_log_likelihood(params: CrisisParams, returns, design,
                          likelihood: Likelihood = Likelihood.NORMAL) -> float:
    """Residual log-density of the returns under the linear crisis model."""
    likelihood = Likelihood(likelihood)
    y, x = _check_alignment(returns, design)
    coef = np.concatenate([[params.intercept], params.weights])
    if x.shape[1] != coef.size:
        raise InputError(f"design has {x.shape[1]} columns for {coef.size} coefficients")
    z = (y - x @ coef) / params.sigma
    n = y.size
    if likelihood is Likelihood.NORMAL:
        return -0.5 * n * _LOG_2PI - n * math.log(params.sigma) - 0.5 * float(np.sum(z * z))
    if params.nu is None:
        raise InputError("student_t likelihood needs nu")
    nu = params.nu
    const = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * math.log(nu * math.pi)
    return float(n * const - n * math.log(params.sigma)
                 - (nu + 1.0) / 2.0 * np.sum(np.log1p(z * z / nu)))


def crisis_log_posterior(raw, returns, design, priors: PriorSpec,
                         likelihood: Likelihood = Likelihood.NORMAL) -> float:
    """Unnormalized log-posterior over the unconstrained crisis vector."""
    likelihood = Likelihood(likelihood)
    _check_priors(priors, CRISIS_PRIOR_NAMES if likelihood is Likelihood.STUDENT_T
                  else CRISIS_PRIOR_NAMES[:3])
    y, x = _check_alignment(returns, design)
    n_windows = x.shape[1] - 1
    raw = np.asarray(raw, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            params = unpack_crisis_raw(raw, n_windows, likelihood)
        except (OverflowError, InputError):
            return _NEG_BIG
        value = crisis_log_likelihood(params, y, x, likelihood)
        value += priors["intercept"].logpdf(params.intercept)
        for w in params.weights:
            value += priors["weight"].logpdf(w)
        value += priors["sigma"].logpdf(params.sigma) + raw[n_windows + 1]
        if likelihood is Likelihood.STUDENT_T:
            value += priors["nu"].logpdf(params.nu - 1.0) + raw[n_windows + 2]
    return value if math.isfinite(value) else _NEG_BIG


def crisis_log_posterior_grad(raw, returns, design, priors: PriorSpec,
                              likelihood: Likelihood = Likelihood.NORMAL) -> np.ndarray:
    """Analytic gradient of :func:`crisis_log_posterior`."""
    likelihood = Likelihood(likelihood)
    _check_priors(priors, CRISIS_PRIOR_NAMES if likelihood is Likelihood.STUDENT_T
                  else CRISIS_PRIOR_NAMES[:3])
    y, x = _check_alignment(returns, design)
    n_windows = x.shape[1] - 1
    raw = np.asarray(raw, dtype=float)
    dim = crisis_dim(n_windows, likelihood)
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            params = unpack_crisis_raw(raw, n_windows, likelihood)
        except (OverflowError, InputError):
            return np.zeros(dim)
        sigma = params.sigma
        coef = np.concatenate([[params.intercept], params.weights])
        resid = y - x @ coef
        z = resid / sigma
        n = y.size
        grad = np.zeros(dim)
        if likelihood is Likelihood.NORMAL:
            dcoef = x.T @ resid / (sigma * sigma)
            dlogsigma = -n + float(np.sum(z * z))
        else:
            nu = params.nu
            u = (nu + 1.0) * z / (nu + z * z)
            dcoef = x.T @ u / sigma
            dlogsigma = -n + float(np.sum((nu + 1.0) * z * z / (nu + z * z)))
            dnu = float(
                n * (0.5 * digamma((nu + 1.0) / 2.0) - 0.5 * digamma(nu / 2.0) - 0.5 / nu)
                + np.sum(-0.5 * np.log1p(z * z / nu)
                         + (nu + 1.0) * z * z / (2.0 * nu * (nu + z * z)))
            )
            q = nu - 1.0
            grad[n_windows + 2] = dnu * q + q * priors["nu"].dlogpdf(q) + 1.0
        grad[0] = dcoef[0] + priors["intercept"].dlogpdf(params.intercept)
        for j, w in enumerate(params.weights):
            grad[1 + j] = dcoef[1 + j] + priors["weight"].dlogpdf(w)
        grad[n_windows + 1] = dlogsigma + sigma * priors["sigma"].dlogpdf(sigma) + 1.0
    return grad if np.isfinite(grad).all() else np.zeros(dim)


# ---------------------------------------------------------------------------
# OLS baseline

@dataclass(frozen=True)
class OLSFit:
    coefficients: np.ndarray
    rss: float

    def __post_init__(self) -> None:
        coefs = np.asarray(self.coefficients, dtype=float)
        coefs.flags.writeable = False
        object.__setattr__(self, "coefficients", coefs)


def ols_fit(design, y, column_names: Sequence[str] | None = None) -> OLSFit:
    """Least squares via the normal equations with an explicit rank check.

    Rank-deficient designs raise :class:`SingularDesignError` naming the
    first column that is linearly dependent on its predecessors.
    """
    x = np.asarray(_as_design_matrix(design), dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise InputError(f"design must be 2-d, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise InputError(f"y has shape {y.shape} for design with {x.shape[0]} rows")
    if x.shape[0] < x.shape[1]:
        raise InputError(f"need rows >= columns, got shape {x.shape}")
    if np.linalg.matrix_rank(x) < x.shape[1]:
        rank = 0
        for j in range(x.shape[1]):
            new_rank = np.linalg.matrix_rank(x[:, :j + 1])
            if new_rank == rank:
                name = column_names[j] if column_names is not None else None
                raise SingularDesignError(j, name)
            rank = new_rank
    xtx = x.T @ x
    coefs = np.linalg.solve(xtx, x.T @ y)
    resid = y - x @ coefs
    return OLSFit(coefficients=coefs, rss=float(resid @ resid))
