"""Convergence diagnostics: split R-hat and effective sample size.

Both statistics are undefined for chains with zero within-chain variance;
such parameters are reported with the :data:`DEGENERATE_CONSTANT` flag
instead of a number so downstream reports never mistake a broken run for
a converged one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .sampler import PosteriorSamples

DEGENERATE_CONSTANT = "degenerate: constant"

Diagnostic = float | str


def split_rhat(samples: PosteriorSamples) -> dict[str, Diagnostic]:
    """Per-parameter split R-hat over ``2 * n_chains`` half-chains.

    Each chain is split in half (the middle draw is dropped for odd
    lengths) and the usual between/within variance ratio is computed.
    Values are floored at 1.0: the raw ratio can dip a fraction below 1
    when chains agree, and sub-1 values carry no diagnostic meaning.
    """
    _require_min_draws(samples)
    return {
        name: _rhat_1d(samples.draws_for(name))
        for name in samples.param_names
    }


def effective_sample_size(samples: PosteriorSamples) -> dict[str, Diagnostic]:
    """Per-parameter ESS from the pooled autocorrelation-sum estimator.

    Per-chain autocovariances are averaged, converted to pooled
    autocorrelations, and summed in Geyer pairs until the first
    non-positive pair (initial positive sequence, made monotone). The
    result is clamped to (0, n_chains * n_draws]; antithetic chains whose
    nominal ESS would exceed the draw count hit the upper clamp.
    """
    _require_min_draws(samples)
    return {
        name: _ess_1d(samples.draws_for(name))
        for name in samples.param_names
    }


@dataclass(frozen=True)
class DiagnosticsReport:
    """R-hat and ESS per parameter plus per-chain acceptance rates."""

    rhat: dict[str, Diagnostic]
    ess: dict[str, Diagnostic]
    acceptance_rates: tuple[float, ...]
    warnings: tuple[str, ...] = ()

    def worst_rhat(self) -> float | None:
        """Largest numeric R-hat, or None if every parameter is degenerate."""
        numeric = [v for v in self.rhat.values() if isinstance(v, float)]
        return max(numeric) if numeric else None

    def to_json_dict(self) -> dict:
        return {
            "rhat": dict(self.rhat),
            "ess": dict(self.ess),
            "acceptance_rates": list(self.acceptance_rates),
            "warnings": list(self.warnings),
        }


def compute_diagnostics(samples: PosteriorSamples) -> DiagnosticsReport:
    return DiagnosticsReport(
        rhat=split_rhat(samples),
        ess=effective_sample_size(samples),
        acceptance_rates=samples.acceptance_rates,
        warnings=samples.warnings,
    )


def _require_min_draws(samples: PosteriorSamples) -> None:
    if samples.n_draws < 4:
        raise InputError(f"diagnostics need n_draws >= 4, got {samples.n_draws}")


def _split_halves(chains: np.ndarray) -> np.ndarray:
    half = chains.shape[1] // 2
    return np.concatenate([chains[:, :half], chains[:, -half:]], axis=0)


def _rhat_1d(chains: np.ndarray) -> Diagnostic:
    halves = _split_halves(chains)
    n = halves.shape[1]
    within = float(halves.var(axis=1, ddof=1).mean())
    if within == 0.0:
        return DEGENERATE_CONSTANT
    between_over_n = float(halves.mean(axis=1).var(ddof=1))
    var_hat = (n - 1) / n * within + between_over_n
    return max(float(np.sqrt(var_hat / within)), 1.0)


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased (1/n) autocovariance of one chain at lags 0..n-1, via FFT."""
    n = x.size
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(centered, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    return acov / n


def _ess_1d(chains: np.ndarray) -> Diagnostic:
    m, n = chains.shape
    total = m * n
    chain_vars = chains.var(axis=1, ddof=1)
    within = float(chain_vars.mean())
    if within == 0.0:
        return DEGENERATE_CONSTANT
    if m > 1:
        between_over_n = float(chains.mean(axis=1).var(ddof=1))
    else:
        between_over_n = 0.0
    var_hat = (n - 1) / n * within + between_over_n
    acov = np.mean([_autocovariance(chains[c]) for c in range(m)], axis=0)
    rho = 1.0 - (within - acov) / var_hat
    # Geyer initial positive sequence over lag pairs, made monotone
    tau = -1.0
    prev_pair = np.inf
    max_pairs = (n - 1) // 2
    for k in range(max_pairs):
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0:
            break
        pair = min(pair, prev_pair)
        prev_pair = pair
        tau += 2.0 * pair
    if tau <= 0:
        return float(total)
    return float(min(total / tau, total))
