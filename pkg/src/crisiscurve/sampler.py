"""Adaptive MCMC engine over user-supplied log densities.

Two kernels are provided:

* random-walk Metropolis with a per-dimension proposal scale. During
  warmup a global multiplier is nudged by exp(+-0.05) once per 50-draw
  window toward the target acceptance rate, while the per-dimension part
  tracks the running standard deviation of the visited states. Both are
  frozen when warmup ends.
* Hamiltonian Monte Carlo with a fixed leapfrog trajectory length and a
  step size tuned by dual averaging during warmup. Gradients can be
  supplied analytically; otherwise central finite differences with step
  1e-6 * max(1, |x_i|) are used (accurate to ~1e-4 relative for smooth
  targets, which is the documented caveat of the fallback).

Reproducibility contract: for a fixed ``ChainConfig.seed`` and identical
inputs the returned draws are bit-identical across runs. Each chain
evolves on its own PCG64 substream (see :mod:`crisiscurve.rng`), so chain
``i`` is a pure function of (seed, i, inputs) and does not change when
other chains are added, removed, or executed in a different order.
log_density must be a pure function of its input (it may be called from
concurrent chains by downstream embedders).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, InputError, ParseError
from .rng import chain_rng

LogDensity = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]

ADAPT_WINDOW = 50
ADAPT_NUDGE = 0.05  # log-scale step applied to the global multiplier per window

# dual-averaging constants (Hoffman & Gelman 2014 defaults)
_DA_GAMMA = 0.05
_DA_T0 = 10.0
_DA_KAPPA = 0.75


class Kernel(str, Enum):
    METROPOLIS = "metropolis"
    HMC = "hmc"


@dataclass(frozen=True)
class ChainConfig:
    """Settings for one sampling run.

    ``seed`` is required and explicit: there is no wall-clock fallback.
    ``initial_step_size`` is the starting per-dimension proposal scale
    (Metropolis) or leapfrog step size (HMC); it must be positive for
    real use, but 0 is accepted as a degenerate test hook that freezes
    every chain at its initial point.
    """

    seed: int
    n_chains: int = 4
    n_warmup: int = 1000
    n_draws: int = 1000
    kernel: Kernel = Kernel.METROPOLIS
    target_accept: float | None = None
    hmc_leapfrog_steps: int = 20
    initial_step_size: float = 0.1

    def __post_init__(self) -> None:
        if not (0 <= int(self.seed) < 1 << 64):
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.n_chains < 1:
            raise ConfigError(f"n_chains must be >= 1, got {self.n_chains}")
        if self.n_draws < 1:
            raise ConfigError(f"n_draws must be >= 1, got {self.n_draws}")
        if self.n_warmup < 0:
            raise ConfigError(f"n_warmup must be >= 0, got {self.n_warmup}")
        if self.target_accept is not None and not 0.0 < self.target_accept < 1.0:
            raise ConfigError(f"target_accept must lie strictly in (0,1), got {self.target_accept}")
        if self.hmc_leapfrog_steps < 1:
            raise ConfigError(f"hmc_leapfrog_steps must be >= 1, got {self.hmc_leapfrog_steps}")
        if self.initial_step_size < 0:
            raise ConfigError(f"initial_step_size must be >= 0, got {self.initial_step_size}")
        object.__setattr__(self, "kernel", Kernel(self.kernel))

    def resolved_target_accept(self, dim: int) -> float:
        """Kernel-appropriate default when ``target_accept`` is None."""
        if self.target_accept is not None:
            return self.target_accept
        if self.kernel is Kernel.METROPOLIS:
            return 0.44 if dim == 1 else 0.234
        return 0.8


@dataclass(frozen=True)
class PosteriorSamples:
    """Post-warmup draws of one sampling run.

    ``draws`` has shape (n_chains, n_draws, n_params) and is locked
    read-only; instances are safe to share across threads.
    """

    param_names: tuple[str, ...]
    draws: np.ndarray
    config: ChainConfig | None
    acceptance_rates: tuple[float, ...] = ()
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "param_names", tuple(self.param_names))
        draws = np.ascontiguousarray(np.asarray(self.draws, dtype=float))
        if draws.ndim != 3:
            raise InputError(f"draws must be 3-d (chain, draw, parameter), got shape {draws.shape}")
        if draws.shape[2] != len(self.param_names):
            raise InputError(
                f"draws carry {draws.shape[2]} parameters but {len(self.param_names)} names given"
            )
        if not np.isfinite(draws).all():
            raise InputError("draws contain non-finite values")
        if self.config is not None:
            expected = (self.config.n_chains, self.config.n_draws, len(self.param_names))
            if draws.shape != expected:
                raise InputError(f"draws shape {draws.shape} does not match config {expected}")
        draws.flags.writeable = False
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "acceptance_rates", tuple(self.acceptance_rates))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_draws(self) -> int:
        return self.draws.shape[1]

    def index_of(self, name: str) -> int:
        try:
            return self.param_names.index(name)
        except ValueError:
            raise InputError(f"unknown parameter {name!r}; have {list(self.param_names)}") from None

    def draws_for(self, name: str) -> np.ndarray:
        """(n_chains, n_draws) view of one parameter."""
        return self.draws[:, :, self.index_of(name)]

    def pooled(self, name: str) -> np.ndarray:
        """All chains of one parameter flattened into a single vector."""
        return self.draws_for(name).reshape(-1)

    def to_csv(self) -> str:
        """Serialize to the documented layout: header ``chain,draw,<param...>``,
        one row per (chain, draw), floats rendered with full round-trip precision."""
        lines = ["chain,draw," + ",".join(self.param_names)]
        for c in range(self.n_chains):
            for d in range(self.n_draws):
                vals = ",".join(repr(float(v)) for v in self.draws[c, d])
                lines.append(f"{c},{d},{vals}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "PosteriorSamples":
        """Rebuild samples from :meth:`to_csv` output (config not recoverable)."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParseError("draw CSV is empty")
        header = lines[0].split(",")
        if header[:2] != ["chain", "draw"] or len(header) < 3:
            raise ParseError(f"draw CSV header must start 'chain,draw,<param...>', got {lines[0]!r}")
        names = tuple(header[2:])
        rows = []
        for i, ln in enumerate(lines[1:], start=2):
            parts = ln.split(",")
            if len(parts) != len(header):
                raise ParseError(f"line {i}: expected {len(header)} fields, got {len(parts)}")
            try:
                rows.append((int(parts[0]), int(parts[1]), [float(v) for v in parts[2:]]))
            except ValueError as exc:
                raise ParseError(f"line {i}: {exc}") from None
        n_chains = max(r[0] for r in rows) + 1
        n_draws = max(r[1] for r in rows) + 1
        if len(rows) != n_chains * n_draws:
            raise ParseError(
                f"draw CSV is incomplete: found {len(rows)} rows, "
                f"expected {n_chains} chains x {n_draws} draws = {n_chains * n_draws}"
            )
        draws = np.empty((n_chains, n_draws, len(names)))
        seen = np.zeros((n_chains, n_draws), dtype=bool)
        for c, d, vals in rows:
            if seen[c, d]:
                raise ParseError(f"duplicate row for chain {c}, draw {d}")
            seen[c, d] = True
            draws[c, d] = vals
        return PosteriorSamples(names, draws, config=None)


def finite_difference_gradient(log_density: LogDensity, x: np.ndarray) -> np.ndarray:
    """Central finite differences with per-coordinate step 1e-6 * max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = 1e-6 * max(1.0, abs(x[i]))
        bumped = x.copy()
        bumped[i] = x[i] + h
        up = log_density(bumped)
        bumped[i] = x[i] - h
        down = log_density(bumped)
        grad[i] = (up - down) / (2.0 * h)
    return grad


def sample(
    log_density: LogDensity,
    dim: int,
    init: Sequence[float] | np.ndarray,
    config: ChainConfig,
    *,
    grad: Gradient | None = None,
    scales: Sequence[float] | np.ndarray | None = None,
    param_names: Sequence[str] | None = None,
) -> PosteriorSamples:
    """Run ``config.n_chains`` independent chains and return post-warmup draws.

    ``scales`` optionally sets the initial per-dimension proposal scale
    (Metropolis) or the diagonal mass-matrix scale (HMC); it defaults to
    ``config.initial_step_size`` in every dimension. ``grad`` is only used
    by the HMC kernel and falls back to central finite differences.
    """
    init = np.asarray(init, dtype=float)
    if init.shape != (dim,):
        raise InputError(f"init has shape {init.shape}, expected ({dim},)")
    lp0 = float(log_density(init))
    if not math.isfinite(lp0):
        raise ConfigError(f"log_density(init) = {lp0!r}; the initial point must have finite density")

    if scales is None:
        scale_vec = np.full(dim, float(config.initial_step_size))
    else:
        scale_vec = np.asarray(scales, dtype=float)
        if scale_vec.shape != (dim,):
            raise InputError(f"scales has shape {scale_vec.shape}, expected ({dim},)")
        if (scale_vec < 0).any() or not np.isfinite(scale_vec).all():
            raise InputError("scales must be finite and non-negative")
        scale_vec = scale_vec.copy()

    if param_names is None:
        names = tuple(f"p{i}" for i in range(dim))
    else:
        names = tuple(param_names)
        if len(names) != dim:
            raise InputError(f"{len(names)} param_names given for dim {dim}")

    target = config.resolved_target_accept(dim)
    if config.kernel is Kernel.HMC and grad is None:
        grad = lambda x: finite_difference_gradient(log_density, x)  # noqa: E731

    all_draws = np.empty((config.n_chains, config.n_draws, dim))
    acc_rates = []
    warnings: list[str] = []
    for c in range(config.n_chains):
        rng = chain_rng(config.seed, c)
        # overdispersed start: one proposal-scale standard normal away from init,
        # falling back to init exactly if the jittered point has no support
        x0 = init + scale_vec * rng.standard_normal(dim)
        lp = float(log_density(x0))
        if not math.isfinite(lp):
            x0, lp = init.copy(), lp0
        if config.kernel is Kernel.METROPOLIS:
            draws, rate, warns = _metropolis_chain(log_density, x0, lp, config, scale_vec, target, rng, c)
        else:
            draws, rate, warns = _hmc_chain(log_density, grad, x0, lp, config, scale_vec, target, rng, c)
        all_draws[c] = draws
        acc_rates.append(rate)
        warnings.extend(warns)
    return PosteriorSamples(names, all_draws, config, tuple(acc_rates), tuple(warnings))


def _metropolis_chain(log_density, x, lp, config, scales, target, rng, chain_index):
    dim = x.size
    sigma_hat = scales.copy()
    lam = 1.0
    warns: list[str] = []
    # Welford accumulators over visited warmup states
    count = 0
    mean = np.zeros(dim)
    m2 = np.zeros(dim)
    window_accepts = 0
    window_len = 0
    stuck = False
    for _ in range(config.n_warmup):
        step = lam * sigma_hat
        accepted, x, lp = _rw_step(log_density, x, lp, step, rng)
        window_accepts += accepted
        window_len += 1
        count += 1
        delta = x - mean
        mean += delta / count
        m2 += delta * (x - mean)
        if window_len == ADAPT_WINDOW:
            rate = window_accepts / ADAPT_WINDOW
            if rate > target:
                lam *= math.exp(ADAPT_NUDGE)
            elif rate < target:
                lam *= math.exp(-ADAPT_NUDGE)
            if window_accepts == 0 and not stuck:
                stuck = True
                warns.append(
                    f"chain {chain_index}: no proposals accepted in a full "
                    f"{ADAPT_WINDOW}-draw warmup window (draw {count}); chain may be stuck"
                )
            if count > 1:
                var = m2 / (count - 1)
                sigma_hat = np.where(var > 0, np.sqrt(var), sigma_hat)
            window_accepts = 0
            window_len = 0
    step = lam * sigma_hat
    draws = np.empty((config.n_draws, dim))
    accepted_total = 0
    for j in range(config.n_draws):
        accepted, x, lp = _rw_step(log_density, x, lp, step, rng)
        accepted_total += accepted
        draws[j] = x
    return draws, accepted_total / config.n_draws, warns


def _rw_step(log_density, x, lp, step, rng):
    proposal = x + step * rng.standard_normal(x.size)
    lp_new = float(log_density(proposal))
    if math.isfinite(lp_new):
        ratio = lp_new - lp
        if ratio >= 0 or rng.random() < math.exp(ratio):
            return 1, proposal, lp_new
    return 0, x, lp


def _hmc_chain(log_density, grad, x, lp, config, scales, target, rng, chain_index):
    dim = x.size
    # diagonal mass matrix m_i = scales_i^-2; a scale of 0 freezes the coordinate
    inv_mass = scales**2
    momentum_sd = np.where(scales > 0, 1.0 / np.where(scales > 0, scales, 1.0), 0.0)
    eps = config.initial_step_size
    mu = math.log(10.0 * eps) if eps > 0 else 0.0
    log_eps_bar = math.log(eps) if eps > 0 else 0.0
    h_bar = 0.0
    warns: list[str] = []
    window_accepts = 0
    window_len = 0
    stuck = False
    for m in range(1, config.n_warmup + 1):
        alpha, accepted, x, lp = _hmc_step(log_density, grad, x, lp, eps, config.hmc_leapfrog_steps,
                                           inv_mass, momentum_sd, rng)
        if config.initial_step_size > 0:
            eta = 1.0 / (m + _DA_T0)
            h_bar = (1 - eta) * h_bar + eta * (target - alpha)
            log_eps = mu - math.sqrt(m) / _DA_GAMMA * h_bar
            log_eps = min(max(log_eps, -23.0), 7.0)  # keep exp() in a sane range
            w = m ** (-_DA_KAPPA)
            log_eps_bar = w * log_eps + (1 - w) * log_eps_bar
            eps = math.exp(log_eps)
        window_accepts += accepted
        window_len += 1
        if window_len == ADAPT_WINDOW:
            if window_accepts == 0 and not stuck:
                stuck = True
                warns.append(
                    f"chain {chain_index}: no proposals accepted in a full "
                    f"{ADAPT_WINDOW}-draw warmup window (draw {m}); chain may be stuck"
                )
            window_accepts = 0
            window_len = 0
    if config.n_warmup > 0 and config.initial_step_size > 0:
        eps = math.exp(log_eps_bar)
    draws = np.empty((config.n_draws, dim))
    accepted_total = 0
    for j in range(config.n_draws):
        _, accepted, x, lp = _hmc_step(log_density, grad, x, lp, eps, config.hmc_leapfrog_steps,
                                       inv_mass, momentum_sd, rng)
        accepted_total += accepted
        draws[j] = x
    return draws, accepted_total / config.n_draws, warns


def _hmc_step(log_density, grad, x, lp, eps, n_steps, inv_mass, momentum_sd, rng):
    """One leapfrog trajectory plus accept/reject. Returns (alpha, accepted, x, lp)."""
    p0 = momentum_sd * rng.standard_normal(x.size)
    u = rng.random()
    if eps == 0:
        return 1.0, 1, x, lp  # frozen-chain hook: trajectory never moves
    h0 = -lp + 0.5 * float(np.sum(p0 * p0 * inv_mass))
    q = x.copy()
    p = p0.copy()
    g = grad(q)
    if not np.isfinite(g).all():
        return 0.0, 0, x, lp
    p = p + 0.5 * eps * g
    lp_new = lp
    for step in range(n_steps):
        q = q + eps * inv_mass * p
        lp_new = float(log_density(q))
        if not math.isfinite(lp_new):
            return 0.0, 0, x, lp
        g = grad(q)
        if not np.isfinite(g).all():
            return 0.0, 0, x, lp
        p = p + (eps if step < n_steps - 1 else 0.5 * eps) * g
    h1 = -lp_new + 0.5 * float(np.sum(p * p * inv_mass))
    log_alpha = h0 - h1
    if math.isnan(log_alpha):
        return 0.0, 0, x, lp
    alpha = math.exp(min(0.0, log_alpha))
    if u < alpha:
        return alpha, 1, q, lp_new
    return alpha, 0, x, lp
