"""Sampler engine contracts: target recovery, determinism, chain
independence, adaptation behavior, and the degenerate test hook."""

import math

import numpy as np
import pytest

from crisiscurve import (
    ChainConfig,
    ConfigError,
    InputError,
    Kernel,
    PosteriorSamples,
    effective_sample_size,
    sample,
)
from crisiscurve.sampler import finite_difference_gradient

from conftest import quick_config


def std_normal_1d(x):
    return -0.5 * float(x @ x)


def std_normal_grad(x):
    return -np.asarray(x)


def conjugate_logpost(x):
    # prior N(0,1); 10 observations of 1.0 with unit observation variance
    mu = float(x[0])
    return -0.5 * mu * mu - 0.5 * 10.0 * (1.0 - mu) ** 2


def pooled_mcse(samples, name="p0"):
    pooled = samples.pooled(name)
    ess = effective_sample_size(samples)[name]
    return pooled.std(ddof=1) / math.sqrt(ess)


class TestMetropolis:
    def test_standard_normal_mean(self):
        config = ChainConfig(seed=7, n_chains=4, n_warmup=1000, n_draws=2000)
        samples = sample(std_normal_1d, 1, [0.0], config)
        pooled = samples.pooled("p0")
        assert abs(pooled.mean()) < 3.0 * pooled_mcse(samples)

    def test_conjugate_posterior_mean(self):
        config = ChainConfig(seed=11, n_chains=4, n_warmup=1000, n_draws=2000)
        samples = sample(conjugate_logpost, 1, [0.0], config)
        # closed-form posterior: N(10/11, 1/11)
        assert abs(samples.pooled("p0").mean() - 10.0 / 11.0) < 3.0 * pooled_mcse(samples)

    def test_zero_scale_hook_freezes_chain(self):
        config = ChainConfig(seed=3, n_chains=3, n_warmup=0, n_draws=1, initial_step_size=0.0)
        samples = sample(std_normal_1d, 1, [0.25], config)
        assert np.array_equal(samples.draws, np.full((3, 1, 1), 0.25))

    def test_symmetric_target_skewness(self):
        config = ChainConfig(seed=21, n_chains=4, n_warmup=1000, n_draws=2000)
        samples = sample(std_normal_1d, 1, [0.0], config)
        pooled = samples.pooled("p0")
        z = (pooled - pooled.mean()) / pooled.std(ddof=1)
        skew = float(np.mean(z**3))
        ess = effective_sample_size(samples)["p0"]
        assert abs(skew) < 3.0 * math.sqrt(6.0 / ess)

    def test_acceptance_adapts_toward_target(self):
        config = ChainConfig(seed=5, n_chains=2, n_warmup=3000, n_draws=2000,
                             initial_step_size=0.01)
        samples = sample(std_normal_1d, 1, [0.0], config)
        for rate in samples.acceptance_rates:
            assert 0.25 < rate < 0.65  # around the 1-d target 0.44


class TestDeterminism:
    def test_bit_identical_reruns(self):
        config = quick_config()
        a = sample(conjugate_logpost, 1, [0.0], config)
        b = sample(conjugate_logpost, 1, [0.0], config)
        assert np.array_equal(a.draws, b.draws)
        assert a.acceptance_rates == b.acceptance_rates

    def test_chain_is_pure_function_of_seed_and_index(self):
        four = sample(conjugate_logpost, 1, [0.0], quick_config(n_chains=4))
        two = sample(conjugate_logpost, 1, [0.0], quick_config(n_chains=2))
        assert np.array_equal(four.draws[:2], two.draws)

    def test_hmc_bit_identical(self):
        config = quick_config(kernel=Kernel.HMC, initial_step_size=0.2)
        a = sample(std_normal_1d, 1, [0.0], config, grad=std_normal_grad)
        b = sample(std_normal_1d, 1, [0.0], config, grad=std_normal_grad)
        assert np.array_equal(a.draws, b.draws)


class TestHMC:
    def test_small_step_acceptance_near_one(self):
        # energy sanity: step -> 0 at fixed trajectory length gives acceptance -> 1
        config = ChainConfig(seed=13, n_chains=2, n_warmup=0, n_draws=200,
                             kernel=Kernel.HMC, initial_step_size=1e-3,
                             hmc_leapfrog_steps=10)
        samples = sample(std_normal_1d, 1, [0.0], config, grad=std_normal_grad)
        for rate in samples.acceptance_rates:
            assert rate > 0.99

    def test_recovers_gaussian_moments(self):
        config = ChainConfig(seed=17, n_chains=4, n_warmup=1000, n_draws=1500,
                             kernel=Kernel.HMC, initial_step_size=0.2)
        samples = sample(std_normal_1d, 1, [0.0], config, grad=std_normal_grad)
        pooled = samples.pooled("p0")
        assert abs(pooled.mean()) < 3.0 * pooled_mcse(samples)
        assert abs(pooled.std(ddof=1) - 1.0) < 0.1

    def test_finite_difference_fallback_samples(self):
        config = ChainConfig(seed=19, n_chains=2, n_warmup=500, n_draws=500,
                             kernel=Kernel.HMC, initial_step_size=0.2)
        samples = sample(std_normal_1d, 1, [0.0], config)  # no grad supplied
        assert abs(samples.pooled("p0").mean()) < 0.2
        assert min(samples.acceptance_rates) > 0.5

    def test_fd_gradient_matches_analytic(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.normal(size=3)
            fd = finite_difference_gradient(lambda v: -0.5 * float(v @ v), x)
            np.testing.assert_allclose(fd, -x, rtol=1e-5, atol=1e-7)


class TestValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            sample(std_normal_1d, 2, [0.0], quick_config())

    def test_nonfinite_init_density(self):
        with pytest.raises(ConfigError):
            sample(lambda x: float("-inf"), 1, [0.0], quick_config())

    def test_config_invariants(self):
        with pytest.raises(ConfigError):
            ChainConfig(seed=1, n_draws=0)
        with pytest.raises(ConfigError):
            ChainConfig(seed=1, n_chains=0)
        with pytest.raises(ConfigError):
            ChainConfig(seed=1, target_accept=1.0)
        with pytest.raises(ConfigError):
            ChainConfig(seed=-1)

    def test_stuck_chain_warning(self):
        # density is flat at the init point and impossible everywhere else
        init = np.array([0.0])

        def spike(x):
            return 0.0 if abs(float(x[0])) < 1e-12 else float("-inf")

        config = ChainConfig(seed=23, n_chains=1, n_warmup=100, n_draws=10,
                             initial_step_size=1.0)
        samples = sample(spike, 1, init, config)
        assert any("stuck" in w for w in samples.warnings)
        assert np.array_equal(samples.draws.ravel(), np.zeros(10))


class TestSerialization:
    def test_csv_round_trip_is_exact(self):
        samples = sample(conjugate_logpost, 1, [0.0], quick_config())
        text = samples.to_csv()
        back = PosteriorSamples.from_csv(text)
        assert back.param_names == samples.param_names
        assert np.array_equal(back.draws, samples.draws)

    def test_truncated_csv_reports_row_counts(self):
        samples = sample(conjugate_logpost, 1, [0.0], quick_config())
        lines = samples.to_csv().splitlines()
        truncated = "\n".join(lines[:-1]) + "\n"
        with pytest.raises(Exception, match="rows"):
            PosteriorSamples.from_csv(truncated)

    def test_draws_are_immutable(self):
        samples = sample(conjugate_logpost, 1, [0.0], quick_config())
        with pytest.raises(ValueError):
            samples.draws[0, 0, 0] = 99.0
