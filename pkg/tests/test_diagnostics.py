"""Split R-hat and ESS against fixtures with known behavior."""

import numpy as np
import pytest

from crisiscurve import (
    DEGENERATE_CONSTANT,
    InputError,
    compute_diagnostics,
    effective_sample_size,
    split_rhat,
)

from conftest import make_samples


class TestSplitRhat:
    def test_iid_chains_near_one(self):
        rng = np.random.default_rng(100)
        samples = make_samples(rng.standard_normal((2, 2000)))
        rhat = split_rhat(samples)["p0"]
        assert 1.0 - 1e-9 <= rhat <= 1.05

    def test_constant_equal_chains_flagged(self):
        samples = make_samples(np.zeros((2, 100)))
        assert split_rhat(samples)["p0"] == DEGENERATE_CONSTANT

    def test_constant_distinct_chains_flagged(self):
        # within-chain variance is zero even though the chains disagree
        samples = make_samples(np.stack([np.zeros(100), np.full(100, 10.0)]))
        assert split_rhat(samples)["p0"] == DEGENERATE_CONSTANT

    def test_diverged_chains_large(self):
        rng = np.random.default_rng(4)
        chains = np.stack([rng.standard_normal(500), rng.standard_normal(500) + 20.0])
        assert split_rhat(make_samples(chains))["p0"] > 3.0

    def test_nonstationary_chain_detected(self):
        # a strong trend inside each chain inflates the split halves' disagreement
        trend = np.linspace(0.0, 5.0, 1000)
        rng = np.random.default_rng(5)
        chains = np.stack([trend + 0.1 * rng.standard_normal(1000) for _ in range(2)])
        assert split_rhat(make_samples(chains))["p0"] > 1.05

    def test_needs_four_draws(self):
        with pytest.raises(InputError):
            split_rhat(make_samples(np.zeros((2, 3))))


class TestEffectiveSampleSize:
    def test_independent_draws_near_nominal(self):
        rng = np.random.default_rng(7)
        n_total = 4 * 1500
        samples = make_samples(rng.standard_normal((4, 1500)))
        ess = effective_sample_size(samples)["p0"]
        assert abs(ess - n_total) <= 0.2 * n_total

    def test_alternating_chain_hits_clamp(self):
        chain = np.tile([1.0, -1.0], 500)
        samples = make_samples(np.stack([chain, -chain]))
        assert effective_sample_size(samples)["p0"] == 2 * 1000

    def test_ar1_autocorrelation_time(self):
        # AR(1) with coefficient 0.9 has ESS ~= N * (1 - 0.9) / (1 + 0.9)
        rng = np.random.default_rng(12)
        phi, n, m = 0.9, 5000, 4
        chains = np.empty((m, n))
        for c in range(m):
            x = 0.0
            innov = rng.standard_normal(n) * np.sqrt(1 - phi**2)
            for i in range(n):
                x = phi * x + innov[i]
                chains[c, i] = x
        ess = effective_sample_size(make_samples(chains))["p0"]
        expected = m * n * (1 - phi) / (1 + phi)
        assert expected / 2 <= ess <= expected * 2

    def test_never_exceeds_total_draws(self):
        rng = np.random.default_rng(9)
        for trial in range(5):
            samples = make_samples(rng.standard_normal((3, 200)))
            ess = effective_sample_size(samples)["p0"]
            assert 0 < ess <= 600

    def test_constant_chain_flagged(self):
        samples = make_samples(np.full((2, 50), 3.14))
        assert effective_sample_size(samples)["p0"] == DEGENERATE_CONSTANT

    def test_needs_four_draws(self):
        with pytest.raises(InputError):
            effective_sample_size(make_samples(np.zeros((2, 3))))


class TestReport:
    def test_report_collects_all_parameters(self):
        rng = np.random.default_rng(3)
        samples = make_samples(rng.standard_normal((2, 500, 3)), names=("a", "b", "c"))
        report = compute_diagnostics(samples)
        assert set(report.rhat) == {"a", "b", "c"}
        assert set(report.ess) == {"a", "b", "c"}
        assert report.worst_rhat() >= 1.0

    def test_worst_rhat_ignores_degenerate(self):
        chains = np.zeros((2, 100, 2))
        rng = np.random.default_rng(8)
        chains[:, :, 1] = rng.standard_normal((2, 100))
        report = compute_diagnostics(make_samples(chains, names=("const", "noisy")))
        assert report.rhat["const"] == DEGENERATE_CONSTANT
        assert isinstance(report.worst_rhat(), float)

    def test_json_dict_shape(self):
        rng = np.random.default_rng(2)
        report = compute_diagnostics(make_samples(rng.standard_normal((2, 100))))
        blob = report.to_json_dict()
        assert set(blob) == {"rhat", "ess", "acceptance_rates", "warnings"}
