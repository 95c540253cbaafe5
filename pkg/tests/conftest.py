from pathlib import Path

import numpy as np
import pytest

from crisiscurve import ChainConfig, PosteriorSamples

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def make_samples(chains: np.ndarray, names=("p0",), config=None) -> PosteriorSamples:
    """Wrap a (n_chains, n_draws) or (n_chains, n_draws, n_params) array."""
    chains = np.asarray(chains, dtype=float)
    if chains.ndim == 2:
        chains = chains[:, :, None]
    return PosteriorSamples(tuple(names), chains, config)


def quick_config(**overrides) -> ChainConfig:
    base = dict(seed=1234, n_chains=2, n_warmup=200, n_draws=300)
    base.update(overrides)
    return ChainConfig(**base)
