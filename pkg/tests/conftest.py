from types import SimpleNamespace

import pytest

from eigenmarket import SectorSpec, SyntheticSpec, generate, loading_for_correlation
from helpers import NOISE, pipeline

NOISE74_SEED = 20240811


@pytest.fixture(scope="session")
def noise74():
    """Pure-noise panel at the reference size (74 instruments, 5473 returns)."""
    spec = SyntheticSpec(n=74, t=5473, seed=NOISE74_SEED, noise_sd=NOISE)
    panel = generate(spec)
    rp, cm, sd = pipeline(panel)
    return SimpleNamespace(spec=spec, panel=panel, rp=rp, cm=cm, sd=sd)


@pytest.fixture(scope="session")
def one_factor():
    """One-factor panel with uniform loadings giving pairwise rho = 0.3."""
    beta = loading_for_correlation(0.3, 0.0, NOISE)
    spec = SyntheticSpec(n=20, t=2000, seed=5, market_beta=beta, noise_sd=NOISE)
    panel = generate(spec)
    rp, cm, sd = pipeline(panel)
    return SimpleNamespace(spec=spec, panel=panel, rp=rp, cm=cm, sd=sd)


def collective_market_sectors(n, market_members, market_rho=0.2):
    """A collective mode planted as one large instrument group."""
    return SectorSpec(
        members=market_members,
        loading=loading_for_correlation(market_rho, 0.0, NOISE),
    )
