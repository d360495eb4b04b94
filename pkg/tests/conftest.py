import numpy as np
import pytest

from craloha import DegreeDistribution, SchemeConfig, TrafficConfig, named_distribution


def make_scheme(mode="SW", window=100, dist="crdsa2", n_rx=None, i_max=50):
    if isinstance(dist, str):
        dist = named_distribution(dist)
    if n_rx is None and mode == "SW":
        n_rx = 5 * window
    return SchemeConfig(
        mode=mode,
        window_slots=window,
        degree_distribution=dist,
        receiver_memory_slots=n_rx,
        max_ic_iterations=i_max,
    )


def make_traffic(lam=0.5, total=20_000, warmup=None, seed=1, window=100):
    if warmup is None:
        warmup = min(10 * window, total - 1)
    return TrafficConfig(
        mean_arrival_rate=lam, total_slots=total, warmup_slots=warmup, rng_seed=seed
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def degree1():
    return DegreeDistribution(((1, 1.0),))
