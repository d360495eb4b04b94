"""Calibration against classical slotted ALOHA.

With a single replica per packet there is no diversity and no cancellation
gain, so the simulated scheme must reproduce the textbook throughput curve
T(G) = G * exp(-G), peaking at 1/e for G = 1. A quick check that the whole
pipeline (arrivals, placement, decoding, accounting) is wired correctly.
"""

import numpy as np

from craloha import (
    DegreeDistribution,
    SchemeConfig,
    TrafficConfig,
    run_simulation,
    sa_throughput,
    throughput,
)

degree1 = DegreeDistribution(((1, 1.0),))
scheme = SchemeConfig(
    mode="SW", window_slots=1, degree_distribution=degree1, receiver_memory_slots=10
)

print(f"{'G':>5} {'simulated':>10} {'G*exp(-G)':>10} {'diff':>8}")
for g in np.arange(0.2, 2.01, 0.2):
    traffic = TrafficConfig(
        mean_arrival_rate=float(g), total_slots=100_000, warmup_slots=100, rng_seed=1
    )
    t = throughput(run_simulation(scheme, traffic))
    print(f"{g:5.1f} {t:10.4f} {sa_throughput(float(g)):10.4f} {t - sa_throughput(float(g)):+8.4f}")

print("\npeak is near G=1 at about 1/e =", round(1 / np.e, 4))
