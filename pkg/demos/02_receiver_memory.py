"""How much slot memory does the gateway need?

Sliding-window decoding feeds on cancellation cascades that reach backwards
in time, so the receiver must hold more than one window's worth of slots.
This sweep shows the regimes for 2-replica CRDSA with N_sw = N_f = 100:

  - N_rx = N_sw: cascades are cut short, worse than the framed scheme;
  - N_rx = 2 N_sw: roughly on par with framed;
  - N_rx = 5 N_sw: saturated - more memory buys nothing, the remaining
    losses are stopping sets, not memory evictions.
"""

import numpy as np

from craloha import SchemeConfig, TrafficConfig, named_distribution, run_simulation, throughput

SLOTS = 50_000
LAMS = np.arange(0.45, 0.80, 0.05)


def sweep(mode, n_rx=None):
    out = []
    for lam in LAMS:
        scheme = SchemeConfig(
            mode=mode,
            window_slots=100,
            degree_distribution=named_distribution("crdsa2"),
            receiver_memory_slots=n_rx,
        )
        traffic = TrafficConfig(
            mean_arrival_rate=float(lam), total_slots=SLOTS, warmup_slots=1000, rng_seed=7
        )
        out.append(throughput(run_simulation(scheme, traffic)))
    return out


curves = {"FR (frame=100)": sweep("FR")}
for n_rx in (100, 200, 500, 1000):
    curves[f"SW N_rx={n_rx}"] = sweep("SW", n_rx)

header = f"{'lambda':>7} " + " ".join(f"{name:>14}" for name in curves)
print(header)
for i, lam in enumerate(LAMS):
    print(f"{lam:7.2f} " + " ".join(f"{curves[name][i]:14.4f}" for name in curves))

print("\npeaks:")
for name, curve in curves.items():
    print(f"  {name:>14}: {max(curve):.4f}")
