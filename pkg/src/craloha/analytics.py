"""Closed-form placement/delay/throughput quantities and a peeling oracle.

The per-slot placement probability is evaluated term by term from the
sequential-placement factors (it telescopes to degree/horizon for both the
framed and the sliding-window rule), and the fixpoint oracle re-decodes
small placement sets by exhaustive rescans with no memory bound.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Union

import numpy as np
from scipy import stats

from .model import AccessMode, DegreeDistribution, SchemeConfig, TimeConfig, mean_degree

Placements = Union[Mapping[int, Iterable[int]], Iterable[Iterable[int]]]


def p_i(i: int, n: int) -> float:
    """Probability the i-th replica of a packet lands in a given slot out of
    n, given the slot holds none of the packet's earlier replicas."""
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= n, got i={i}, n={n}")
    return 1.0 / (n - i + 1)


def p_not(j: int, n: int) -> float:
    """Probability that none of j sequentially placed replicas occupies a
    given slot out of n."""
    if not 0 <= j <= n:
        raise ValueError(f"need 0 <= j <= n, got j={j}, n={n}")
    return (n - j) / n


def p_first(window_slots: int, n: int) -> float:
    """Probability that a packet's ready slot fell within the window_slots-1
    slots before a given slot, so its window still covers that slot."""
    return (window_slots - 1) / n


def p_uins_fr_terms(degree: int, n_frame: int) -> list[float]:
    """Per-replica contributions to the framed per-slot placement probability."""
    if not 1 <= degree <= n_frame:
        raise ValueError(f"need 1 <= degree <= n_frame, got {degree}, {n_frame}")
    return [p_not(i - 1, n_frame) * p_i(i, n_frame) for i in range(1, degree + 1)]


def p_uins_fr(degree: int, n_frame: int) -> float:
    """Probability a framed packet puts a replica in a given frame slot;
    the term-by-term sum telescopes to degree/n_frame."""
    return sum(p_uins_fr_terms(degree, n_frame))


def p_uins_sw_terms(degree: int, horizon: int, window_slots: int) -> list[float]:
    """Per-replica contributions for the sliding-window rule.

    Term 0 is the first-replica term 1/horizon; terms j=1..degree-1 carry
    the window factor (window_slots-1)/horizon times the in-window placement
    factors over m = window_slots-1 candidate slots. When the window is
    saturated (degree == window_slots) the last factor pair degenerates to
    0 * 1/0; its algebraic product is 1/m, which is used directly.
    """
    if not 1 <= degree <= window_slots:
        raise ValueError(f"need 1 <= degree <= window_slots, got {degree}, {window_slots}")
    if window_slots > horizon:
        raise ValueError(f"window {window_slots} exceeds horizon {horizon}")
    terms = [p_i(1, horizon)]
    if degree == 1:
        return terms
    m = window_slots - 1
    factor = p_first(window_slots, horizon)
    for j in range(1, degree):
        inner = 1.0 / m if j == m else p_not(j, m) * p_i(j + 1, m)
        terms.append(factor * inner)
    return terms


def p_uins_sw(degree: int, horizon: int, window_slots: int) -> float:
    """Probability a sliding-window packet puts a replica in a given slot,
    averaged over a ready slot uniform on the preceding horizon; equals
    degree/horizon, the framed value."""
    return sum(p_uins_sw_terms(degree, horizon, window_slots))


def slot_degree_pmf(
    d: DegreeDistribution,
    load: float,
    n_users: int | None = None,
    max_count: int | None = None,
) -> np.ndarray:
    """PMF of the number of instances landing in one slot.

    With a finite population this is Binomial(n_users, mean_degree*load/n_users);
    with n_users=None it is the infinite-population Poisson(mean_degree*load)
    limit, truncated at max_count (default: far enough that the clipped tail
    is below 1e-12).
    """
    if load < 0:
        raise ValueError(f"load must be >= 0, got {load}")
    mean = mean_degree(d) * load
    if n_users is None:
        if max_count is None:
            max_count = int(stats.poisson.isf(1e-13, mean)) + 1 if mean > 0 else 1
        return stats.poisson.pmf(np.arange(max_count + 1), mean)
    if n_users < 1:
        raise ValueError(f"n_users must be >= 1, got {n_users}")
    p = mean / n_users
    if p > 1:
        raise ValueError(f"per-user slot probability {p} > 1; increase n_users")
    k_hi = n_users if max_count is None else min(max_count, n_users)
    return stats.binom.pmf(np.arange(k_hi + 1), n_users, p)


def delay_bounds(scheme: SchemeConfig, time: TimeConfig) -> tuple[float, float]:
    """(min_ms, max_ms) of the decode delay support.

    FR: the minimum is exclusive (delay is strictly above one propagation
    plus one slot) and the maximum inclusive at two frame durations past the
    propagation delay. SW: both bounds inclusive, the maximum set by the
    receiver memory span.
    """
    t_p = time.propagation_delay_ms
    t_s = time.slot_duration_ms
    lo = t_p + t_s
    if scheme.mode is AccessMode.FR:
        return (lo, t_p + 2 * scheme.window_slots * t_s)
    return (lo, t_p + scheme.receiver_memory_slots * t_s)


def sa_throughput(g: float) -> float:
    """Classical slotted-ALOHA throughput G*exp(-G), the degree-1 oracle."""
    if g < 0:
        raise ValueError(f"load must be >= 0, got {g}")
    return g * math.exp(-g)


def _normalize_placements(placements: Placements) -> dict[int, frozenset[int]]:
    if isinstance(placements, Mapping):
        items = placements.items()
    else:
        items = enumerate(placements)
    return {int(pid): frozenset(int(s) for s in slots) for pid, slots in items}


def oracle_decode(placements: Placements, verify_residual: bool = True) -> frozenset[int]:
    """Peeling fixpoint of a placement set by repeated full rescans.

    No memory bound and no ordering assumptions; returns the unique maximal
    decodable packet-id set. Intended for exhaustive verification at small
    sizes (tens of packets); cost grows with packets * slots * rounds.
    With verify_residual the undecoded remainder is checked to be a
    stopping set: every occupied residual slot holds at least two instances.
    """
    pending = _normalize_placements(placements)
    decoded: set[int] = set()
    while pending:
        occupancy: dict[int, int] = {}
        for slots in pending.values():
            for s in slots:
                occupancy[s] = occupancy.get(s, 0) + 1
        newly = [pid for pid, slots in pending.items() if any(occupancy[s] == 1 for s in slots)]
        if not newly:
            break
        decoded.update(newly)
        for pid in newly:
            del pending[pid]
    if verify_residual and pending:
        occupancy = {}
        for slots in pending.values():
            for s in slots:
                occupancy[s] = occupancy.get(s, 0) + 1
        bad = [s for s, c in occupancy.items() if c < 2]
        if bad:
            raise RuntimeError(f"fixpoint residual is not a stopping set: singleton slots {bad}")
    return frozenset(decoded)


def residual_placements(placements: Placements, decoded: Iterable[int]) -> dict[int, frozenset[int]]:
    """Placements of the packets not in ``decoded`` (the stopping set)."""
    decoded = set(decoded)
    return {pid: slots for pid, slots in _normalize_placements(placements).items() if pid not in decoded}
