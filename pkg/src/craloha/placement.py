"""Replica slot selection under framed (FR) and sliding-window (SW) rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrameGrid:
    """Partition of the timeline into frames of frame_length slots."""

    frame_length: int
    origin: int = 0

    def frame_index(self, slot: int) -> int:
        return (slot - self.origin) // self.frame_length

    def frame_start(self, frame: int) -> int:
        return self.origin + frame * self.frame_length

    def tx_frame_start(self, arrival_slot: int) -> int:
        """Start of the frame a packet ready at ``arrival_slot`` transmits in.

        Always the first frame start strictly after the ready slot: a packet
        ready exactly at a frame boundary waits one full frame, which keeps
        every decode delay strictly above the one-slot floor.
        """
        return self.origin + self.frame_length * (self.frame_index(arrival_slot) + 1)


def sample_without_replacement(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """k distinct uniform draws from range(n), unsorted.

    Rejection for sparse draws (typical: degree << window), partial shuffle
    when k is a sizable fraction of n. Both are exact.
    """
    if k == 0:
        return np.empty(0, dtype=np.int64)
    if k > n:
        raise ValueError(f"cannot draw {k} distinct values from range({n})")
    if 3 * k >= n:
        return rng.permutation(n)[:k].astype(np.int64, copy=False)
    picked: set[int] = set()
    while len(picked) < k:
        picked.update(rng.integers(0, n, size=k - len(picked)).tolist())
    return np.fromiter(picked, dtype=np.int64, count=k)


def place_fr(arrival_slot: int, degree: int, grid: FrameGrid, rng: np.random.Generator) -> tuple[int, ...]:
    """Replica slots for a framed packet: ``degree`` distinct slots drawn
    uniformly without replacement from the packet's transmission frame."""
    n_f = grid.frame_length
    if degree > n_f:
        raise ValueError(f"degree {degree} exceeds frame of {n_f} slots")
    start = grid.tx_frame_start(arrival_slot)
    offsets = sample_without_replacement(rng, n_f, degree)
    offsets.sort()
    return tuple(int(start + o) for o in offsets)


def place_sw(arrival_slot: int, degree: int, window_slots: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Replica slots for a sliding-window packet.

    The first replica is sent in the ready slot itself; the remaining
    degree-1 replicas land uniformly without replacement in the next
    window_slots-1 slots.
    """
    if degree > window_slots:
        raise ValueError(f"degree {degree} exceeds window of {window_slots} slots")
    if degree == 1:
        return (arrival_slot,)
    offsets = sample_without_replacement(rng, window_slots - 1, degree - 1)
    offsets.sort()
    return (arrival_slot, *(int(arrival_slot + 1 + o) for o in offsets))


def shared_window_slots(arrival_gap_slots: int, window_slots: int) -> int:
    """Number of eligible slots shared by two packets whose ready slots are
    ``arrival_gap_slots`` apart; same-slot arrivals share the full window."""
    if arrival_gap_slots < 0:
        raise ValueError(f"arrival gap must be >= 0, got {arrival_gap_slots}")
    return max(0, window_slots - arrival_gap_slots)
