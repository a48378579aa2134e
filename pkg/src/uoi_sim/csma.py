"""Decentralized threshold-plus-contention scheduling.

Each terminal compares its own update index against a local dynamic
threshold; terminals above it contend for the K sub-channels inside a
window of at most W mini-slots.  A contender with backoff l listens for l
mini-slots, tracking the lowest sub-channel not yet reserved, then sends a
reservation intention there.  Contenders that pick the same mini-slot all
target the same sub-channel and collide; the channel still reads as
occupied to later listeners and the colliders' data transmissions are
wasted.  The threshold drifts down when sub-channels go idle and up when
the window closes faster than its expected length K/(K+1) * (W+1).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

# Marker for a sub-channel whose reservation mini-slot carried two or more
# simultaneous intentions.
COLLISION = -1


@dataclass(frozen=True)
class ContentionConfig:
    w: int
    k: int
    mini_slot_us: float = 10.0

    def __post_init__(self):
        if self.k < 1 or self.w < 1:
            raise ValueError("w and k must be positive")
        if self.w < self.k:
            raise ValueError(f"need w >= k so {self.k} winners fit in the window")
        if self.mini_slot_us <= 0.0:
            raise ValueError("mini_slot_us must be positive")

    @property
    def slot_scale(self) -> float:
        """Slot length in ms: 1 ms data phase plus W mini-slots of 10 us."""
        return 1.0 + self.w / 100.0


@dataclass(frozen=True)
class ThresholdState:
    j_th: float
    delta_j: float

    def __post_init__(self):
        if self.j_th < 0.0:
            raise ValueError("threshold must be nonnegative")
        if self.delta_j <= 0.0:
            raise ValueError("delta_j must be positive")


@dataclass(frozen=True)
class ContentionOutcome:
    """reservations maps sub-channel (1-based) to terminal id or COLLISION."""

    reservations: dict[int, int]
    window_len: int
    idle_channels: int
    collided: tuple[int, ...] = ()

    def winners(self) -> list[int]:
        return [t for t in self.reservations.values() if t != COLLISION]


def activate(indices: np.ndarray, threshold: ThresholdState) -> list[int]:
    """Ids whose update index strictly exceeds the threshold."""
    return np.flatnonzero(np.asarray(indices) > threshold.j_th).tolist()


def contend(active: Iterable[int], cfg: ContentionConfig,
            draw_backoff: Callable[[int], int]) -> ContentionOutcome:
    """Resolve one contention window.

    draw_backoff(tid) must return that terminal's uniform backoff on
    {0, ..., W-1}; the fleet simulator wires it to per-terminal streams.

    Because every waiting terminal has heard every earlier intention, all
    terminals that fire in the same mini-slot target the same lowest idle
    sub-channel, so each mini-slot claims at most one channel.
    """
    by_mini_slot: dict[int, list[int]] = defaultdict(list)
    for tid in active:
        l = draw_backoff(tid)
        if not 0 <= l < cfg.w:
            raise ValueError(f"backoff {l} outside [0, {cfg.w - 1}]")
        by_mini_slot[l + 1].append(tid)

    reservations: dict[int, int] = {}
    collided: list[int] = []
    window_len = cfg.w
    for mini_slot in sorted(by_mini_slot):
        channel = len(reservations) + 1
        senders = by_mini_slot[mini_slot]
        if len(senders) == 1:
            reservations[channel] = senders[0]
        else:
            reservations[channel] = COLLISION
            collided.extend(sorted(senders))
        if len(reservations) == cfg.k:
            window_len = mini_slot
            break
    return ContentionOutcome(
        reservations=reservations,
        window_len=window_len,
        idle_channels=cfg.k - len(reservations),
        collided=tuple(collided),
    )


def expected_window(k: int, w: int) -> float:
    """Mean closing mini-slot with exactly k distinct-backoff contenders."""
    if k > w:
        raise ValueError(f"k = {k} exceeds window size w = {w}")
    if k < 1 or w < 1:
        raise ValueError("k and w must be positive")
    return k / (k + 1.0) * (w + 1.0)


def adapt_threshold(state: ThresholdState, outcome: ContentionOutcome,
                    cfg: ContentionConfig) -> ThresholdState:
    """Idle channels mean too few contenders (lower the bar); a window that
    closed early means too many (raise it).  Clamped at zero."""
    if outcome.idle_channels > 0:
        j_th = max(0.0, state.j_th - state.delta_j)
    elif outcome.window_len < expected_window(cfg.k, cfg.w):
        j_th = state.j_th + state.delta_j
    else:
        j_th = state.j_th
    return ThresholdState(j_th=j_th, delta_j=state.delta_j)


def default_delta_j(omega_bar: np.ndarray, sigma2: np.ndarray) -> float:
    """Expected per-slot growth of average UoI when nothing is delivered."""
    return float(np.mean(np.asarray(omega_bar) * np.asarray(sigma2)))
