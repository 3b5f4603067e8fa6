"""Simulated radio medium: round-robin slots, per-receiver loss, failures and joins."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from prcnet.errors import ConfigError, InvalidEventError, NoLiveAgentsError

DEFAULT_SLOT_PERIOD = 0.5
DEFAULT_LOSS_PROB = 0.0


@dataclass(frozen=True)
class Broadcast:
    sender: int
    payload: float
    time: float


@dataclass(frozen=True)
class TopologyEvent:
    time: float
    agent: int
    kind: str  # "fail" or "join"
    initial_phase: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in ("fail", "join"):
            raise ConfigError(f"kind must be 'fail' or 'join', got {self.kind!r}", "network.topology_events")
        if self.kind == "join" and self.initial_phase is None:
            raise ConfigError("join events need an initial_phase", "network.topology_events")
        if not (math.isfinite(self.time) and self.time >= 0):
            raise ConfigError(f"event time must be >= 0, got {self.time!r}", "network.topology_events")


@dataclass(frozen=True)
class NetworkConfig:
    slot_period: float = DEFAULT_SLOT_PERIOD
    loss_prob: float = DEFAULT_LOSS_PROB
    topology_events: tuple[TopologyEvent, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slot_period) and self.slot_period > 0):
            raise ConfigError(f"must be > 0, got {self.slot_period!r}", "network.slot_period")
        if not (0.0 <= self.loss_prob <= 1.0):
            raise ConfigError(f"must be in [0, 1], got {self.loss_prob!r}", "network.loss_prob")
        times = [e.time for e in self.topology_events]
        if times != sorted(times):
            raise ConfigError("events must be sorted by time", "network.topology_events")
        object.__setattr__(self, "topology_events", tuple(self.topology_events))


def next_broadcaster(slot_index: int, live_ids: Iterable[int]) -> int:
    """Round-robin pick over the current live set in ascending id order."""
    ids = sorted(live_ids)
    if not ids:
        raise NoLiveAgentsError("no live agents left to broadcast")
    return ids[slot_index % len(ids)]


def deliver(b: Broadcast, receivers: Iterable[int], loss_prob: float, rng: random.Random) -> set[int]:
    """Drop each receiver independently with probability ``loss_prob``.

    Receivers are visited in ascending id order so the draws are reproducible.
    No random numbers are consumed when ``loss_prob`` is 0 or 1.
    """
    ids = sorted(set(receivers) - {b.sender})
    if loss_prob <= 0.0:
        return set(ids)
    if loss_prob >= 1.0:
        return set()
    return {r for r in ids if rng.random() >= loss_prob}


def apply_topology_event(live: set[int], event: TopologyEvent) -> set[int]:
    """Return the live set after ``event``; the input set is not modified."""
    if event.kind == "fail":
        if event.agent not in live:
            raise InvalidEventError(f"cannot fail agent {event.agent}: not live")
        return live - {event.agent}
    if event.agent in live:
        raise InvalidEventError(f"cannot join agent {event.agent}: already live")
    return live | {event.agent}
