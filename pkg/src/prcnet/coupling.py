"""PRC-style response rules for synchronization and desynchronization.

Sync: a receiver moves a fraction ``gain`` along the shortest arc toward the
heading it just heard. Desync: a receiver moves toward the midpoint of its
circular neighbours, as far as it knows them from its table of last-heard
headings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from prcnet.errors import ConfigError, InvalidInputError
from prcnet.phase import TWO_PI, circ_dist, wrap

MODES = ("sync", "desync")


@dataclass(frozen=True)
class CouplingConfig:
    mode: str
    gain: float

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"must be one of {MODES}, got {self.mode!r}", "coupling.mode")
        check_gain(self.gain, "coupling.gain")


def check_gain(gain: float, field_name: str = "gain") -> None:
    if not (isinstance(gain, (int, float)) and math.isfinite(gain) and 0.0 < gain <= 1.0):
        raise ConfigError(f"must be in (0, 1], got {gain!r}", field_name)


@dataclass
class PhaseTable:
    """Last-heard heading of every peer, plus this agent's own entry.

    ``entries`` maps agent id to ``(phase, time heard)``.
    """

    own_id: int
    entries: dict[int, tuple[float, float]] = field(default_factory=dict)

    @classmethod
    def primed(cls, own_id: int, phase: float, t: float = 0.0) -> PhaseTable:
        return cls(own_id, {own_id: (wrap(phase), t)})

    def hear(self, agent_id: int, phase: float, t: float) -> None:
        self.entries[agent_id] = (wrap(phase), t)

    def set_own(self, phase: float, t: float) -> None:
        self.entries[self.own_id] = (wrap(phase), t)

    def forget(self, agent_id: int) -> None:
        self.entries.pop(agent_id, None)

    def phases(self) -> dict[int, float]:
        return {k: v[0] for k, v in self.entries.items()}


def sync_response(own: float, heard: float, gain: float) -> float:
    check_gain(gain)
    return gain * circ_dist(own, heard)


def desync_target(own_id: int, phases: dict[int, float]) -> float:
    """Heading that would centre ``own_id`` between its circular neighbours.

    ``phases`` maps agent id to heading and must contain ``own_id``.
    """
    if own_id not in phases:
        raise InvalidInputError(f"agent {own_id} missing from phase table")
    n = len(phases)
    own = phases[own_id]
    if n == 1:
        return own
    if n == 2:
        other = next(p for k, p in phases.items() if k != own_id)
        return wrap(other + math.pi)
    ring = sorted(phases, key=lambda k: (phases[k], k))
    i = ring.index(own_id)
    ordered = [phases[k] for k in ring]
    # gap[k] runs counter-clockwise from ring[k] to ring[k + 1]; the last one wraps
    gaps = [b - a for a, b in zip(ordered, ordered[1:])]
    gaps.append(TWO_PI - (ordered[-1] - ordered[0]))
    forward_gap = gaps[i - 1] + gaps[i]
    return wrap(ordered[i - 1] + forward_gap / 2.0)


def desync_response(own_id: int, table: PhaseTable | dict[int, float], gain: float) -> float:
    check_gain(gain)
    phases = table.phases() if isinstance(table, PhaseTable) else dict(table)
    if own_id not in phases:
        raise InvalidInputError(f"agent {own_id} missing from phase table")
    target = desync_target(own_id, phases)
    return gain * circ_dist(phases[own_id], target)
