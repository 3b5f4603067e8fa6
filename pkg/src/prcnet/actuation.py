"""Turning a commanded heading change into a timed rotation.

Three methods:

* ``OptimizedSpin`` -- size the turn first, then pick its direction; always
  spins at ``max_speed``.
* ``ConstantTime`` -- every turn lasts ``turn_duration``; speed varies with the
  size of the turn and is capped at ``max_speed`` (excess is truncated).
* ``ConstantFrequency`` -- every turn runs at ``angular_speed``; duration varies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

from prcnet.errors import ConfigError

DEFAULT_MAX_SPEED = math.pi / 2
DEFAULT_TURN_DURATION = 1.0
DEFAULT_ANGULAR_SPEED = math.pi / 6

# remaining time below this is treated as a finished turn
_DONE = 1e-12
# commanded changes smaller than this (radians) plan as no turn at all
_NEGLIGIBLE = 1e-12


def _positive(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"must be a positive finite number, got {value!r}", name)


@dataclass(frozen=True)
class OptimizedSpin:
    max_speed: float = DEFAULT_MAX_SPEED

    kind = "optimized_spin"

    def __post_init__(self) -> None:
        _positive(self.max_speed, "method.max_speed")


@dataclass(frozen=True)
class ConstantTime:
    turn_duration: float = DEFAULT_TURN_DURATION
    max_speed: float = DEFAULT_MAX_SPEED

    kind = "constant_time"

    def __post_init__(self) -> None:
        _positive(self.turn_duration, "method.turn_duration")
        _positive(self.max_speed, "method.max_speed")


@dataclass(frozen=True)
class ConstantFrequency:
    angular_speed: float = DEFAULT_ANGULAR_SPEED

    kind = "constant_frequency"

    def __post_init__(self) -> None:
        _positive(self.angular_speed, "method.angular_speed")


ActuationMethod = Union[OptimizedSpin, ConstantTime, ConstantFrequency]

METHOD_KINDS = {cls.kind: cls for cls in (OptimizedSpin, ConstantTime, ConstantFrequency)}


def default_methods() -> list[ActuationMethod]:
    return [OptimizedSpin(), ConstantTime(), ConstantFrequency()]


@dataclass(frozen=True)
class TurnProfile:
    """A rotation in progress.

    ``planned_delta`` is what the profile executes in total from creation;
    ``clamped`` marks a constant-time turn truncated by the speed cap.
    """

    direction: int = 0
    speed: float = 0.0
    remaining: float = 0.0
    planned_delta: float = 0.0
    clamped: bool = False

    @property
    def done(self) -> bool:
        return self.remaining <= 0.0


NULL_PROFILE = TurnProfile()


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def plan_turn(delta: float, method: ActuationMethod) -> TurnProfile:
    if not math.isfinite(delta):
        raise ValueError(f"delta must be finite, got {delta!r}")
    if abs(delta) < _NEGLIGIBLE:
        return NULL_PROFILE

    if isinstance(method, OptimizedSpin):
        magnitude = abs(delta)
        direction = _sign(delta)
        return TurnProfile(direction, method.max_speed, magnitude / method.max_speed, delta)

    if isinstance(method, ConstantTime):
        direction = _sign(delta)
        speed = abs(delta) / method.turn_duration
        if speed > method.max_speed:
            return TurnProfile(
                direction,
                method.max_speed,
                method.turn_duration,
                direction * method.max_speed * method.turn_duration,
                clamped=True,
            )
        return TurnProfile(direction, speed, method.turn_duration, delta)

    if isinstance(method, ConstantFrequency):
        return TurnProfile(
            _sign(delta), method.angular_speed, abs(delta) / method.angular_speed, delta
        )

    raise ConfigError(f"unknown actuation method {method!r}", "method")


def advance(profile: TurnProfile, dt: float) -> tuple[float, TurnProfile]:
    """Run ``profile`` for ``dt`` seconds; return (radians turned, updated profile)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if profile.done or profile.direction == 0:
        return 0.0, NULL_PROFILE
    step = min(dt, profile.remaining)
    executed = profile.direction * profile.speed * step
    remaining = profile.remaining - step
    if remaining <= _DONE:
        return executed, NULL_PROFILE
    return executed, replace(profile, remaining=remaining)
