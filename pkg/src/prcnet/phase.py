"""Circular arithmetic on headings and the two state-error metrics.

Phases are plain floats in ``[0, 2*pi)``; signed deltas live in ``(-pi, pi]``.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from prcnet.errors import InvalidInputError

TWO_PI = 2.0 * math.pi
TOL = 1e-9


def wrap(x: float) -> float:
    """Reduce ``x`` modulo 2*pi into ``[0, 2*pi)``."""
    if not math.isfinite(x):
        raise InvalidInputError(f"phase must be finite, got {x!r}")
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative number plus 2*pi can round up to exactly 2*pi
    if r >= TWO_PI:
        r = 0.0
    return r


def circ_dist(src: float, dst: float) -> float:
    """Signed shortest rotation taking ``src`` onto ``dst``, in ``(-pi, pi]``.

    A separation of exactly pi resolves to ``+pi``.
    """
    # IEEE remainder is exact and odd, so circ_dist(a, b) == -circ_dist(b, a)
    d = math.remainder(dst - src, TWO_PI)
    if d == -math.pi:
        d = math.pi
    return d


def _sorted_phases(phases: Iterable[float]) -> list[float]:
    out = sorted(wrap(p) for p in phases)
    if not out:
        raise InvalidInputError("metric needs at least one phase")
    return out


def circular_gaps(phases: Sequence[float]) -> list[float]:
    """Counter-clockwise gaps between circularly adjacent sorted phases.

    The gaps sum to 2*pi. A single phase yields one gap of 2*pi.
    """
    s = _sorted_phases(phases)
    gaps = [b - a for a, b in zip(s, s[1:])]
    gaps.append(TWO_PI - (s[-1] - s[0]))
    return gaps


def containing_arc(phases: Sequence[float]) -> float:
    """Length of the smallest arc that covers every phase.

    Computed as 2*pi minus the largest circular gap, so it is 0 exactly when
    all phases coincide.
    """
    arc = TWO_PI - max(circular_gaps(phases))
    return max(arc, 0.0)


def splay_error(phases: Sequence[float]) -> float:
    """Total absolute deviation of the circular gaps from ``2*pi/N``."""
    gaps = circular_gaps(phases)
    ideal = TWO_PI / len(gaps)
    return math.fsum(abs(g - ideal) for g in gaps)


def state_metric(mode: str, phases: Sequence[float]) -> float:
    """Mode-appropriate error: containing arc for sync, splay error for desync."""
    if mode == "sync":
        return containing_arc(phases)
    if mode == "desync":
        return splay_error(phases)
    raise InvalidInputError(f"unknown mode {mode!r}")
