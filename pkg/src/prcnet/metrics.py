"""Trace records and the statistics derived from them."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

from prcnet.errors import InvalidInputError
from prcnet.phase import state_metric

_TIME_TOL = 1e-9
# amplitudes closer than this count as a tie in method orderings
ORDER_TOL = 1e-9


@dataclass(frozen=True)
class TraceRecord:
    """System snapshot at the end of one tick.

    ``phases`` holds ``(agent_id, phase, alive)`` for every agent that exists;
    ``metric`` is computed over the live ones only. ``commands`` lists
    ``(agent_id, commanded_delta, clamped)`` for agents that planned a new
    turn during the tick.
    """

    t: float
    phases: tuple[tuple[int, float, bool], ...]
    metric: float
    events: tuple[str, ...] = ()
    broadcaster: Optional[int] = None
    commands: tuple[tuple[int, float, bool], ...] = ()

    @property
    def live_phases(self) -> list[float]:
        return [p for _, p, alive in self.phases if alive]

    @property
    def live_count(self) -> int:
        return sum(1 for _, _, alive in self.phases if alive)


@dataclass(frozen=True)
class Trace:
    mode: str
    slot_period: float
    records: tuple[TraceRecord, ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.records)

    def times(self) -> list[float]:
        return [r.t for r in self.records]

    def metrics(self) -> list[float]:
        return [r.metric for r in self.records]


@dataclass(frozen=True)
class Summary:
    convergence_time: Optional[float]
    rounds_to_converge: Optional[int]
    steady_state_amplitude: float
    final_metric: float
    truncated: bool = False

    def as_dict(self) -> dict:
        return {
            "convergence_time": self.convergence_time,
            "rounds_to_converge": self.rounds_to_converge,
            "steady_state_amplitude": self.steady_state_amplitude,
            "final_metric": self.final_metric,
            "truncated": self.truncated,
        }


def _series(trace) -> tuple[list[float], list[float]]:
    if isinstance(trace, Trace):
        return trace.times(), trace.metrics()
    times = [t for t, _ in trace]
    return times, [m for _, m in trace]


def convergence_time(trace, epsilon: float, hold: float) -> Optional[float]:
    """Earliest record time from which the metric stays below ``epsilon`` for ``hold`` seconds.

    ``trace`` is a :class:`Trace` or a sequence of ``(t, metric)`` pairs.
    Returns None when no such time exists with the whole hold window inside
    the trace.
    """
    if epsilon <= 0:
        raise InvalidInputError(f"epsilon must be > 0, got {epsilon!r}")
    if hold < 0:
        raise InvalidInputError(f"hold must be >= 0, got {hold!r}")
    times, values = _series(trace)
    if not times:
        raise InvalidInputError("empty trace")

    t_last = times[-1]
    # first index after the below-threshold run that contains i
    run_end = len(times)
    candidate = None
    for i in range(len(times) - 1, -1, -1):
        if values[i] >= epsilon:
            run_end = i
            continue
        window_end = times[i] + hold
        if run_end == len(times):
            ok = window_end <= t_last + _TIME_TOL
        else:
            ok = times[run_end] > window_end + _TIME_TOL
        if ok:
            candidate = times[i]
    return candidate


def steady_state_amplitude(trace, tail_fraction: float = 0.25) -> float:
    """Peak-to-peak metric over the final ``tail_fraction`` of records."""
    _, values = _series(trace)
    if not values:
        raise InvalidInputError("empty trace")
    if not 0 < tail_fraction <= 1:
        raise InvalidInputError(f"tail_fraction must be in (0, 1], got {tail_fraction!r}")
    k = max(1, math.ceil(len(values) * tail_fraction - 1e-9))
    tail = values[-k:]
    return max(tail) - min(tail)


def rounds_for(conv_time: Optional[float], slot_period: float) -> Optional[int]:
    if conv_time is None:
        return None
    return max(0, math.ceil(conv_time / slot_period - 1e-9))


def summarize(trace: Trace, epsilon: float, hold: float, tail_fraction: float) -> Summary:
    ct = convergence_time(trace, epsilon, hold)
    return Summary(
        convergence_time=ct,
        rounds_to_converge=rounds_for(ct, trace.slot_period),
        steady_state_amplitude=steady_state_amplitude(trace, tail_fraction),
        final_metric=trace.records[-1].metric,
        truncated=trace.truncated,
    )


def recompute_metric(mode: str, record: TraceRecord) -> float:
    return state_metric(mode, record.live_phases)


def check_trace(trace: Trace, tol: float = 1e-9) -> None:
    """Raise AssertionError if any stored metric disagrees with its phases."""
    for r in trace.records:
        m = recompute_metric(trace.mode, r)
        if abs(m - r.metric) > tol:
            raise AssertionError(f"t={r.t}: stored metric {r.metric} != recomputed {m}")


# --- cross-method comparison ----------------------------------------------

@dataclass(frozen=True)
class MethodStats:
    method: str
    n_runs: int
    converged_fraction: float
    convergence_time_mean: Optional[float]
    convergence_time_min: Optional[float]
    convergence_time_max: Optional[float]
    censored_convergence_time_mean: float
    amplitude_mean: float
    amplitude_min: float
    amplitude_max: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def method_stats(name: str, summaries: Sequence[Summary], horizon: float) -> MethodStats:
    """Aggregate per-seed summaries for one method.

    Runs that never converge count as ``horizon`` in the censored mean.
    """
    cts = [s.convergence_time for s in summaries if s.convergence_time is not None]
    amps = [s.steady_state_amplitude for s in summaries]
    censored = [horizon if s.convergence_time is None else s.convergence_time for s in summaries]
    return MethodStats(
        method=name,
        n_runs=len(summaries),
        converged_fraction=len(cts) / len(summaries),
        convergence_time_mean=statistics.fmean(cts) if cts else None,
        convergence_time_min=min(cts) if cts else None,
        convergence_time_max=max(cts) if cts else None,
        censored_convergence_time_mean=statistics.fmean(censored),
        amplitude_mean=statistics.fmean(amps),
        amplitude_min=min(amps),
        amplitude_max=max(amps),
    )


@dataclass
class Comparison:
    rows: list[MethodStats]
    orderings: dict[str, float]
    seeds: list[int]
    summaries: dict[str, list[Summary]] = field(default_factory=dict)

    def row(self, method: str) -> MethodStats:
        return next(r for r in self.rows if r.method == method)

    def as_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "rows": [r.as_dict() for r in self.rows],
            "orderings": dict(self.orderings),
        }


def _run_summary(config) -> Summary:
    from prcnet.engine import run

    return run(config)[1]


def _orderings(per_method: dict[str, list[Summary]], horizon: float) -> dict[str, float]:
    def ct(s: Summary) -> float:
        return horizon if s.convergence_time is None else s.convergence_time

    names = list(per_method)
    n = len(next(iter(per_method.values())))
    out: dict[str, float] = {}
    for a in names:
        for b in names:
            if a == b:
                continue
            pairs = list(zip(per_method[a], per_method[b]))
            out[f"amplitude({a}) >= amplitude({b})"] = sum(
                x.steady_state_amplitude >= y.steady_state_amplitude - ORDER_TOL for x, y in pairs) / n
            out[f"convergence_time({a}) >= convergence_time({b})"] = sum(
                ct(x) >= ct(y) for x, y in pairs) / n
    return out


def compare_methods(base_config, seeds: Sequence[int], methods=None, jobs: int = 1) -> Comparison:
    """Run ``base_config`` under each actuation method for every seed.

    ``methods`` defaults to the three methods at their default parameters.
    With ``jobs > 1`` the runs are spread over a process pool; results do not
    depend on ``jobs``.
    """
    from prcnet.actuation import default_methods

    seeds = list(seeds)
    if not seeds:
        raise InvalidInputError("compare_methods needs at least one seed")
    methods = list(methods) if methods is not None else default_methods()
    configs = [(m.kind, base_config.with_method(m).with_seed(s)) for m in methods for s in seeds]

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_run_summary, [c for _, c in configs]))
    else:
        summaries = [_run_summary(c) for _, c in configs]

    per_method: dict[str, list[Summary]] = {m.kind: [] for m in methods}
    for (kind, _), s in zip(configs, summaries):
        per_method[kind].append(s)

    horizon = base_config.t_end
    rows = [method_stats(kind, ss, horizon) for kind, ss in per_method.items()]
    return Comparison(rows, _orderings(per_method, horizon), seeds, per_method)
