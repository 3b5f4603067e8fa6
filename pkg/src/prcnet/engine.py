"""Fixed-step simulation loop.

Each tick runs, in order: turn integration, at most one broadcast slot (with
receivers replanning from their current heading), topology events, and one
trace record. A run is a pure function of its config; all randomness comes
from one ``random.Random`` seeded with ``config.seed``.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from prcnet.actuation import TurnProfile, advance, plan_turn
from prcnet.config import ExperimentConfig
from prcnet.coupling import PhaseTable, desync_response, sync_response
from prcnet.errors import NoLiveAgentsError
from prcnet.metrics import Summary, Trace, TraceRecord, summarize
from prcnet.network import Broadcast, TopologyEvent, apply_topology_event, deliver, next_broadcaster
from prcnet.phase import TWO_PI, state_metric, wrap

log = logging.getLogger(__name__)

# slack for deciding whether a scheduled time falls before the end of a tick
_EPS = 1e-9


@dataclass
class AgentState:
    id: int
    phase: float
    profile: Optional[TurnProfile] = None
    table: PhaseTable = None
    alive: bool = True

    def __post_init__(self) -> None:
        if self.table is None:
            self.table = PhaseTable.primed(self.id, self.phase)


def initial_phases(config: ExperimentConfig, rng: random.Random) -> list[float]:
    n = config.n_agents
    init = config.init
    if init.kind == "equally_spaced":
        return [wrap(TWO_PI * i / n) for i in range(n)]
    if init.kind == "identical":
        return [wrap(init.angle)] * n
    if init.kind == "explicit":
        return [wrap(p) for p in init.phases]
    return [wrap(rng.uniform(0.0, TWO_PI)) for _ in range(n)]


@dataclass
class Simulation:
    config: ExperimentConfig
    agents: dict[int, AgentState]
    rng: random.Random
    tick: int = 0
    next_slot: int = 0
    next_event: int = 0
    records: list[TraceRecord] = field(default_factory=list)
    truncated: bool = False

    @property
    def time(self) -> float:
        return round(self.tick * self.config.dt, 12)

    @property
    def live_ids(self) -> list[int]:
        return sorted(a.id for a in self.agents.values() if a.alive)

    def metric(self) -> float:
        return state_metric(self.config.mode, [self.agents[i].phase for i in self.live_ids])

    def snapshot(self, events=(), broadcaster=None, commands=()) -> TraceRecord:
        return TraceRecord(
            t=self.time,
            phases=tuple((a.id, a.phase, a.alive) for a in sorted(self.agents.values(), key=lambda a: a.id)),
            metric=self.metric(),
            events=tuple(events),
            broadcaster=broadcaster,
            commands=tuple(commands),
        )

    # -- the four phases of a tick ----------------------------------------

    def _integrate(self, dt: float) -> None:
        for a in self.agents.values():
            if not a.alive or a.profile is None:
                continue
            executed, a.profile = advance(a.profile, dt)
            if executed:
                a.phase = wrap(a.phase + executed)
            if a.profile.done:
                a.profile = None

    def _respond(self, agent: AgentState, b: Broadcast) -> tuple[float, TurnProfile]:
        cfg = self.config
        agent.table.hear(b.sender, b.payload, b.time)
        agent.table.set_own(agent.phase, b.time)
        if cfg.mode == "sync":
            delta = sync_response(agent.phase, b.payload, cfg.coupling.gain)
        else:
            delta = desync_response(agent.id, agent.table, cfg.coupling.gain)
        return delta, plan_turn(delta, cfg.method)

    def _broadcast_slot(self, slot_time: float, events: list[str], commands: list) -> int:
        cfg = self.config
        live = self.live_ids
        sender = next_broadcaster(self.next_slot, live)
        payload = self.agents[sender].phase
        if cfg.heading_noise_std > 0:
            payload = wrap(payload + self.rng.gauss(0.0, cfg.heading_noise_std))
        b = Broadcast(sender, payload, slot_time)
        receivers = [i for i in live if i != sender]
        got = sorted(deliver(b, receivers, cfg.network.loss_prob, self.rng))
        events.append(f"broadcast {sender}")
        if got:
            events.append(f"deliver {sender}->{','.join(map(str, got))}")
        lost = [i for i in receivers if i not in got]
        if lost:
            events.append(f"lost {sender}->{','.join(map(str, lost))}")
        for rid in got:
            agent = self.agents[rid]
            delta, profile = self._respond(agent, b)
            if agent.profile is not None:
                events.append(f"preempt {rid}")
            agent.profile = None if profile.done else profile
            commands.append((rid, delta, profile.clamped))
            if profile.clamped:
                events.append(f"clamp {rid}")
        return sender

    def _apply_event(self, e: TopologyEvent, events: list[str]) -> None:
        live = set(self.live_ids)
        apply_topology_event(live, e)  # raises InvalidEventError on mismatch
        if e.kind == "fail":
            a = self.agents[e.agent]
            a.alive = False
            a.profile = None
            for other in self.agents.values():
                if other.alive:
                    other.table.forget(e.agent)
            events.append(f"fail {e.agent}")
        else:
            self.agents[e.agent] = AgentState(e.agent, wrap(e.initial_phase), table=PhaseTable.primed(
                e.agent, e.initial_phase, self.time))
            events.append(f"join {e.agent}")

    def step(self) -> bool:
        """Advance one tick; return False once the run can no longer continue."""
        cfg = self.config
        t1 = (self.tick + 1) * cfg.dt
        events: list[str] = []
        commands: list[tuple[int, float, bool]] = []
        broadcaster = None

        self._integrate(cfg.dt)

        period = cfg.network.slot_period
        while self.next_slot * period < t1 - _EPS:
            slot_time = self.next_slot * period
            try:
                broadcaster = self._broadcast_slot(slot_time, events, commands)
            except NoLiveAgentsError:
                self.truncated = True
                return False
            self.next_slot += 1

        evs = cfg.network.topology_events
        while self.next_event < len(evs) and evs[self.next_event].time < t1 - _EPS:
            self._apply_event(evs[self.next_event], events)
            self.next_event += 1

        self.tick += 1
        if not self.live_ids:
            log.info("all agents failed at t=%.3f; truncating run", t1)
            self.truncated = True
            return False
        self.records.append(self.snapshot(events, broadcaster, commands))
        return True

    @property
    def n_ticks(self) -> int:
        return max(1, math.ceil(self.config.t_end / self.config.dt - _EPS))

    def trace(self) -> Trace:
        return Trace(self.config.mode, self.config.network.slot_period, tuple(self.records), self.truncated)


def init_experiment(config: ExperimentConfig) -> Simulation:
    rng = random.Random(config.seed)
    phases = initial_phases(config, rng)
    agents = {i + 1: AgentState(i + 1, p) for i, p in enumerate(phases)}
    # starting headings are set by the operator, so every agent knows all of them
    for a in agents.values():
        for b in agents.values():
            a.table.hear(b.id, b.phase, 0.0)
    sim = Simulation(config, agents, rng)
    sim.records.append(sim.snapshot())
    return sim


def simulate(config: ExperimentConfig) -> Trace:
    sim = init_experiment(config)
    for _ in range(sim.n_ticks):
        if not sim.step():
            break
    return sim.trace()


def run(config: ExperimentConfig) -> tuple[Trace, Summary]:
    trace = simulate(config)
    a = config.analysis
    return trace, summarize(trace, a.epsilon, a.hold, a.tail_fraction)
