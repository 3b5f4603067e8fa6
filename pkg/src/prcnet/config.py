"""Experiment configuration and its JSON form.

The JSON document mirrors :class:`ExperimentConfig` field for field. Unknown
keys are rejected; omitted optional fields take their documented defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Union

from prcnet.actuation import (
    METHOD_KINDS,
    ActuationMethod,
    ConstantFrequency,
    ConstantTime,
    OptimizedSpin,
)
from prcnet.coupling import CouplingConfig
from prcnet.errors import ConfigError
from prcnet.network import NetworkConfig, TopologyEvent
from prcnet.phase import wrap

DEFAULT_DT = 0.05
DEFAULT_EPSILON = 0.05
DEFAULT_HOLD = 5.0
DEFAULT_TAIL_FRACTION = 0.25

INIT_KINDS = ("equally_spaced", "identical", "explicit", "random_uniform")


@dataclass(frozen=True)
class InitSpec:
    kind: str = "equally_spaced"
    angle: float = 0.0
    phases: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in INIT_KINDS:
            raise ConfigError(f"must be one of {INIT_KINDS}, got {self.kind!r}", "init.kind")
        if self.kind == "explicit":
            if self.phases is None:
                raise ConfigError("explicit init needs a phases list", "init.phases")
            object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
            if not all(math.isfinite(p) for p in self.phases):
                raise ConfigError("phases must be finite", "init.phases")
        if not math.isfinite(self.angle):
            raise ConfigError("angle must be finite", "init.angle")


@dataclass(frozen=True)
class AnalysisConfig:
    """Thresholds used to summarise a run."""

    epsilon: float = DEFAULT_EPSILON
    hold: float = DEFAULT_HOLD
    tail_fraction: float = DEFAULT_TAIL_FRACTION

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ConfigError(f"must be > 0, got {self.epsilon!r}", "analysis.epsilon")
        if not self.hold >= 0:
            raise ConfigError(f"must be >= 0, got {self.hold!r}", "analysis.hold")
        if not 0 < self.tail_fraction <= 1:
            raise ConfigError(f"must be in (0, 1], got {self.tail_fraction!r}", "analysis.tail_fraction")


@dataclass(frozen=True)
class ExperimentConfig:
    n_agents: int
    coupling: CouplingConfig
    method: ActuationMethod = field(default_factory=OptimizedSpin)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    init: InitSpec = field(default_factory=InitSpec)
    dt: float = DEFAULT_DT
    t_end: float = 120.0
    seed: int = 0
    heading_noise_std: float = 0.0
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self) -> None:
        if isinstance(self.n_agents, bool) or not isinstance(self.n_agents, int) or self.n_agents < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.n_agents!r}", "n_agents")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"must be > 0, got {self.dt!r}", "dt")
        if self.dt > self.network.slot_period:
            raise ConfigError(
                f"dt ({self.dt}) must not exceed network.slot_period ({self.network.slot_period})", "dt"
            )
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError(f"must be > 0, got {self.t_end!r}", "t_end")
        if self.t_end < self.network.slot_period:
            raise ConfigError("t_end must be at least network.slot_period", "t_end")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"must be an unsigned 64-bit integer, got {self.seed!r}", "seed")
        if not (math.isfinite(self.heading_noise_std) and self.heading_noise_std >= 0):
            raise ConfigError(f"must be >= 0, got {self.heading_noise_std!r}", "heading_noise_std")
        if self.init.kind == "explicit" and len(self.init.phases) != self.n_agents:
            raise ConfigError(
                f"has {len(self.init.phases)} entries, expected n_agents = {self.n_agents}", "init.phases"
            )
        _check_events(self.n_agents, self.network.topology_events)

    @property
    def mode(self) -> str:
        return self.coupling.mode

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(self, seed=seed)

    def with_method(self, method: ActuationMethod) -> ExperimentConfig:
        return replace(self, method=method)

    def with_gain(self, gain: float) -> ExperimentConfig:
        return replace(self, coupling=CouplingConfig(self.coupling.mode, gain))


def _check_events(n_agents: int, events) -> None:
    live = set(range(1, n_agents + 1))
    for e in events:
        if e.kind == "fail":
            if e.agent not in live:
                raise ConfigError(f"fail at t={e.time} targets agent {e.agent}, which is not live",
                                  "network.topology_events")
            live.discard(e.agent)
        else:
            if e.agent in live:
                raise ConfigError(f"join at t={e.time} targets agent {e.agent}, which is already live",
                                  "network.topology_events")
            live.add(e.agent)


# --- JSON <-> dataclasses -------------------------------------------------

def _take(d: dict, path: str, allowed: set[str], required: set[str] = frozenset()) -> dict:
    if not isinstance(d, dict):
        raise ConfigError("must be an object", path or "<root>")
    unknown = set(d) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError("unknown key", f"{path}.{key}" if path else key)
    missing = required - set(d)
    if missing:
        key = sorted(missing)[0]
        raise ConfigError("required key missing", f"{path}.{key}" if path else key)
    return d


def _num(d: dict, key: str, path: str, default: Any = None) -> Any:
    if key not in d:
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"must be a number, got {v!r}", f"{path}.{key}" if path else key)
    return float(v)


def _int(d: dict, key: str, path: str, default: Any = None) -> Any:
    if key not in d:
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"must be an integer, got {v!r}", f"{path}.{key}" if path else key)
    return v


def _method_from_dict(d: dict) -> ActuationMethod:
    _take(d, "method", {"kind", "max_speed", "turn_duration", "angular_speed"}, {"kind"})
    kind = d["kind"]
    if kind not in METHOD_KINDS:
        raise ConfigError(f"must be one of {sorted(METHOD_KINDS)}, got {kind!r}", "method.kind")
    fields = {
        "optimized_spin": ("max_speed",),
        "constant_time": ("turn_duration", "max_speed"),
        "constant_frequency": ("angular_speed",),
    }[kind]
    extra = set(d) - {"kind", *fields}
    if extra:
        raise ConfigError(f"not a parameter of {kind}", f"method.{sorted(extra)[0]}")
    kwargs = {k: _num(d, k, "method") for k in fields if k in d}
    return METHOD_KINDS[kind](**kwargs)


def method_to_dict(m: ActuationMethod) -> dict:
    if isinstance(m, OptimizedSpin):
        return {"kind": m.kind, "max_speed": m.max_speed}
    if isinstance(m, ConstantTime):
        return {"kind": m.kind, "turn_duration": m.turn_duration, "max_speed": m.max_speed}
    if isinstance(m, ConstantFrequency):
        return {"kind": m.kind, "angular_speed": m.angular_speed}
    raise TypeError(m)


def _event_from_dict(d: dict, i: int) -> TopologyEvent:
    path = f"network.topology_events[{i}]"
    _take(d, path, {"time", "agent", "kind", "initial_phase"}, {"time", "agent", "kind"})
    phase = _num(d, "initial_phase", path)
    if d["kind"] == "fail" and phase is not None:
        raise ConfigError("fail events take no initial_phase", f"{path}.initial_phase")
    return TopologyEvent(
        time=_num(d, "time", path),
        agent=_int(d, "agent", path),
        kind=d["kind"],
        initial_phase=None if phase is None else wrap(phase),
    )


def config_from_dict(d: dict) -> ExperimentConfig:
    _take(
        d,
        "",
        {"n_agents", "coupling", "method", "network", "init", "dt", "t_end", "seed",
         "heading_noise_std", "analysis"},
        {"n_agents", "coupling"},
    )
    c = _take(d["coupling"], "coupling", {"mode", "gain"}, {"mode", "gain"})
    coupling = CouplingConfig(c["mode"], _num(c, "gain", "coupling"))

    method = _method_from_dict(d["method"]) if "method" in d else OptimizedSpin()

    n = _take(d.get("network", {}), "network", {"slot_period", "loss_prob", "topology_events"})
    events = n.get("topology_events", [])
    if not isinstance(events, list):
        raise ConfigError("must be a list", "network.topology_events")
    network = NetworkConfig(
        slot_period=_num(n, "slot_period", "network", NetworkConfig.slot_period),
        loss_prob=_num(n, "loss_prob", "network", NetworkConfig.loss_prob),
        topology_events=tuple(_event_from_dict(e, i) for i, e in enumerate(events)),
    )

    i = _take(d.get("init", {}), "init", {"kind", "angle", "phases"})
    kind = i.get("kind", "equally_spaced")
    if "angle" in i and kind != "identical":
        raise ConfigError("only used by identical init", "init.angle")
    if "phases" in i and kind != "explicit":
        raise ConfigError("only used by explicit init", "init.phases")
    phases = i.get("phases")
    if phases is not None and not isinstance(phases, list):
        raise ConfigError("must be a list", "init.phases")
    init = InitSpec(kind=kind, angle=_num(i, "angle", "init", 0.0), phases=phases)

    a = _take(d.get("analysis", {}), "analysis", {"epsilon", "hold", "tail_fraction"})
    analysis = AnalysisConfig(
        epsilon=_num(a, "epsilon", "analysis", DEFAULT_EPSILON),
        hold=_num(a, "hold", "analysis", DEFAULT_HOLD),
        tail_fraction=_num(a, "tail_fraction", "analysis", DEFAULT_TAIL_FRACTION),
    )

    if "t_end" not in d:
        raise ConfigError("required key missing", "t_end")
    return ExperimentConfig(
        n_agents=_int(d, "n_agents", ""),
        coupling=coupling,
        method=method,
        network=network,
        init=init,
        dt=_num(d, "dt", "", DEFAULT_DT),
        t_end=_num(d, "t_end", ""),
        seed=_int(d, "seed", "", 0),
        heading_noise_std=_num(d, "heading_noise_std", "", 0.0),
        analysis=analysis,
    )


def config_to_dict(cfg: ExperimentConfig) -> dict:
    init: dict[str, Any] = {"kind": cfg.init.kind}
    if cfg.init.kind == "identical":
        init["angle"] = cfg.init.angle
    elif cfg.init.kind == "explicit":
        init["phases"] = list(cfg.init.phases)
    events = []
    for e in cfg.network.topology_events:
        ev: dict[str, Any] = {"time": e.time, "agent": e.agent, "kind": e.kind}
        if e.kind == "join":
            ev["initial_phase"] = e.initial_phase
        events.append(ev)
    return {
        "n_agents": cfg.n_agents,
        "coupling": {"mode": cfg.coupling.mode, "gain": cfg.coupling.gain},
        "method": method_to_dict(cfg.method),
        "network": {
            "slot_period": cfg.network.slot_period,
            "loss_prob": cfg.network.loss_prob,
            "topology_events": events,
        },
        "init": init,
        "dt": cfg.dt,
        "t_end": cfg.t_end,
        "seed": cfg.seed,
        "heading_noise_std": cfg.heading_noise_std,
        "analysis": {
            "epsilon": cfg.analysis.epsilon,
            "hold": cfg.analysis.hold,
            "tail_fraction": cfg.analysis.tail_fraction,
        },
    }


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a JSON config file.

    Raises ConfigError for malformed JSON or invalid fields; OSError
    propagates for unreadable files.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON ({exc})", "<file>") from exc
    return config_from_dict(data)
