"""TOML scenario files and the built-in scenarios.

Schema (all sections required unless noted)::

    name = "my-run"                         # optional

    [[agents]]                              # one table per missile
    r0 = 16000.0                            # initial range, m
    v0 = 350.0                              # initial speed, m/s
    phi0 = -0.09                            # initial heading error, rad

    [graph]                                 # either [graph] ...
    edges = [[1, 2], [2, 3, 0.5]]           # 1-based, optional weight

    [[schedule]]                            # ... or a list of segments
    t_start = 0.0
    edges = [[1, 2], [2, 3]]

    [surface]
    alpha1 = 0.25
    alpha2 = 2.0
    mu = 0.001
    m1n1 = [11, 9]
    p1q1 = [5, 7]

    [guidance]
    k1 = 0.265
    k2 = 2.0
    k3 = 0.25
    k4 = 2.0
    eta1 = 1.5
    epsilon = 1.5
    omega = 0.5
    m2n2 = [13, 11]
    p2q2 = [5, 7]
    m3n3 = [7, 5]
    p3q3 = [3, 5]

    [target]                                # optional, default stationary
    kind = "sinusoidal"
    amplitude = 3.5
    frequency = 0.5
    phase = 3.665191429188092
    position = [15000.0, 15000.0]
    velocity = [100.0, 100.0]

    [sim]                                   # optional, defaults shown
    dt = 0.001
    t_max = 120.0
    r_stop = 1.0
    r_floor = 0.1
    mode = "delayed"                        # or "fixed-point"
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import tomli
import tomli_w

from .engagement import InitialCondition, TargetKind, TargetModel
from .fntsms import OddRatio, SurfaceParams
from .guidance import ControlMode, GuidanceParams
from .simengine import SimConfig
from .topology import CommGraph, TopologySchedule


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class SimBlock:
    dt: float = 1e-3
    t_max: float = 120.0
    r_stop: float = 1.0
    r_floor: float = 0.1
    mode: ControlMode = ControlMode.DELAYED


@dataclass(frozen=True)
class Scenario:
    agents: tuple[InitialCondition, ...]
    schedule: TopologySchedule
    guidance: GuidanceParams
    target: TargetModel = field(default_factory=TargetModel)
    sim: SimBlock = field(default_factory=SimBlock)
    name: str = ""

    def __post_init__(self) -> None:
        if len(self.agents) != self.schedule.n:
            raise ScenarioError(
                f"{len(self.agents)} agents but the communication graph has {self.schedule.n} nodes"
            )

    @property
    def n(self) -> int:
        return len(self.agents)

    def config(self, **overrides: Any) -> SimConfig:
        sim = replace(self.sim, **{k: v for k, v in overrides.items() if v is not None})
        return SimConfig(
            guidance=self.guidance,
            schedule=self.schedule,
            target=self.target,
            mode=sim.mode,
            dt=sim.dt,
            t_max=sim.t_max,
            r_stop=sim.r_stop,
            r_floor=sim.r_floor,
        )


# Five missiles on a ring; any connected topology is admissible.
SEC4_EDGES = [[1, 2], [2, 3], [3, 4], [4, 5], [5, 1]]

SEC4_AGENTS = (
    InitialCondition(16000.0, 350.0, -0.09),
    InitialCondition(15050.0, 320.0, 0.10),
    InitialCondition(13990.0, 270.0, 0.11),
    InitialCondition(13950.0, 300.0, -0.15),
    InitialCondition(15000.0, 331.0, 0.12),
)

SEC4_GUIDANCE = GuidanceParams(
    k1=0.265, k2=2.0, k3=0.25, k4=2.0,
    ratio_m2n2=OddRatio(13, 11), ratio_p2q2=OddRatio(5, 7),
    ratio_m3n3=OddRatio(7, 5), ratio_p3q3=OddRatio(3, 5),
    eta1=1.5, epsilon=1.5, omega=0.5,
    surface=SurfaceParams(
        alpha1=0.25, alpha2=2.0, ratio_m1n1=OddRatio(11, 9), ratio_p1q1=OddRatio(5, 7), mu=0.001
    ),
)

SEC4_MANEUVER = TargetModel(
    kind=TargetKind.SINUSOIDAL, amplitude=3.5, frequency=0.5, phase=7.0 * math.pi / 6.0,
    position=(15000.0, 15000.0), velocity=(100.0, 100.0),
)


def _builtin(name: str) -> Scenario:
    schedule = TopologySchedule.constant(CommGraph.from_edges(5, SEC4_EDGES))
    target = SEC4_MANEUVER if name == "paper-sec4-maneuver" else TargetModel()
    return Scenario(SEC4_AGENTS, schedule, SEC4_GUIDANCE, target, SimBlock(), name)


BUILTINS = ("paper-sec4", "paper-sec4-maneuver")


# ---------------------------------------------------------------- parsing

def _get(table: dict, key: str, where: str, kind=float, default: Any = ...) -> Any:
    if key not in table:
        if default is ...:
            raise ScenarioError(f"{where}.{key}: missing")
        return default
    value = table[key]
    try:
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            return float(value)
        if kind is str:
            if not isinstance(value, str):
                raise TypeError
            return value
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}.{key}: invalid value {value!r}") from exc


def _ratio(table: dict, key: str, where: str) -> OddRatio:
    value = table.get(key)
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise ScenarioError(f"{where}.{key}: expected [numerator, denominator] integers, got {value!r}")
    try:
        return OddRatio(*value)
    except ValueError as exc:
        raise ScenarioError(f"{where}.{key}: {exc}") from exc


def _graph(n: int, table: dict, where: str) -> CommGraph:
    edges = table.get("edges")
    if not isinstance(edges, list):
        raise ScenarioError(f"{where}.edges: expected a list of [i, j] pairs")
    try:
        return CommGraph.from_edges(n, edges)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{where}.edges: {exc}") from exc


def _wrap(where: str, build):
    try:
        return build()
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def from_dict(data: dict, source: str = "<scenario>") -> Scenario:
    agents_raw = data.get("agents")
    if not isinstance(agents_raw, list) or not agents_raw:
        raise ScenarioError(f"{source}: [[agents]]: at least one agent table is required")
    agents = tuple(
        _wrap(f"{source}: agents[{i}]", lambda a=a, i=i: InitialCondition(
            _get(a, "r0", f"agents[{i}]"), _get(a, "v0", f"agents[{i}]"), _get(a, "phi0", f"agents[{i}]")))
        for i, a in enumerate(agents_raw)
    )
    n = len(agents)

    if "graph" in data and "schedule" in data:
        raise ScenarioError(f"{source}: give either [graph] or [[schedule]], not both")
    if "graph" in data:
        schedule = _wrap(f"{source}: graph", lambda: TopologySchedule.constant(_graph(n, data["graph"], "graph")))
    elif "schedule" in data:
        segs = []
        for k, seg in enumerate(data["schedule"]):
            where = f"schedule[{k}]"
            segs.append((_get(seg, "t_start", where), _graph(n, seg, where)))
        schedule = _wrap(f"{source}: schedule", lambda: TopologySchedule(tuple(segs)))
    else:
        raise ScenarioError(f"{source}: missing [graph] or [[schedule]]")

    sf = data.get("surface")
    gd = data.get("guidance")
    if not isinstance(sf, dict):
        raise ScenarioError(f"{source}: missing [surface]")
    if not isinstance(gd, dict):
        raise ScenarioError(f"{source}: missing [guidance]")
    surface = _wrap(f"{source}: surface", lambda: SurfaceParams(
        alpha1=_get(sf, "alpha1", "surface"), alpha2=_get(sf, "alpha2", "surface"),
        ratio_m1n1=_ratio(sf, "m1n1", "surface"), ratio_p1q1=_ratio(sf, "p1q1", "surface"),
        mu=_get(sf, "mu", "surface")))
    guidance = _wrap(f"{source}: guidance", lambda: GuidanceParams(
        k1=_get(gd, "k1", "guidance"), k2=_get(gd, "k2", "guidance"),
        k3=_get(gd, "k3", "guidance"), k4=_get(gd, "k4", "guidance"),
        ratio_m2n2=_ratio(gd, "m2n2", "guidance"), ratio_p2q2=_ratio(gd, "p2q2", "guidance"),
        ratio_m3n3=_ratio(gd, "m3n3", "guidance"), ratio_p3q3=_ratio(gd, "p3q3", "guidance"),
        eta1=_get(gd, "eta1", "guidance"), epsilon=_get(gd, "epsilon", "guidance"),
        omega=_get(gd, "omega", "guidance"), surface=surface))

    tg = data.get("target", {})
    target = _wrap(f"{source}: target", lambda: TargetModel(
        kind=TargetKind(_get(tg, "kind", "target", str, "stationary")),
        amplitude=_get(tg, "amplitude", "target", default=0.0),
        frequency=_get(tg, "frequency", "target", default=0.0),
        phase=_get(tg, "phase", "target", default=0.0),
        position=tuple(tg.get("position", (0.0, 0.0))),
        velocity=tuple(tg.get("velocity", (0.0, 0.0)))))

    sm = data.get("sim", {})
    sim = _wrap(f"{source}: sim", lambda: SimBlock(
        dt=_get(sm, "dt", "sim", default=1e-3), t_max=_get(sm, "t_max", "sim", default=120.0),
        r_stop=_get(sm, "r_stop", "sim", default=1.0), r_floor=_get(sm, "r_floor", "sim", default=0.1),
        mode=ControlMode(_get(sm, "mode", "sim", str, "delayed"))))
    scenario = _wrap(source, lambda: Scenario(agents, schedule, guidance, target, sim,
                                              _get(data, "name", "name", str, "")))
    # surface the sim invariants at load time rather than at run time
    _wrap(f"{source}: sim", scenario.config)
    return scenario


def loads(text: str, source: str = "<string>") -> Scenario:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(f"{source}: {exc}") from exc
    return from_dict(data, source)


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario file, or a built-in scenario by name."""
    if str(path_or_name) in BUILTINS:
        return _builtin(str(path_or_name))
    path = Path(path_or_name)
    if not path.is_file():
        raise ScenarioError(f"{path}: no such scenario file (built-ins: {', '.join(BUILTINS)})")
    return loads(path.read_text(), str(path))


def _edges(g: CommGraph) -> list[list]:
    return [[i, j] if w == 1.0 else [i, j, w] for i, j, w in g.edges()]


def to_dict(sc: Scenario) -> dict:
    g, s = sc.guidance, sc.guidance.surface
    out: dict[str, Any] = {}
    if sc.name:
        out["name"] = sc.name
    out["agents"] = [{"r0": a.r0, "v0": a.v0, "phi0": a.phi0} for a in sc.agents]
    if len(sc.schedule.segments) == 1:
        out["graph"] = {"edges": _edges(sc.schedule.segments[0][1])}
    else:
        out["schedule"] = [{"t_start": t, "edges": _edges(gr)} for t, gr in sc.schedule.segments]
    out["surface"] = {
        "alpha1": s.alpha1, "alpha2": s.alpha2, "mu": s.mu,
        "m1n1": [s.ratio_m1n1.num, s.ratio_m1n1.den], "p1q1": [s.ratio_p1q1.num, s.ratio_p1q1.den],
    }
    out["guidance"] = {
        "k1": g.k1, "k2": g.k2, "k3": g.k3, "k4": g.k4,
        "eta1": g.eta1, "epsilon": g.epsilon, "omega": g.omega,
        "m2n2": [g.ratio_m2n2.num, g.ratio_m2n2.den], "p2q2": [g.ratio_p2q2.num, g.ratio_p2q2.den],
        "m3n3": [g.ratio_m3n3.num, g.ratio_m3n3.den], "p3q3": [g.ratio_p3q3.num, g.ratio_p3q3.den],
    }
    tg = sc.target
    out["target"] = {
        "kind": tg.kind.value, "amplitude": tg.amplitude, "frequency": tg.frequency, "phase": tg.phase,
        "position": list(tg.position), "velocity": list(tg.velocity),
    }
    out["sim"] = {
        "dt": sc.sim.dt, "t_max": sc.sim.t_max, "r_stop": sc.sim.r_stop, "r_floor": sc.sim.r_floor,
        "mode": sc.sim.mode.value,
    }
    return out


def dumps(sc: Scenario) -> str:
    return tomli_w.dumps(to_dict(sc))


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps(sc))
