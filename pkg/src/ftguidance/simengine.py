"""Fixed-step closed-loop simulation of the cooperative engagement."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis
from .engagement import InitialCondition, TargetKind, TargetModel, heading_errors, init_state, kinematics
from .engagement import project_target_accel
from .guidance import ControlMode, GuidanceParams, Resolved, body_accels, resolve
from .topology import CommGraph, TopologySchedule, graph_at

log = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "agent", "r", "lambda", "v_r", "v_q", "phi", "xi_r", "xi_vr", "s",
               "branch", "u_r", "u_q", "a_n", "a_t")
_PER_AGENT = ("r", "lam", "v_r", "v_q", "phi", "xi_r", "xi_vr", "s", "u_r", "u_q", "a_n", "a_t")


class NumericalAbort(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    guidance: GuidanceParams
    schedule: TopologySchedule
    target: TargetModel = field(default_factory=TargetModel)
    mode: ControlMode = ControlMode.DELAYED
    dt: float = 1e-3
    t_max: float = 120.0
    r_stop: float = 1.0
    r_floor: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ControlMode(self.mode))
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if not 0 < self.r_floor < self.r_stop:
            raise ValueError(f"need 0 < r_floor < r_stop, got r_floor={self.r_floor}, r_stop={self.r_stop}")


class TrajectoryLog:
    """Per-step samples; every per-agent field is a ``(samples, agents)`` array."""

    def __init__(self, capacity: int, n: int) -> None:
        self.n = n
        self._k = 0
        self._t = np.empty(capacity)
        self._branch = np.empty((capacity, n), dtype=bool)
        self._data = {name: np.empty((capacity, n)) for name in _PER_AGENT}

    def append(self, t: float, x: np.ndarray, res: Resolved, u_r, u_q, phi, a_n, a_t) -> None:
        k = self._k
        if k and t <= self._t[k - 1]:
            raise ValueError("log times must be strictly increasing")
        self._t[k] = t
        d = self._data
        d["r"][k], d["lam"][k], d["v_r"][k], d["v_q"][k] = x.T
        d["phi"][k] = phi
        d["xi_r"][k] = res.xi_r
        d["xi_vr"][k] = res.xi_vr
        d["s"][k] = res.s
        d["u_r"][k] = u_r
        d["u_q"][k] = u_q
        d["a_n"][k] = a_n
        d["a_t"][k] = a_t
        self._branch[k] = res.patch
        self._k += 1

    def __len__(self) -> int:
        return self._k

    @property
    def t(self) -> np.ndarray:
        return self._t[: self._k]

    @property
    def branch(self) -> np.ndarray:
        """True where the quadratic patch of the surface was active."""
        return self._branch[: self._k]

    @property
    def gamma(self) -> np.ndarray:
        """Flight-path angle, reported as LOS angle plus heading error."""
        return self.lam + self.phi

    def __getattr__(self, name: str) -> np.ndarray:
        data = self.__dict__.get("_data")
        if data is not None and name in data:
            return data[name][: self._k]
        raise AttributeError(name)

    def signal(self, name: str) -> np.ndarray:
        return self.phi if name == "heading" else getattr(self, name)

    def branch_transitions(self) -> int:
        b = self.branch
        return int(np.count_nonzero(b[1:] != b[:-1])) if len(b) > 1 else 0

    def write_csv(self, path: str | Path) -> None:
        k, n = self._k, self.n
        cols = [np.repeat(self.t, n), np.tile(np.arange(1, n + 1), k)]
        cols += [getattr(self, name).ravel() for name in _PER_AGENT[:8]]
        branch = np.where(self.branch.ravel(), "B", "A")
        tail = [getattr(self, name).ravel() for name in _PER_AGENT[8:]]
        numeric = np.column_stack(cols)
        rest = np.column_stack(tail)
        lines = [",".join(CSV_COLUMNS)]
        head_fmt = "%.12g,%d," + ",".join(["%.12g"] * 8)
        tail_fmt = ",".join(["%.12g"] * 4)
        for row, b, trow in zip(numeric.tolist(), branch.tolist(), rest.tolist()):
            lines.append(f"{head_fmt % tuple(row)},{b},{tail_fmt % tuple(trow)}")
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class SimResult:
    arrival_times: tuple[float, ...]
    arrival_spread: float
    settling: dict
    bounds: analysis.BoundReport
    termination: str
    final_time: float
    branch_transitions: int = 0

    @property
    def mean_arrival(self) -> float:
        arr = np.array(self.arrival_times)
        return float(np.nanmean(arr)) if np.isfinite(arr).any() else math.nan

    def as_dict(self) -> dict:
        out = {
            "termination": self.termination,
            "final_time": self.final_time,
            "mean_arrival": self.mean_arrival,
            "arrival_spread": self.arrival_spread,
            "bound_t1": self.bounds.t1,
            "bound_t2": self.bounds.t2,
            "bound_t3": self.bounds.t3,
            "branch_transitions": self.branch_transitions,
        }
        for i, ta in enumerate(self.arrival_times, start=1):
            out[f"arrival_{i}"] = ta
        for name, ts in self.settling.items():
            out[f"settling_{name}"] = "not-settled" if ts is None else ts
        return out

    def summary(self) -> str:
        lines = [f"termination: {self.termination} at t = {self.final_time:.3f} s"]
        for i, ta in enumerate(self.arrival_times, start=1):
            lines.append(f"  agent {i}: arrival {ta:.3f} s")
        lines.append(f"mean arrival: {self.mean_arrival:.3f} s, spread: {self.arrival_spread:.4f} s")
        lines.append("settling (last entry below threshold):")
        for name, ts in self.settling.items():
            shown = "not settled" if ts is None else f"{ts:.3f} s"
            lines.append(f"  {name:8s} {shown}")
        b = self.bounds
        lines.append(
            f"bounds: T1 = {b.t1:.3f} s ({b.formulas_used['t1']}), T2 = {b.t2:.3f} s "
            f"({b.formulas_used['t2']}), T3 = {b.t3:.3f} s ({b.formulas_used['t3']})"
        )
        lines.append(f"surface patch transitions: {self.branch_transitions}")
        return "\n".join(lines)


def initial_array(ics: Sequence[InitialCondition]) -> np.ndarray:
    return np.array([init_state(ic).as_array() for ic in ics])


def _derivative(x: np.ndarray, ur, uq, tau: float, cfg: SimConfig) -> np.ndarray:
    r = np.maximum(x[:, 0], cfg.r_floor)
    if cfg.target.kind is TargetKind.STATIONARY:
        ut_r = ut_q = 0.0
    else:
        a = cfg.target.amplitude * math.sin(cfg.target.frequency * tau + cfg.target.phase)
        ut_r, ut_q = project_target_accel(a, a, x[:, 1])
    out = np.empty_like(x)
    out[:, 0], out[:, 1], out[:, 2], out[:, 3] = kinematics(r, x[:, 2], x[:, 3], ur, uq, ut_r, ut_q)
    return out


def step(
    x: np.ndarray,
    t: float,
    prev_u_r: np.ndarray,
    cfg: SimConfig,
    active: np.ndarray | None = None,
    graph: CommGraph | None = None,
) -> tuple[np.ndarray, Resolved, np.ndarray, np.ndarray]:
    """Advance ``(n, 4)`` states by one RK4 step with commands held over the step.

    Returns ``(new_states, resolved, applied_u_r, applied_u_q)``; inactive
    (arrived) agents keep their state and receive zero command.
    """
    g = graph if graph is not None else graph_at(cfg.schedule, t)
    if active is None:
        active = np.ones(len(x), dtype=bool)
    res = resolve(x[:, 0], x[:, 2], x[:, 3], g, prev_u_r, cfg.mode, cfg.guidance, cfg.r_floor)
    ur = np.where(active, res.u_r, 0.0)
    uq = np.where(active, res.u_q, 0.0)
    h = cfg.dt
    k1 = _derivative(x, ur, uq, t, cfg)
    k2 = _derivative(x + 0.5 * h * k1, ur, uq, t + 0.5 * h, cfg)
    k3 = _derivative(x + 0.5 * h * k2, ur, uq, t + 0.5 * h, cfg)
    k4 = _derivative(x + h * k3, ur, uq, t + h, cfg)
    new = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    new[~active] = x[~active]
    if not np.all(np.isfinite(new)):
        bad = sorted({int(i) + 1 for i in np.argwhere(~np.isfinite(new))[:, 0]})
        raise NumericalAbort(
            f"non-finite state at t={t + h:.6f} for agents {bad}; "
            f"u_r={res.u_r[np.array(bad) - 1].tolist()}, u_q={res.u_q[np.array(bad) - 1].tolist()}"
        )
    return new, res, ur, uq


# overflow is detected explicitly and reported as NumericalAbort
@np.errstate(over="ignore", invalid="ignore")
def run(
    cfg: SimConfig,
    ics: Sequence[InitialCondition],
    thresholds: dict | None = None,
) -> tuple[SimResult, TrajectoryLog]:
    n = len(ics)
    if n < 2:
        raise ValueError(f"need at least two agents, got {n}")
    if cfg.schedule.n != n:
        raise ValueError(f"schedule has {cfg.schedule.n} agents but {n} initial conditions were given")
    thr = dict(analysis.DEFAULT_THRESHOLDS)
    thr.update(thresholds or {})

    x = initial_array(ics)
    n_steps = int(round(cfg.t_max / cfg.dt))
    trajectory = TrajectoryLog(n_steps + 1, n)
    prev = np.zeros(n)
    active = np.ones(n, dtype=bool)
    arrival = np.full(n, math.nan)
    k = 0
    while True:
        t = k * cfg.dt
        g = graph_at(cfg.schedule, t)
        if k == n_steps or not active.any():
            # final sample: log the end state with the commands it would receive
            res = resolve(x[:, 0], x[:, 2], x[:, 3], g, prev, cfg.mode, cfg.guidance, cfg.r_floor)
            ur = np.where(active, res.u_r, 0.0)
            uq = np.where(active, res.u_q, 0.0)
            x_next = None
        else:
            x_next, res, ur, uq = step(x, t, prev, cfg, active, g)
        phi = heading_errors(x[:, 2], x[:, 3])
        a_n, a_t = body_accels(ur, uq, phi)
        trajectory.append(t, x, res, ur, uq, phi, a_n, a_t)
        if x_next is None:
            break
        prev = np.where(active, res.u_r, prev)
        crossed = active & (x_next[:, 0] <= cfg.r_stop)
        if crossed.any():
            frac = (x[crossed, 0] - cfg.r_stop) / (x[crossed, 0] - x_next[crossed, 0])
            arrival[crossed] = t + cfg.dt * frac
            active &= ~crossed
            log.debug("agents %s arrived at t=%.4f", (np.flatnonzero(crossed) + 1).tolist(), t + cfg.dt)
        x = x_next
        k += 1

    done = np.isfinite(arrival)
    spread = float(arrival[done].max() - arrival[done].min()) if done.any() else math.nan
    settling = {name: analysis.measure_settling(trajectory, name, thr[name]) for name in
                ("xi_r", "xi_vr", "s", "v_q", "heading")}
    result = SimResult(
        arrival_times=tuple(float(a) for a in arrival),
        arrival_spread=spread,
        settling=settling,
        bounds=analysis.bound_report(cfg.guidance, n),
        termination="arrived" if done.all() else "timeout",
        final_time=float(trajectory.t[-1]),
        branch_transitions=trajectory.branch_transitions(),
    )
    return result, trajectory
