"""Command-line front end: ``run``, ``bounds`` and ``sweep`` over scenario files."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis
from .analysis import BoundError, OracleError
from .engagement import EngagementError, InitialCondition
from .fntsms import SingularSurfaceError
from .guidance import ControlMode, ControlResolutionError
from .scenario import BUILTINS, Scenario, ScenarioError, load_scenario
from .simengine import NumericalAbort, SimConfig, run
from .topology import GraphError

log = logging.getLogger("ftguidance")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2
DEFAULT_SCALES = (1.0, 2.0, 3.0, 5.0)

# published values for the built-in five-missile scenario, shown for comparison
REFERENCE_BOUNDS = {"t2": 48.21, "t3": 14.9}


def parse_drop_edge(text: str) -> tuple[int, int, float]:
    """``"i,j@t"`` -> ``(i, j, t)``."""
    try:
        edge, t = text.split("@")
        i, j = edge.split(",")
        return int(i), int(j), float(t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected i,j@t, got {text!r}") from exc


def parse_scales(text: str) -> tuple[float, ...]:
    try:
        scales = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not scales or any(s <= 0 for s in scales):
        raise argparse.ArgumentTypeError("scales must be positive")
    return scales


def apply_drops(sc: Scenario, drops: Sequence[tuple[int, int, float]]) -> Scenario:
    schedule = sc.schedule
    for i, j, t in drops:
        schedule = schedule.drop_edge(i, j, t)
    return replace(sc, schedule=schedule)


def scaled_agents(agents: Sequence[InitialCondition], factor: float) -> tuple[InitialCondition, ...]:
    """Stretch the spread of initial ranges and speeds about their means by ``factor``."""
    r0 = np.array([a.r0 for a in agents])
    v0 = np.array([a.v0 for a in agents])
    r_new = r0.mean() + factor * (r0 - r0.mean())
    v_new = v0.mean() + factor * (v0 - v0.mean())
    return tuple(InitialCondition(float(r), float(v), a.phi0) for r, v, a in zip(r_new, v_new, agents))


@dataclass(frozen=True)
class SweepRow:
    scale: float
    settling_xi_r: float | None
    bound_t2: float
    termination: str

    @property
    def passed(self) -> bool:
        return self.settling_xi_r is not None and self.settling_xi_r <= self.bound_t2


def _sweep_one(args: tuple[SimConfig, tuple[InitialCondition, ...], float, dict]) -> SweepRow:
    cfg, agents, scale, thresholds = args
    result, _ = run(cfg, agents, thresholds)
    return SweepRow(scale, result.settling["xi_r"], result.bounds.t2, result.termination)


def sweep(
    sc: Scenario,
    cfg: SimConfig,
    scales: Sequence[float] = DEFAULT_SCALES,
    thresholds: dict | None = None,
    jobs: int = 1,
) -> list[SweepRow]:
    tasks = [(cfg, scaled_agents(sc.agents, s), s, thresholds or {}) for s in scales]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def _thresholds(args: argparse.Namespace) -> dict:
    out = {}
    for name in analysis.DEFAULT_THRESHOLDS:
        value = getattr(args, f"threshold_{name}", None)
        if value is not None:
            out[name] = value
    return out


def _prepare(args: argparse.Namespace) -> tuple[Scenario, SimConfig]:
    sc = load_scenario(args.scenario)
    if args.drop_edge:
        sc = apply_drops(sc, args.drop_edge)
    cfg = sc.config(mode=args.control_mode, dt=args.dt, t_max=args.t_max)
    return sc, cfg


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args: argparse.Namespace) -> int:
    sc, cfg = _prepare(args)
    result, trajectory = run(cfg, sc.agents, _thresholds(args))
    out = _out_dir(args)
    trajectory.write_csv(out / "trajectory.csv")
    (out / "summary.txt").write_text(result.summary() + "\n")
    (out / "result.json").write_text(json.dumps(result.as_dict(), indent=2, sort_keys=True) + "\n")
    print(result.summary())
    print(f"wrote {out / 'trajectory.csv'}, {out / 'summary.txt'}, {out / 'result.json'}")
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    sc, cfg = _prepare(args)
    report = analysis.bound_report(cfg.guidance, sc.n)
    print(f"agents: {sc.n}")
    print(f"T1 (sliding variables reach zero)      <= {report.t1:.4f} s  [{report.formulas_used['t1']}]")
    print(f"T2 (range/velocity consensus)          <= {report.t2:.4f} s  [{report.formulas_used['t2']}]")
    print(f"T3 (transverse velocity reaches zero)  <= {report.t3:.4f} s  [{report.formulas_used['t3']}]")
    if sc.name in BUILTINS:
        print(f"published reference: T2 <= {REFERENCE_BOUNDS['t2']} s, T3 <= {REFERENCE_BOUNDS['t3']} s")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    sc, cfg = _prepare(args)
    rows = sweep(sc, cfg, args.scales, _thresholds(args), args.jobs)
    out = _out_dir(args)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scale", "settling_xi_r", "bound_t2", "termination", "pass"])
        for row in rows:
            writer.writerow([row.scale, "" if row.settling_xi_r is None else f"{row.settling_xi_r:.6f}",
                             f"{row.bound_t2:.6f}", row.termination, "pass" if row.passed else "FAIL"])
    print(f"{'scale':>6} {'T(xi_r) [s]':>12} {'T2 bound [s]':>13}  result")
    for row in rows:
        shown = "not settled" if row.settling_xi_r is None else f"{row.settling_xi_r:.3f}"
        print(f"{row.scale:6g} {shown:>12} {row.bound_t2:13.3f}  {'pass' if row.passed else 'FAIL'}")
    print(f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftguidance",
        description="Fixed-time distributed cooperative guidance: simulation, bounds, sweeps.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help=f"scenario TOML file or built-in name ({', '.join(BUILTINS)})")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--control-mode", choices=[m.value for m in ControlMode], default=None)
    common.add_argument("--dt", type=float, default=None, help="integration step, s")
    common.add_argument("--t-max", type=float, default=None, help="simulation horizon, s")
    common.add_argument("--drop-edge", type=parse_drop_edge, action="append", default=[],
                        metavar="I,J@T", help="remove edge I-J from time T on (repeatable)")
    for name, unit in (("xi_r", "m"), ("xi_vr", "m/s"), ("s", ""), ("v_q", "m/s"), ("heading", "rad")):
        common.add_argument(f"--threshold-{name.replace('_', '-')}", dest=f"threshold_{name}", type=float,
                            default=None, help=f"settling threshold for {name} {unit}".rstrip())

    sub.add_parser("run", parents=[common], help="simulate and write CSV log + summary").set_defaults(
        func=cmd_run)
    sub.add_parser("bounds", parents=[common], help="print settling-time bounds").set_defaults(
        func=cmd_bounds)
    p_sweep = sub.add_parser("sweep", parents=[common], help="scale initial disagreement, compare to bound")
    p_sweep.add_argument("--scales", type=parse_scales, default=DEFAULT_SCALES)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (NumericalAbort, ControlResolutionError, SingularSurfaceError, OracleError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ScenarioError, GraphError, EngagementError, BoundError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
