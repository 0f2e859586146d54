"""Fixed-time distributed cooperative guidance for simultaneous arrival."""

from .analysis import BoundReport, FixedTimeSpec, bound_report, measure_settling
from .engagement import InitialCondition, MissileState, TargetModel
from .fntsms import OddRatio, SurfaceParams
from .guidance import ControlMode, GuidanceParams
from .scenario import Scenario, load_scenario
from .simengine import SimConfig, SimResult, TrajectoryLog, run
from .topology import CommGraph, TopologySchedule

__all__ = [
    "BoundReport", "CommGraph", "ControlMode", "FixedTimeSpec", "GuidanceParams", "InitialCondition",
    "MissileState", "OddRatio", "Scenario", "SimConfig", "SimResult", "SurfaceParams", "TargetModel",
    "TopologySchedule", "TrajectoryLog", "bound_report", "load_scenario", "measure_settling", "run",
]
__version__ = "0.1.0"
