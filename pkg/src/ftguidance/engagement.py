"""Planar missile-target kinematics written in each missile's own line-of-sight frame.

State per missile is ``(r, lambda, v_r, v_q)``: range-to-go, LOS angle,
velocity along the LOS (negative while closing) and velocity normal to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class EngagementError(ValueError):
    pass


@dataclass(frozen=True)
class MissileState:
    r: float
    lam: float
    v_r: float
    v_q: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.lam, self.v_r, self.v_q])


@dataclass(frozen=True)
class InitialCondition:
    r0: float
    v0: float
    phi0: float

    def __post_init__(self) -> None:
        if not self.r0 > 0:
            raise EngagementError(f"r0 must be > 0, got {self.r0}")
        if not self.v0 >= 0:
            raise EngagementError(f"v0 must be >= 0, got {self.v0}")


class TargetKind(str, Enum):
    STATIONARY = "stationary"
    SINUSOIDAL = "sinusoidal"


@dataclass(frozen=True)
class TargetModel:
    """Target acceleration model.

    The sinusoidal model applies ``amplitude * sin(frequency * t + phase)`` on
    both inertial axes. ``position`` and ``velocity`` are carried for logging
    only; they never feed the LOS-frame dynamics.
    """

    kind: TargetKind = TargetKind.STATIONARY
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    position: tuple[float, float] = (0.0, 0.0)
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TargetKind(self.kind))
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        if self.amplitude < 0:
            raise EngagementError(f"target amplitude must be >= 0, got {self.amplitude}")
        if self.frequency < 0:
            raise EngagementError(f"target frequency must be >= 0, got {self.frequency}")


@dataclass(frozen=True)
class ControlInput:
    u_r: float
    u_q: float


def init_state(ic: InitialCondition) -> MissileState:
    if not ic.r0 > 0:
        raise EngagementError(f"r0 must be > 0, got {ic.r0}")
    return MissileState(
        r=float(ic.r0),
        lam=0.0,
        v_r=-ic.v0 * math.cos(ic.phi0),
        v_q=ic.v0 * math.sin(ic.phi0),
    )


def target_accel(model: TargetModel, t: float) -> tuple[float, float]:
    if model.kind is TargetKind.STATIONARY:
        return 0.0, 0.0
    a = model.amplitude * math.sin(model.frequency * t + model.phase)
    return a, a


def project_target_accel(a_x, a_y, lam):
    """Rotate an inertial acceleration into the LOS frame at angle ``lam``.

    Works elementwise on arrays, so one inertial vector can be projected
    into every missile's frame at once.
    """
    c = np.cos(lam)
    s = np.sin(lam)
    return a_x * c + a_y * s, -a_x * s + a_y * c


def kinematics(r, v_r, v_q, u_r, u_q, ut_r, ut_q):
    """Vectorised right-hand side; returns ``(r_dot, lam_dot, v_r_dot, v_q_dot)``."""
    return (
        v_r,
        v_q / r,
        v_q * v_q / r - u_r + ut_r,
        -v_q * v_r / r - u_q + ut_q,
    )


def state_derivative(
    s: MissileState, u: ControlInput, u_t: tuple[float, float] = (0.0, 0.0)
) -> tuple[float, float, float, float]:
    if not s.r > 0:
        raise EngagementError(f"range must be > 0 in state_derivative, got {s.r}")
    return tuple(
        float(v) for v in kinematics(s.r, s.v_r, s.v_q, u.u_r, u.u_q, u_t[0], u_t[1])
    )


def heading_error(s: MissileState) -> float:
    """Angle between the velocity vector and the closing LOS direction, in (-pi, pi]."""
    if s.v_r == 0 and s.v_q == 0:
        raise EngagementError("heading error is undefined at zero velocity")
    return math.atan2(s.v_q, -s.v_r + 0.0)


def heading_errors(v_r: np.ndarray, v_q: np.ndarray) -> np.ndarray:
    """Vectorised heading error; zero-velocity entries report 0."""
    return np.arctan2(v_q, -v_r + 0.0)
