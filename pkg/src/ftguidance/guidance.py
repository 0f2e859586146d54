"""Distributed fixed-time guidance commands along and across the line of sight.

The along-LOS command of agent ``i`` is

    u_i = (1/d_i) [ sum_j a_ij (c_i - c_j + u_j) + F_i ],   c = v_q**2 / r,

where ``F_i`` collects the surface-derivative and reaching-law terms. Every
agent's command depends on its neighbours' commands, i.e. the network has
to satisfy ``L u = G`` with ``G_i = sum_j a_ij (c_i - c_j) + F_i``. ``L`` is
singular along the all-ones direction, so only the part of ``G`` orthogonal
to it can be realised; ``resolve`` removes the network mean of ``G`` before
solving. Without that projection the common mode of ``u`` integrates
``sum(G)`` every step and diverges.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import fntsms
from .consensus import ConsensusErrors, disagreement
from .engagement import ControlInput, MissileState
from .fntsms import OddRatio, SurfaceParams, pow_odd
from .topology import CommGraph, laplacian


class ControlResolutionError(RuntimeError):
    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual = residual


class ControlMode(str, Enum):
    DELAYED = "delayed"
    FIXED_POINT = "fixed-point"


FIXED_POINT_TOL = 1e-9
DELAYED_RELAXATION = 0.5


@dataclass(frozen=True)
class GuidanceParams:
    k1: float
    k2: float
    k3: float
    k4: float
    ratio_m2n2: OddRatio
    ratio_p2q2: OddRatio
    ratio_m3n3: OddRatio
    ratio_p3q3: OddRatio
    eta1: float
    epsilon: float
    omega: float
    surface: SurfaceParams

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "k3", "k4", "eta1", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.omega < 1:
            raise ValueError(f"omega must lie in (0, 1), got {self.omega}")
        fntsms._need(self.ratio_m2n2, True, "m2/n2")
        fntsms._need(self.ratio_p2q2, False, "p2/q2")
        fntsms._need(self.ratio_m3n3, True, "m3/n3")
        fntsms._need(self.ratio_p3q3, False, "p3/q3")


def reaching_law(s, p: GuidanceParams):
    return p.k1 * pow_odd(s, p.ratio_m2n2) + p.k2 * pow_odd(s, p.ratio_p2q2) + p.eta1 * np.tanh(s)


def forcing(xi_r, xi_vr, s, p: GuidanceParams):
    """Per-agent terms of the along-LOS law that do not involve neighbours."""
    sp = p.surface
    return sp.alpha1 * xi_vr + sp.alpha2 * fntsms.beta_dot(xi_r, xi_vr, sp) + reaching_law(s, p)


def u_r(
    i: int,
    states: Sequence[MissileState],
    errors: ConsensusErrors,
    s_i: float,
    g: CommGraph,
    neighbor_u_r: Sequence[float],
    p: GuidanceParams,
) -> float:
    """Literal along-LOS command of 0-based agent ``i`` given neighbour commands."""
    adj = g.adjacency
    d_i = adj[i].sum()
    if d_i <= 0:
        raise ControlResolutionError(f"agent {i + 1} has no neighbours")
    c = np.array([st.v_q * st.v_q / st.r for st in states])
    coupling = float(adj[i] @ (c[i] - c + np.asarray(neighbor_u_r, dtype=float)))
    total = coupling + float(forcing(errors.xi_r[i], errors.xi_vr[i], s_i, p))
    if not np.isfinite(total):
        raise ControlResolutionError(
            f"non-finite u_r for agent {i + 1}: coupling={coupling}, xi_r={errors.xi_r[i]}, "
            f"xi_vr={errors.xi_vr[i]}, s={s_i}"
        )
    return total / d_i


def u_q_terms(r, v_r, v_q, p: GuidanceParams):
    return (
        -v_q * v_r / r
        + p.k3 * pow_odd(v_q, p.ratio_m3n3)
        + p.k4 * pow_odd(v_q, p.ratio_p3q3)
        + p.epsilon * np.abs(v_q) ** p.omega * np.sign(v_q)
    )


def u_q(state: MissileState, p: GuidanceParams) -> float:
    if not state.r > 0:
        raise ControlResolutionError(f"u_q needs r > 0, got {state.r}")
    return float(u_q_terms(state.r, state.v_r, state.v_q, p))


def body_accels(u_r: float, u_q: float, phi: float) -> tuple[float, float]:
    """Normal and tangential body-frame accelerations ``(a_n, a_t)``."""
    c, s = np.cos(phi), np.sin(phi)
    return u_q * c - u_r * s, u_r * c + u_q * s


@dataclass(frozen=True)
class Resolved:
    """Everything computed while resolving one step's commands (arrays over agents)."""

    u_r: np.ndarray
    u_q: np.ndarray
    xi_r: np.ndarray
    xi_vr: np.ndarray
    s: np.ndarray
    patch: np.ndarray
    demand: np.ndarray


def consistent_demand(r, v_r, v_q, g: CommGraph, p: GuidanceParams, r_floor: float = 0.0):
    """``G`` projected onto the range of ``L``, plus the intermediate signals."""
    adj = g.adjacency
    r_eff = np.maximum(r, r_floor)
    xi_r = disagreement(adj, r)
    xi_vr = disagreement(adj, v_r)
    s = fntsms.surface(xi_r, xi_vr, p.surface)
    c = v_q * v_q / r_eff
    demand = disagreement(adj, c) + forcing(xi_r, xi_vr, s, p)
    return demand - demand.mean(), xi_r, xi_vr, s


def relaxed_jacobi(u, demand, g: CommGraph, relaxation: float = DELAYED_RELAXATION):
    """One relaxed Jacobi sweep of the along-LOS law; preserves ``degrees @ u``."""
    d = g.degrees
    return (1.0 - relaxation) * u + relaxation * (g.adjacency @ u + demand) / d


def eq_residual(u, demand, g: CommGraph) -> np.ndarray:
    """Per-agent residual ``u_i - (sum_j a_ij u_j + demand_i) / d_i``."""
    return u - (g.adjacency @ u + demand) / g.degrees


def solve_fixed_point(demand, g: CommGraph, u_prev) -> np.ndarray:
    """Fixed point of ``relaxed_jacobi`` started from ``u_prev``.

    The sweep conserves ``degrees @ u``, so its limit is the unique solution
    of ``L u = demand`` on that level set. Solved directly via the bordered
    system rather than iterated; plain Picard sweeps oscillate forever on
    bipartite graphs.
    """
    d = g.degrees
    lhs = np.vstack([laplacian(g), d])
    rhs = np.concatenate([demand, [d @ u_prev]])
    u = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    res = float(np.max(np.abs(eq_residual(u, demand, g))))
    scale = max(1.0, float(np.max(np.abs(demand))))
    if not np.isfinite(res) or res > FIXED_POINT_TOL * scale:
        raise ControlResolutionError(f"fixed-point solve left residual {res:.3e}", residual=res)
    return u


def resolve(
    r,
    v_r,
    v_q,
    g: CommGraph,
    prev_u_r,
    mode: ControlMode | str = ControlMode.DELAYED,
    p: GuidanceParams | None = None,
    r_floor: float = 0.0,
) -> Resolved:
    """Vectorised command resolution for all agents."""
    mode = ControlMode(mode)
    if np.any(g.degrees <= 0):
        isolated = np.flatnonzero(g.degrees <= 0) + 1
        raise ControlResolutionError(f"agents {isolated.tolist()} have no neighbours")
    r = np.asarray(r, dtype=float)
    demand, xi_r, xi_vr, s = consistent_demand(r, v_r, v_q, g, p, r_floor)
    prev = np.asarray(prev_u_r, dtype=float)
    if mode is ControlMode.DELAYED:
        ur = relaxed_jacobi(prev, demand, g)
    else:
        ur = solve_fixed_point(demand, g, prev)
    uq = u_q_terms(np.maximum(r, r_floor), v_r, v_q, p)
    if not (np.all(np.isfinite(ur)) and np.all(np.isfinite(uq))):
        bad = np.flatnonzero(~(np.isfinite(ur) & np.isfinite(uq))) + 1
        raise ControlResolutionError(f"non-finite command for agents {bad.tolist()}")
    patch = fntsms.patch_branch(xi_r, xi_vr, p.surface)
    return Resolved(ur, uq, xi_r, xi_vr, s, patch, demand)


def resolve_controls(
    states: Sequence[MissileState],
    g: CommGraph,
    prev_u_r: Sequence[float],
    mode: ControlMode | str,
    p: GuidanceParams,
) -> list[ControlInput]:
    if len(states) != g.n:
        raise ValueError(f"got {len(states)} states for a graph of {g.n} agents")
    arr = np.array([[st.r, st.v_r, st.v_q] for st in states], dtype=float)
    out = resolve(arr[:, 0], arr[:, 1], arr[:, 2], g, prev_u_r, mode, p)
    return [ControlInput(float(a), float(b)) for a, b in zip(out.u_r, out.u_q)]
