"""Neighbourhood disagreement of range and closing velocity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engagement import MissileState
from .topology import CommGraph


@dataclass(frozen=True)
class ConsensusErrors:
    xi_r: np.ndarray
    xi_vr: np.ndarray


def disagreement(adjacency: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``sum_j a_ij (x_i - x_j)`` for every agent."""
    return adjacency.sum(axis=1) * x - adjacency @ x


def consensus_errors(states: Sequence[MissileState], g: CommGraph) -> ConsensusErrors:
    if len(states) != g.n:
        raise ValueError(f"got {len(states)} states for a graph of {g.n} agents")
    r = np.array([s.r for s in states], dtype=float)
    v_r = np.array([s.v_r for s in states], dtype=float)
    return ConsensusErrors(disagreement(g.adjacency, r), disagreement(g.adjacency, v_r))
