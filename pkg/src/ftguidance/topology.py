"""Communication graphs, Laplacian spectra and piecewise-constant topology schedules."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Invalid graph or schedule."""


class CommGraph:
    """Undirected weighted communication graph over ``n`` agents.

    The adjacency matrix is validated (square, symmetric, zero diagonal,
    non-negative) and stored read-only, so instances can be shared freely.
    """

    __slots__ = ("_adj",)

    def __init__(self, adjacency: Sequence[Sequence[float]] | np.ndarray) -> None:
        adj = np.array(adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise GraphError(f"adjacency must be a non-empty square matrix, got shape {adj.shape}")
        if not np.all(np.isfinite(adj)):
            raise GraphError("adjacency contains non-finite weights")
        if np.any(adj < 0):
            raise GraphError("adjacency weights must be non-negative")
        if np.any(np.diag(adj) != 0):
            raise GraphError("self-loops are not allowed (a_ii must be 0)")
        if not np.array_equal(adj, adj.T):
            raise GraphError("adjacency must be symmetric; directed graphs are not supported")
        adj.flags.writeable = False
        self._adj = adj

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]]) -> "CommGraph":
        """Build from 1-based ``(i, j)`` or ``(i, j, weight)`` edge tuples."""
        if n < 1:
            raise GraphError(f"agent count must be positive, got {n}")
        adj = np.zeros((n, n))
        for edge in edges:
            if len(edge) not in (2, 3):
                raise GraphError(f"edge must be [i, j] or [i, j, weight], got {list(edge)}")
            i, j = int(edge[0]), int(edge[1])
            w = float(edge[2]) if len(edge) == 3 else 1.0
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphError(f"edge {[i, j]} out of range for {n} agents")
            if i == j:
                raise GraphError(f"self-loop on agent {i}")
            adj[i - 1, j - 1] = adj[j - 1, i - 1] = w
        return cls(adj)

    @classmethod
    def complete(cls, n: int) -> "CommGraph":
        return cls(np.ones((n, n)) - np.eye(n))

    @classmethod
    def cycle(cls, n: int) -> "CommGraph":
        return cls.from_edges(n, [(i, i % n + 1) for i in range(1, n + 1)] if n > 2 else [(1, 2)][: n - 1])

    @classmethod
    def path(cls, n: int) -> "CommGraph":
        return cls.from_edges(n, [(i, i + 1) for i in range(1, n)])

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        return self._adj

    @property
    def degrees(self) -> np.ndarray:
        return self._adj.sum(axis=1)

    def edges(self) -> list[tuple[int, int, float]]:
        """Upper-triangle edges as 1-based ``(i, j, weight)``."""
        rows, cols = np.nonzero(np.triu(self._adj))
        return [(int(i) + 1, int(j) + 1, float(self._adj[i, j])) for i, j in zip(rows, cols)]

    def neighbors(self, i: int) -> np.ndarray:
        """0-based neighbor indices of 0-based agent ``i``."""
        return np.flatnonzero(self._adj[i] > 0)

    def without_edge(self, i: int, j: int) -> "CommGraph":
        """Copy with the 1-based edge ``(i, j)`` removed."""
        if self._adj[i - 1, j - 1] == 0:
            raise GraphError(f"edge {[i, j]} is not present")
        adj = self._adj.copy()
        adj[i - 1, j - 1] = adj[j - 1, i - 1] = 0.0
        return CommGraph(adj)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CommGraph):
            return NotImplemented
        return np.array_equal(self._adj, other._adj)

    def __hash__(self) -> int:
        return hash(self._adj.tobytes())

    def __repr__(self) -> str:
        return f"CommGraph(n={self.n}, edges={[(i, j) for i, j, _ in self.edges()]})"


def laplacian(g: CommGraph) -> np.ndarray:
    adj = g.adjacency
    return np.diag(adj.sum(axis=1)) - adj


def is_connected(g: CommGraph) -> bool:
    """Breadth-first reachability from agent 0 over positive-weight edges."""
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in g.neighbors(i):
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all off-diagonal pairs until every off-diagonal magnitude
    drops below ``tol``. Returns eigenvalues in ascending order.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, atol=0.0):
        raise ValueError("jacobi_eigenvalues needs a symmetric square matrix")
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if n < 2 or off.max() < tol:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < tol * 1e-3:
                    continue
                # rotation angle chosen to annihilate a[p, q]
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    raise RuntimeError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def lambda_s(g: CommGraph) -> float:
    """Algebraic connectivity: smallest nonzero Laplacian eigenvalue of a connected graph."""
    if not is_connected(g):
        raise GraphError("lambda_s is undefined for a disconnected graph")
    if g.n == 1:
        raise GraphError("lambda_s is undefined for a single agent")
    return float(jacobi_eigenvalues(laplacian(g))[1])


@dataclass(frozen=True)
class TopologySchedule:
    """Right-continuous piecewise-constant sequence of connected graphs."""

    segments: tuple[tuple[float, CommGraph], ...]

    def __post_init__(self) -> None:
        segs = tuple((float(t), g) for t, g in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise GraphError("schedule needs at least one segment")
        if segs[0][0] != 0.0:
            raise GraphError(f"first segment must start at t = 0, got {segs[0][0]}")
        n = segs[0][1].n
        for k, (t, g) in enumerate(segs):
            if k and t <= segs[k - 1][0]:
                raise GraphError(f"segment start times must be strictly increasing (segment {k}: {t})")
            if g.n != n:
                raise GraphError(f"segment {k} has {g.n} agents, expected {n}")
            if not is_connected(g):
                raise GraphError(f"segment {k} (t_start={t}) graph is not connected")

    @classmethod
    def constant(cls, g: CommGraph) -> "TopologySchedule":
        return cls(((0.0, g),))

    @property
    def n(self) -> int:
        return self.segments[0][1].n

    @property
    def switch_times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.segments[1:])

    def drop_edge(self, i: int, j: int, t: float) -> "TopologySchedule":
        """Remove edge ``(i, j)`` from time ``t`` onwards."""
        if t < 0:
            raise GraphError(f"drop time must be >= 0, got {t}")
        out: list[tuple[float, CommGraph]] = []
        for t0, g in self.segments:
            if t0 < t:
                out.append((t0, g))
            else:
                out.append((t0, g.without_edge(i, j) if g.adjacency[i - 1, j - 1] else g))
        if t not in [t0 for t0, _ in self.segments]:
            current = graph_at(self, t)
            out.append((t, current.without_edge(i, j)))
            out.sort(key=lambda seg: seg[0])
        return TopologySchedule(tuple(out))


def graph_at(schedule: TopologySchedule, t: float) -> CommGraph:
    if t < 0:
        raise GraphError(f"time must be >= 0, got {t}")
    current = schedule.segments[0][1]
    for t0, g in schedule.segments:
        if t0 <= t:
            current = g
        else:
            break
    return current
