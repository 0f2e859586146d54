"""Fixed-time settling bounds, a brute-force scalar oracle, and empirical settling measurement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .guidance import GuidanceParams

DIRECT = "direct"
CONSERVATIVE = "conservative"

# last-crossing thresholds, in the signal's own units
DEFAULT_THRESHOLDS = {
    "xi_r": 1.0,
    "xi_vr": 1.0,
    "s": 1.0,
    "v_q": 1.0,
    "heading": 0.01,
}


class BoundError(ValueError):
    pass


class OracleError(RuntimeError):
    pass


def _odd_positive(name: str, v: int) -> None:
    if int(v) != v or v <= 0 or v % 2 == 0:
        raise BoundError(f"{name} must be a positive odd integer, got {v}")


@dataclass(frozen=True)
class FixedTimeSpec:
    """Scalar system ``y' = -a y^(m/n) - b y^(p/q)`` with odd-integer exponents."""

    a: float
    b: float
    m: int
    n: int
    p: int
    q: int

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise BoundError(f"gains must be positive, got a={self.a}, b={self.b}")
        for name in "mnpq":
            _odd_positive(name, getattr(self, name))
        if not (self.m > self.n and self.p < self.q):
            raise BoundError(f"need m > n and p < q, got m={self.m}, n={self.n}, p={self.p}, q={self.q}")

    @property
    def theta(self) -> float:
        return self.q * (self.m - self.n) / (self.n * (self.q - self.p))

    def rhs(self, y: float) -> float:
        mag = abs(y)
        return -math.copysign(self.a * mag ** (self.m / self.n) + self.b * mag ** (self.p / self.q), y)


def lemma3_bound(s: FixedTimeSpec) -> float:
    return (1.0 / s.a) * s.n / (s.m - s.n) + (1.0 / s.b) * s.q / (s.q - s.p)


def lemma3_conservative_bound(s: FixedTimeSpec) -> float:
    theta = s.theta
    if theta > 1:
        raise BoundError(f"conservative bound needs theta <= 1, got {theta:.6g}")
    return (s.q / (s.q - s.p)) * (
        math.atan(math.sqrt(s.a / s.b)) / math.sqrt(s.a * s.b) + 1.0 / (s.a * theta)
    )


def _rk4(f, y: float, h: float) -> float:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def lemma3_oracle(s: FixedTimeSpec, y0: float, tol: float = 1e-6, rtol: float = 1e-9) -> float:
    """First time ``|y| < tol`` by step-doubling adaptive RK4.

    Steps are halved whenever the two-half-step estimate disagrees with the
    full step or either would cross zero, so the integration creeps up on the
    finite-time arrival at the origin instead of overshooting it.
    """
    if tol <= 0:
        raise OracleError(f"tol must be > 0, got {tol}")
    y = abs(float(y0))
    if y < tol:
        return 0.0
    f = s.rhs
    limit = 10.0 * lemma3_bound(s)
    t = 0.0
    h = min(0.01 * limit, 0.1 * y / abs(f(y)))
    while t < limit:
        full = _rk4(f, y, h)
        half = _rk4(f, _rk4(f, y, 0.5 * h), 0.5 * h)
        err = abs(full - half)
        if full <= 0 or half <= 0 or err > rtol * y + 1e-3 * tol * rtol:
            h *= 0.5
            if h < 1e-15 * max(t, 1e-300):
                raise OracleError(f"step size underflow at t={t}, y={y}")
            continue
        t += h
        y = half
        if y < tol:
            return t
        if err < 0.03 * rtol * y:
            h *= 2.0
    raise OracleError(f"no convergence before 10x the analytic bound ({limit:.4g} s) from y0={y0}")


@dataclass(frozen=True)
class BoundReport:
    t1: float
    t2: float
    t3: float
    formulas_used: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (self.t2 >= self.t1 > 0 and self.t3 > 0):
            raise BoundError(f"inconsistent bounds t1={self.t1}, t2={self.t2}, t3={self.t3}")


def _staged_spec(gain: float, gain2: float, sup, sub, n_agents: int) -> FixedTimeSpec:
    m, n = sup.num, sup.den
    return FixedTimeSpec(
        a=gain * n_agents ** ((n - m) / (2 * n)), b=gain2, m=m, n=n, p=sub.num, q=sub.den
    )


def _select(spec: FixedTimeSpec) -> tuple[float, str]:
    if spec.theta <= 1:
        return lemma3_conservative_bound(spec), CONSERVATIVE
    return lemma3_bound(spec), DIRECT


def t1_bound(p: GuidanceParams, n_agents: int) -> tuple[float, str]:
    """Reaching-phase bound for the sliding variables."""
    return _select(_staged_spec(p.k1, p.k2, p.ratio_m2n2, p.ratio_p2q2, n_agents))


def t2_bound(p: GuidanceParams, n_agents: int, t1: float) -> tuple[float, str]:
    """``t1`` plus the bound for the disagreement to reach zero on the surface."""
    if t1 < 0:
        raise BoundError(f"t1 must be >= 0, got {t1}")
    sp = p.surface
    stage, tag = _select(_staged_spec(sp.alpha1, sp.alpha2, sp.ratio_m1n1, sp.ratio_p1q1, n_agents))
    return t1 + stage, tag


def t3_bound(p: GuidanceParams, n_agents: int) -> tuple[float, str]:
    """Transverse-velocity bound; the smaller of the direct and conservative forms."""
    spec = _staged_spec(p.k3, p.k4, p.ratio_m3n3, p.ratio_p3q3, n_agents)
    direct = lemma3_bound(spec)
    if spec.theta <= 1:
        conservative = lemma3_conservative_bound(spec)
        if conservative < direct:
            return conservative, CONSERVATIVE
    return direct, DIRECT


def bound_report(p: GuidanceParams, n_agents: int) -> BoundReport:
    t1, tag1 = t1_bound(p, n_agents)
    t2, tag2 = t2_bound(p, n_agents, t1)
    t3, tag3 = t3_bound(p, n_agents)
    return BoundReport(t1, t2, t3, {"t1": tag1, "t2": tag2, "t3": tag3})


def settling_time(t: np.ndarray, values: np.ndarray, threshold: float) -> float | None:
    """Last-entry settling time of ``max_agents |values|`` below ``threshold``.

    ``values`` is ``(samples,)`` or ``(samples, agents)``. Returns the first
    logged time after the final violation, or ``None`` if the signal is
    still above threshold at the last sample.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    mag = np.abs(np.asarray(values, dtype=float))
    if mag.ndim > 1:
        mag = mag.max(axis=1)
    above = np.flatnonzero(mag >= threshold)
    if above.size == 0:
        return float(t[0])
    last = above[-1]
    if last + 1 >= len(t):
        return None
    return float(t[last + 1])


def measure_settling(log, signal: str, threshold: float | None = None) -> float | None:
    if signal not in DEFAULT_THRESHOLDS:
        raise ValueError(f"unknown signal {signal!r}; expected one of {sorted(DEFAULT_THRESHOLDS)}")
    if threshold is None:
        threshold = DEFAULT_THRESHOLDS[signal]
    return settling_time(log.t, log.signal(signal), threshold)
