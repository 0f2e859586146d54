"""Fast nonsingular terminal sliding surface.

All functions accept scalars or numpy arrays and broadcast elementwise.
Branch "A" is the power-law form of beta; branch "B" is the quadratic
patch used inside ``|xi_r| < mu`` whenever ``s_bar != 0``, which keeps the
surface derivative finite at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class SingularSurfaceError(ArithmeticError):
    """beta_dot evaluated on the power-law branch at xi_r = 0 with xi_vr != 0."""


@dataclass(frozen=True)
class OddRatio:
    """Exponent ``num/den`` with both parts positive odd integers."""

    num: int
    den: int

    def __post_init__(self) -> None:
        for name, v in (("num", self.num), ("den", self.den)):
            if int(v) != v or v <= 0 or v % 2 == 0:
                raise ValueError(f"OddRatio.{name} must be a positive odd integer, got {v}")
        object.__setattr__(self, "num", int(self.num))
        object.__setattr__(self, "den", int(self.den))
        if self.num == self.den:
            raise ValueError(f"OddRatio {self.num}/{self.den} must differ from 1")

    @property
    def value(self) -> float:
        return self.num / self.den

    @property
    def super_unit(self) -> bool:
        return self.num > self.den

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


def _need(ratio: OddRatio, super_unit: bool, name: str) -> None:
    if ratio.super_unit != super_unit:
        kind = "> 1" if super_unit else "< 1"
        raise ValueError(f"{name} must be {kind}, got {ratio}")


@dataclass(frozen=True)
class SurfaceParams:
    alpha1: float
    alpha2: float
    ratio_m1n1: OddRatio
    ratio_p1q1: OddRatio
    mu: float

    def __post_init__(self) -> None:
        if not self.alpha1 > 0 or not self.alpha2 > 0:
            raise ValueError(f"alpha1, alpha2 must be > 0, got {self.alpha1}, {self.alpha2}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        _need(self.ratio_m1n1, True, "m1/n1")
        _need(self.ratio_p1q1, False, "p1/q1")

    @property
    def l1(self) -> float:
        e = self.ratio_p1q1.value
        return (2.0 - e) * self.mu ** (e - 1.0)

    @property
    def l2(self) -> float:
        e = self.ratio_p1q1.value
        return (e - 1.0) * self.mu ** (e - 2.0)


def pow_odd(x, e: OddRatio | float):
    """Sign-preserving power ``sign(x) |x|^e`` (the real odd root for odd ratios)."""
    v = e.value if isinstance(e, OddRatio) else float(e)
    return np.sign(x) * np.abs(x) ** v


def s_bar(xi_r, xi_vr, p: SurfaceParams):
    return xi_vr + p.alpha1 * xi_r + p.alpha2 * pow_odd(xi_r, p.ratio_p1q1)


def patch_branch(xi_r, xi_vr, p: SurfaceParams):
    """True where the quadratic patch (branch B) is active."""
    return (s_bar(xi_r, xi_vr, p) != 0) & (np.abs(xi_r) < p.mu)


def beta(xi_r, xi_vr, p: SurfaceParams):
    k = p.alpha1 / p.alpha2
    power_form = -k * xi_r + k * pow_odd(xi_r, p.ratio_m1n1) + pow_odd(xi_r, p.ratio_p1q1)
    patch = p.l1 * xi_r + p.l2 * np.sign(xi_r) * xi_r * xi_r
    return np.where(patch_branch(xi_r, xi_vr, p), patch, power_form)[()]


def beta_dot(xi_r, xi_vr, p: SurfaceParams):
    xi_r = np.asarray(xi_r, dtype=float)
    xi_vr = np.asarray(xi_vr, dtype=float)
    in_patch = patch_branch(xi_r, xi_vr, p)
    mag = np.abs(xi_r)
    if np.any(~in_patch & (mag == 0) & (xi_vr != 0)):
        raise SingularSurfaceError(
            "beta_dot on the power-law branch at xi_r = 0 with xi_vr != 0; "
            "branch selection should have chosen the patch"
        )
    e1 = p.ratio_m1n1.value
    e2 = p.ratio_p1q1.value
    k = p.alpha1 / p.alpha2
    # safe magnitude avoids 0 ** negative; those entries are zeroed below
    safe = np.where(mag > 0, mag, 1.0)
    gain_a = -k + e1 * k * safe ** (e1 - 1.0) + e2 * safe ** (e2 - 1.0)
    power_form = np.where(xi_vr == 0, 0.0, gain_a * xi_vr)
    patch = (p.l1 + 2.0 * p.l2 * mag) * xi_vr
    return np.where(in_patch, patch, power_form)[()]


def surface(xi_r, xi_vr, p: SurfaceParams):
    return xi_vr + p.alpha1 * xi_r + p.alpha2 * beta(xi_r, xi_vr, p)
