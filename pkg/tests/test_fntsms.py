from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftguidance.fntsms import (
    OddRatio,
    SingularSurfaceError,
    SurfaceParams,
    beta,
    beta_dot,
    patch_branch,
    pow_odd,
    s_bar,
    surface,
)

P = SurfaceParams(alpha1=0.25, alpha2=2.0, ratio_m1n1=OddRatio(11, 9), ratio_p1q1=OddRatio(5, 7), mu=0.001)
E = 5 / 7


def test_odd_ratio_validation():
    assert OddRatio(13, 11).super_unit and not OddRatio(5, 7).super_unit
    for bad in [(2, 3), (3, 3), (0, 1), (-3, 5)]:
        with pytest.raises(ValueError):
            OddRatio(*bad)
    with pytest.raises(ValueError, match="m1/n1"):
        SurfaceParams(0.25, 2.0, OddRatio(5, 7), OddRatio(5, 7), 0.001)


def test_pow_odd_examples():
    assert pow_odd(-8, OddRatio(1, 3)) == pytest.approx(-2)
    assert pow_odd(0, OddRatio(5, 7)) == 0
    assert pow_odd(8, OddRatio(5, 3)) == pytest.approx(32)


def test_s_bar_examples():
    assert s_bar(0, 0, P) == 0
    assert s_bar(1, 0.5, P) == pytest.approx(2.75)
    assert s_bar(-1, 0, P) == pytest.approx(-2.25)


def test_beta_examples():
    assert beta(0, 0, P) == 0
    assert beta(1, 0.3, P) == pytest.approx(1.0)
    # just inside the patch, value approaches mu ** (p1/q1)
    assert 0.001 ** E == pytest.approx(7.1969e-3, rel=1e-4)
    assert P.l1 * P.mu + P.l2 * P.mu**2 == pytest.approx(P.mu**E, rel=1e-12)


def test_beta_dot_examples():
    assert beta_dot(3.7, 0, P) == 0
    assert beta_dot(0, 1, P) == pytest.approx(P.l1)
    exact = Fraction(-1, 8) + Fraction(11, 9) * Fraction(1, 8) + Fraction(5, 7)
    assert beta_dot(1, 1, P) == pytest.approx(float(exact), rel=1e-12)
    assert float(exact) == pytest.approx(0.742063, abs=1e-6)


def test_beta_dot_singular_branch_detected(monkeypatch):
    # with mu > 0 the patch always shields xi_r = 0; force the power-law branch to reach it
    import ftguidance.fntsms as fntsms

    monkeypatch.setattr(fntsms, "patch_branch", lambda xr, *_: np.zeros(np.shape(xr), dtype=bool))
    with pytest.raises(SingularSurfaceError):
        beta_dot(0.0, 1.0, P)


def test_surface_examples():
    assert surface(0, 0, P) == 0
    assert surface(1, 0.5, P) == pytest.approx(2.75)
    assert surface(1, 0.5, P) == pytest.approx(s_bar(1, 0.5, P))


def test_patch_value_and_slope_match_at_mu():
    mu = P.mu
    assert P.l1 * mu + P.l2 * mu**2 == pytest.approx(mu**E, rel=1e-9)
    assert P.l1 + 2 * P.l2 * mu == pytest.approx(E * mu ** (E - 1), rel=1e-9)
    # same from the negative side through the public functions
    inside = beta(-mu * (1 - 1e-12), 5.0, P)
    assert inside == pytest.approx(-(mu**E), rel=1e-9)


def test_nonsingular_sweep():
    xr = np.linspace(-10 * P.mu, 10 * P.mu, 401)
    xv = np.linspace(-10, 10, 201)
    XR, XV = np.meshgrid(xr, xv)
    nonzero = s_bar(XR, XV, P) != 0
    out = beta_dot(XR[nonzero], XV[nonzero], P)
    assert np.all(np.isfinite(out))


@given(st.floats(-1e4, 1e4), st.floats(-1e3, 1e3))
def test_oddness(xr, xv):
    assert beta(-xr, -xv, P) == pytest.approx(-beta(xr, xv, P), abs=1e-12, rel=1e-12)
    assert surface(-xr, -xv, P) == pytest.approx(-surface(xr, xv, P), abs=1e-9, rel=1e-12)


@given(st.floats(1e-3, 1e4), st.booleans(), st.floats(-1e3, 1e3))
def test_power_branch_collapse(mag, neg, xv):
    xr = -mag if neg else mag
    collapsed = xv + P.alpha1 * pow_odd(xr, P.ratio_m1n1) + P.alpha2 * pow_odd(xr, P.ratio_p1q1)
    assert surface(xr, xv, P) == pytest.approx(collapsed, abs=1e-12 * max(1.0, abs(collapsed)) + 1e-12)


def test_tie_takes_power_branch():
    assert not patch_branch(P.mu, 1.0, P)
    assert patch_branch(P.mu * 0.999, 1.0, P)
