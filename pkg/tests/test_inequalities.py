import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hoflow import inequalities as iq
from hoflow.curves import circle, perturbed_circle
from hoflow.surfaces import closed_grid


def test_sobolev_constant():
    assert iq.C2 == pytest.approx(6 * math.sqrt(3 * math.pi))
    assert iq.C2 == pytest.approx(18.4199, abs=1e-4)
    with pytest.raises(ValueError):
        iq.sobolev_constant(1)


def test_michael_simon_trivial_and_constant():
    s = closed_grid("sphere", 48)
    zero = iq.verify_michael_simon(s, lambda x, y, z: 0 * x)
    assert zero.holds and zero.lhs == 0.0
    one = iq.verify_michael_simon(s, lambda x, y, z: 1 + 0 * x)
    # h = 1 on the unit sphere: sqrt(4 pi) <= C * 2 * 4 pi
    assert one.lhs == pytest.approx(math.sqrt(4 * math.pi), rel=1e-3)
    assert one.rhs == pytest.approx(iq.C2 * 8 * math.pi, rel=1e-3)
    with pytest.raises(ValueError):
        iq.verify_michael_simon(s, lambda x, y, z: x)


def test_support_condition_enforced():
    s = closed_grid("sphere", 32)
    with pytest.raises(ValueError, match="support"):
        iq.verify_michael_simon(s, lambda x, y, z: 1 + 0 * x, b=1.0)


def test_small_sobolev_suites():
    for name in ("sphere", "torus"):
        rep = iq.sobolev_suite(name, count=10, grid=32, seed=1)
        assert rep["violations"] == 0 and rep["max_ratio"] < 1


@pytest.mark.parametrize("kind,exact", [("gn", 1.0), ("lq", 0.75)])
def test_sine_ratios(kind, exact):
    rep = iq.sine_ratio(kind)
    assert rep["exact"] == pytest.approx(exact)
    assert rep["rel_error"] < 1e-6


def test_mixed_exponent_and_ratio():
    assert iq.mixed_exponent(1, 2, 0.5, 2, 2) == pytest.approx(0.5)
    assert iq.mixed_exponent(1, 3, 0.5, 2, 2) == pytest.approx(0.0)
    rng = np.random.default_rng(0)
    c = circle(128)
    val = iq.mixed_ratio(c, iq.band_limited(rng, 128), 1, 2, 0.5)
    assert math.isfinite(val) and val > 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_gn_ratio_bounded_on_random_band_limited(seed):
    c = perturbed_circle(128, 1.0, 0.1, 5, seed % 50)
    T = iq.band_limited(np.random.default_rng(seed), 128)
    r = iq.gn_ratio(c, T, 1, 2)
    assert 0 < r < 10


def test_ladders_small():
    rep = iq.interpolation_ladder("gn", 1, 2, Ns=(64, 128), count=10)
    assert rep["finite"] and rep["drift"] <= 2
    sb = iq.sup_bound_ladder(2.0, Ns=(64, 128), count=10)
    assert sb["ok"]


def test_sup_bound_constant_function():
    # max|u| / (0 + ||1||_2) = 1 / sqrt(2 pi)
    assert iq.sup_bound_ratio(circle(256), np.ones(256), 2.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    with pytest.raises(ValueError):
        iq.sup_bound_ratio(circle(64), np.ones(64), 1.0)
    with pytest.raises(ValueError):
        iq.sup_bound_ratio(circle(64), np.zeros(64), 2.0)


def test_density_monotonicity_basic():
    c = circle(512)
    d = np.hypot(*(c.vertices - c.vertices[0]).T)
    w = c.frame().sigma
    res = iq.density_monotonicity(d, w, np.ones_like(w), 1, 0.2, 0.8, 1e-6, 3.0)
    assert res.holds and res.margin >= 0
    same = iq.density_monotonicity(d, w, np.ones_like(w), 1, 0.5, 0.5, 1e-6, 3.0)
    assert same.margin == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        iq.density_monotonicity(d, w, np.ones_like(w), 1, 0.8, 0.2, 1e-6, 3.0)


def test_density_families_small():
    assert all(r.holds for r in iq.sphere_density_family(grid=32, centres=2))
    assert all(r.holds for r in iq.curve_density_family(N=128))


@pytest.mark.parametrize("fn", [iq.gn_ratio, iq.lq_ratio])
def test_constant_tensor_ratio_zero(fn):
    assert fn(circle(64), np.full(64, 2.0), 1, 2) == 0.0
    with pytest.raises(ValueError, match="zero"):
        fn(circle(64), np.zeros(64), 1, 2)


def test_sphere_density_reference_case():
    # unit sphere, b = 1e-3, p = 3, sigma = 0.2, rho = 0.5, Gamma = (4 pi)^(1/3) * 2
    s = closed_grid("sphere", 96)
    du, dv = s.steps
    w = (s.inner(s.area_element()) * du * dv).ravel()
    pts = s.inner(s.X).reshape(3, -1)
    d = np.linalg.norm(pts - np.array([[0.0], [0.0], [1.0]]), axis=0)
    res = iq.density_monotonicity(d, w, np.abs(s.inner(s.H)).ravel(), 2, 0.2, 0.5, 1e-6, 3.0)
    assert res.detail["Gamma"] == pytest.approx((4 * math.pi) ** (1 / 3) * 2, rel=1e-3)
    assert res.holds and res.margin > 0
