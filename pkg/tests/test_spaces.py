import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hoflow.spaces import ChartError, SpaceForm
from oracles import sphere_circle_geodesic_curvature


def test_euclidean_chart_is_flat():
    E = SpaceForm.euclidean()
    x = np.array([[0.3, -2.0], [5.0, 1.0]])
    assert np.all(E.chart_factor(x) == 1.0)
    assert np.all(E.grad_log_factor(x) == 0.0)
    assert E.injectivity_radius == math.inf


def test_injectivity_radii():
    assert SpaceForm.sphere(1.0).injectivity_radius == pytest.approx(math.pi)
    assert SpaceForm.sphere(0.25).injectivity_radius == pytest.approx(2 * math.pi)
    assert SpaceForm.hyperbolic().injectivity_radius == math.inf


@pytest.mark.parametrize("r0", [0.2, 0.5, 1.0, 1.7])
def test_sphere_chart_circle_curvature(r0):
    S = SpaceForm.sphere()
    th = np.linspace(0, 2 * np.pi, 7)
    x = r0 * np.stack([np.cos(th), np.sin(th)], axis=1)
    normal = x / r0
    lam, dn = S.geodesic_curvature_correction(x, normal)
    # Euclidean curvature 1/r0 measured against the inward normal
    kappa = (1.0 / r0 + dn) / lam
    assert np.allclose(kappa, sphere_circle_geodesic_curvature(r0), rtol=1e-12)


def test_unit_circle_on_sphere_is_great_circle():
    S = SpaceForm.sphere()
    assert S.chart_radius_to_intrinsic(1.0) == pytest.approx(math.pi / 2)
    assert S.circle_curvature(math.pi / 2) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.95), st.sampled_from(["sphere", "hyperbolic"]))
def test_radius_round_trip(r, kind):
    space = SpaceForm.sphere() if kind == "sphere" else SpaceForm.hyperbolic()
    rho = space.chart_radius_to_intrinsic(r)
    assert space.intrinsic_radius_to_chart(rho) == pytest.approx(r, rel=1e-12)


def test_hyperbolic_chart_boundary():
    H = SpaceForm.hyperbolic()
    with pytest.raises(ChartError, match="curve leaves chart"):
        H.check_chart(np.array([[0.0, 0.9999999]]))
    H.check_chart(np.array([[0.0, 0.5]]))


def test_b_intervals():
    S = SpaceForm.sphere()
    iv = S.admissible_b_interval()
    assert iv.contains(1.0) and not iv.contains(1.5)
    H = SpaceForm.hyperbolic()
    ivh = H.admissible_b_interval()
    assert ivh.has_imaginary and ivh.contains(-1.0)


def test_space_validation():
    with pytest.raises(ValueError):
        SpaceForm("sphere", -1.0)
    with pytest.raises(ValueError):
        SpaceForm("hyperbolic", 1.0)
    assert SpaceForm.from_dict(SpaceForm.sphere(0.5).to_dict()) == SpaceForm.sphere(0.5)


def test_distance_symmetry_and_zero():
    for space in (SpaceForm.euclidean(), SpaceForm.sphere(), SpaceForm.hyperbolic()):
        a = np.array([[0.1, 0.2]])
        b = np.array([[-0.3, 0.4]])
        assert space.distance(a, b) == pytest.approx(space.distance(b, a))
        assert space.distance(a, a) == pytest.approx(0.0, abs=1e-12)
