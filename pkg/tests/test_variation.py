import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hoflow.curves import circle, perturbed_circle
from hoflow.spaces import SpaceForm
from hoflow.variation import (EL_M1_COEFFS, compare_fields, directional_derivative, discrete_gradient,
                              euler_lagrange_m1, gradient_consistency, pairing, step_size_check)

SPACES = {"euclidean": SpaceForm.euclidean(), "sphere": SpaceForm.sphere(),
          "hyperbolic": SpaceForm.hyperbolic()}


def test_coefficients():
    assert EL_M1_COEFFS == (-2, -1, -2, 1)


def test_unit_circle_is_stationary():
    c = circle(256)
    assert np.max(np.abs(discrete_gradient(c, 1).values)) <= 1e-3
    assert np.max(np.abs(euler_lagrange_m1(c).values)) <= 1e-6


@pytest.mark.parametrize("r", [0.7, 1.5, 2.0])
def test_circle_field_matches_radial_reduction(r):
    c = circle(256, r)
    expected = (r * r - 1) / r**3
    assert np.allclose(euler_lagrange_m1(c).values, expected, rtol=1e-6)
    assert np.allclose(discrete_gradient(c, 1).values, expected, rtol=1e-4, atol=1e-6)


def test_m2_unit_circle():
    # F_2(r) = 2 pi (r + 1/r^3), F_2'(1) / (2 pi) = -2
    E = discrete_gradient(circle(256), 2).values
    assert np.allclose(E, -2.0, atol=1e-3)


def test_step_size_check_default_is_sound():
    rep = step_size_check(perturbed_circle(128, 1.0, 0.1, 5, 0), 1)
    assert rep["verdict"] == "ok"
    assert step_size_check(perturbed_circle(128), 1, h_fd=1e-12)["verdict"] != "ok"


def test_discrete_gradient_diagnostics():
    g = discrete_gradient(perturbed_circle(64), 1)
    assert g.method == "discrete"
    assert g.diagnostics["richardson"] is True
    assert g.norm() > 0


def test_consistency_small_ladder():
    rep = gradient_consistency(SpaceForm.euclidean(), Ns=(64, 128, 256))
    assert rep.slope >= 2
    assert rep.errors[0] > rep.errors[-1]
    assert set(rep.to_dict()) >= {"N", "errors", "slope", "space"}


def test_compare_fields_absolute_fallback():
    c = circle(128)
    err, is_abs = compare_fields(euler_lagrange_m1(c), discrete_gradient(c, 1))
    assert is_abs and err < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.sampled_from(list(SPACES)), st.sampled_from([1, 2]))
def test_pairing_identity(seed, kind, m):
    space = SPACES[kind]
    c = perturbed_circle(96, 0.5, 0.1, 4, seed, space, reparam=False)
    rng = np.random.default_rng(seed)
    th = 2 * np.pi * np.arange(c.N) / c.N
    V = sum(rng.normal() * np.cos(k * th + rng.uniform(0, 6)) for k in range(4))
    E = discrete_gradient(c, m).values
    dF = directional_derivative(c, m, V)
    assert pairing(c, E, V) == pytest.approx(dF, rel=1e-4, abs=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.sampled_from(list(SPACES)))
def test_orientation_flip_negates_field(seed, kind):
    c = perturbed_circle(96, 0.5, 0.1, 4, seed, SPACES[kind])
    E = euler_lagrange_m1(c).values
    Ef = euler_lagrange_m1(c.flipped()).values
    assert np.allclose(np.roll(Ef[::-1], 1), -E, atol=1e-9 * np.max(np.abs(E)) + 1e-12)
