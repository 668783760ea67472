import math

import numpy as np
import pytest

from hoflow.surfaces import (DiscreteSurface, closed_grid, convergence_report, convergence_slope,
                             divergence_identity, surface_area)


def test_sphere_curvatures_exact():
    for s in DiscreteSurface.build("sphere", 32):
        assert np.allclose(s.inner(s.gauss_curvature()), 1.0, atol=1e-8)
        assert np.allclose(np.abs(s.inner(s.H)), 2.0, atol=1e-8)
        assert np.allclose(s.inner(s.A_sq()), 2.0, atol=1e-8)


def test_torus_gauss_curvature():
    s = DiscreteSurface.build("torus", 64)[0]
    R, r = 2.0, 1.0
    K = s.inner(s.gauss_curvature())
    # K = cos(phi) / (r (R + r cos(phi))) ranges over [-1/(r(R-r)), 1/(r(R+r))]
    assert K.max() == pytest.approx(1 / (r * (R + r)), rel=1e-4)
    assert K.min() == pytest.approx(-1 / (r * (R - r)), rel=1e-4)


def test_plane_residuals_vanish():
    rep = convergence_report("plane", (16, 32))
    for k, vals in rep["residuals"].items():
        assert max(vals) < 1e-10, k


def test_convergence_slope_handles_floor():
    assert convergence_slope((32, 64), [1e-3, 6.25e-5]) == pytest.approx(4.0)
    assert convergence_slope((32, 64), [1e-16, 1e-16], [1e-12, 1e-12]) == math.inf


def test_surface_areas():
    assert surface_area(closed_grid("sphere", 64)) == pytest.approx(4 * math.pi, rel=1e-3)
    assert surface_area(closed_grid("torus", 64)) == pytest.approx(4 * math.pi**2 * 2, rel=1e-4)


def test_divergence_identity_fields():
    s = closed_grid("sphere", 64)
    d = divergence_identity(s, "normal")
    assert abs(abs(d["lhs"]) - 8 * math.pi) / (8 * math.pi) < 5e-3
    assert abs(d["gap"]) < 1e-2
    assert divergence_identity(s, "zero")["gap"] == 0.0
    t = closed_grid("torus", 48)
    assert abs(divergence_identity(t, "position")["gap"]) < 1e-8


def test_divergence_identity_tangent_field_converges():
    f = lambda x, y, z: x * y + z
    assert abs(divergence_identity(closed_grid("torus", 32), "tangent_gradient", function=f)["gap"]) < 1e-10
    gaps = [abs(divergence_identity(closed_grid("sphere", n), "tangent_gradient", function=f)["gap"])
            for n in (32, 64)]
    assert gaps[1] < gaps[0] / 3
