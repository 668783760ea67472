"""Independent reference values for the test suite.

Nothing here calls into the package's differential-geometry code: the ellipse
quantities are derived symbolically with sympy and the circle radius ODE is
integrated with scipy.
"""

import functools
import math

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

_th = sp.symbols("theta", real=True)


@functools.lru_cache(maxsize=None)
def _ellipse_exprs(a, b, smax):
    x, y = a * sp.cos(_th), b * sp.sin(_th)
    speed = sp.sqrt(sp.diff(x, _th) ** 2 + sp.diff(y, _th) ** 2)

    def d_ds(f):
        return sp.diff(f, _th) / speed

    tx, ty = d_ds(x), d_ds(y)
    nu = [ty, -tx]                      # outward unit normal of a counter-clockwise curve
    kappa = tx * d_ds(ty) - ty * d_ds(tx)
    jet, k = [], kappa
    for _ in range(smax + 1):
        jet.append(k)
        k = d_ds(k)
    norms, v = [], nu
    for _ in range(smax + 1):
        norms.append(v[0] ** 2 + v[1] ** 2)
        v = [d_ds(v[0]), d_ds(v[1])]
    lam = lambda e: sp.lambdify(_th, e, "numpy")
    return [lam(e) for e in jet], [lam(e) for e in norms]


def ellipse_theta(N):
    return 2 * np.pi * np.arange(N) / N


def ellipse_kappa_jet(N, a=2.0, b=1.0, smax=5):
    """Exact ``[kappa, kappa', ..., kappa^(smax)]`` at the parameter nodes."""
    jet, _ = _ellipse_exprs(a, b, smax)
    th = ellipse_theta(N)
    return np.array([np.broadcast_to(f(th), th.shape) for f in jet])


def ellipse_nu_norm_sq(N, s, a=2.0, b=1.0, smax=5):
    """Exact ``|d^s nu / ds^s|^2`` by direct symbolic differentiation of the normal vector."""
    _, norms = _ellipse_exprs(a, b, smax)
    th = ellipse_theta(N)
    return np.broadcast_to(norms[s](th), th.shape).astype(float)


def circle_radius_ode(r0, t_eval):
    """Radius of a flat circle under the m=1 flow: ``r' = -(r^2 - 1) / r^3``."""
    sol = solve_ivp(lambda t, r: -(r * r - 1) / r**3, (0.0, float(t_eval[-1])), [r0],
                    t_eval=t_eval, rtol=1e-12, atol=1e-14, method="DOP853")
    return sol.y[0]


def circle_energy(r, m=1):
    """Flat circle: ``F_1 = 2 pi (r + 1/r)``, ``F_2 = 2 pi (r + 1/r^3)``."""
    return 2 * math.pi * (r + r ** (1 - 2 * m))


def sphere_circle_geodesic_curvature(r0, K=1.0):
    """Geodesic curvature of the chart circle ``|x| = r0`` in the stereographic chart.

    The chart metric is ``(2 / (1 + K|x|^2))^2 |dx|^2``, so the geodesic radius is
    ``rho = 2 atan(sqrt(K) r0) / sqrt(K)`` and ``kappa = sqrt(K) cot(sqrt(K) rho)``.
    """
    rho = 2 * math.atan(math.sqrt(K) * r0) / math.sqrt(K)
    return math.sqrt(K) / math.tan(math.sqrt(K) * rho)
