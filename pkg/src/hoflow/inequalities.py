"""Numerical checks of Sobolev-type inequalities on curves and surfaces.

* Michael-Simon inequality on closed surfaces in flat 3-space with the explicit
  constant ``C(2) = 6 sqrt(3 pi)``;
* Gagliardo-Nirenberg and L^infinity-weighted interpolation on closed curves,
  plus the mixed-norm interpolation family with exponent relation
  ``1/p = j/n + a (1/q - s/n) + (1 - a)/r``;
* density-ratio monotonicity for balls ``B_sigma(xi)`` (plain and weighted forms);
* the sup-norm bound ``max|u| <= C (||u'||_p + ||u||_p)``.

Integrals use vertex/node quadrature weights; ball volumes use hard-threshold
membership of quadrature points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .curves import DiscreteCurve, arclength_derivatives, circle, curve_frame
from .surfaces import DiscreteSurface, closed_grid

DEFAULT_TOL = 0.01


def omega(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sobolev_constant(n: int, imaginary: bool = False) -> float:
    """``pi/2 2^n (n+1)/(n-1) (n+1)^(1/n) omega_n^(-1/n)``; undefined for n = 1."""
    if n < 2:
        raise ValueError("the Sobolev constant has a 1/(n-1) factor and is undefined for n = 1")
    c = 2.0**n * (n + 1) / (n - 1) * (n + 1) ** (1.0 / n) * omega(n) ** (-1.0 / n)
    return c if imaginary else 0.5 * math.pi * c


C2 = sobolev_constant(2)


# -- Michael-Simon on surfaces -----------------------------------------------------------

@dataclass
class CheckResult:
    lhs: float
    rhs: float
    holds: bool
    detail: dict

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "margin": self.margin, "holds": self.holds, **self.detail}


def _surface_integral(s: DiscreteSurface, f: np.ndarray) -> float:
    du, dv = s.steps
    return float(np.sum(s.inner(f * s.area_element())) * du * dv)


def surface_gradient_norm(s: DiscreteSurface, f: np.ndarray) -> np.ndarray:
    df = np.stack([s.d(f, i) for i in range(2)])
    return np.sqrt(np.maximum(np.einsum("ijxy,ixy,jxy->xy", s.ginv, df, df), 0.0))


def verify_michael_simon(s: DiscreteSurface, h, b: float = 1e-3, alpha: float = 2.0 / 3.0,
                         tol: float = DEFAULT_TOL) -> CheckResult:
    """``(int h^2)^(1/2) <= C(2) int (|grad h| + h |H|)`` on a closed surface in R^3.

    ``h`` is a callable of the ambient coordinates or an array on the grid.  The
    support-volume condition is checked for the real parameter ``b``; with a
    flat ambient the injectivity-radius condition is vacuous.
    """
    hv = h(*s.X) if callable(h) else np.asarray(h, dtype=float)
    if np.any(s.inner(hv) < 0):
        raise ValueError("h must be nonnegative")
    n = 2
    support = _surface_integral(s, (hv > 0).astype(float))
    cond = b**2 * (1 - alpha) ** (-2 / n) * (support / omega(n)) ** (2 / n)
    if cond > 1:
        raise ValueError(f"support-volume condition violated ({cond:.3g} > 1)")
    lhs = math.sqrt(_surface_integral(s, hv**2))
    rhs = C2 * _surface_integral(s, surface_gradient_norm(s, hv) + hv * np.abs(s.H))
    return CheckResult(lhs, rhs, lhs <= rhs * (1 + tol), {"C": C2, "support_condition": cond})


def random_nonnegative_function(rng: np.random.Generator, degree: int = 3, kind: str | None = None):
    """Band-limited nonnegative test function of the ambient coordinates."""
    kind = kind or rng.choice(["square", "bump"])
    if kind == "square":
        # square of a random polynomial of total degree <= degree
        exps = [(i, j, k) for i in range(degree + 1) for j in range(degree + 1 - i)
                for k in range(degree + 1 - i - j)]
        coef = rng.normal(size=len(exps))

        def f(x, y, z):
            p = sum(c * x**i * y**j * z**k for c, (i, j, k) in zip(coef, exps))
            return p * p
        return f
    centre = rng.normal(size=3)
    centre /= np.linalg.norm(centre)
    width = rng.uniform(0.3, 1.0)
    amp = rng.uniform(0.1, 5.0)

    def g(x, y, z):
        d2 = (x - centre[0]) ** 2 + (y - centre[1]) ** 2 + (z - centre[2]) ** 2
        return amp * np.exp(-d2 / width**2)
    return g


def sobolev_suite(surface: str = "sphere", count: int = 100, grid: int = 64, seed: int = 0,
                  tol: float = DEFAULT_TOL, **params) -> dict:
    s = closed_grid(surface, grid, **params)
    rng = np.random.default_rng(seed)
    results = [verify_michael_simon(s, random_nonnegative_function(rng), tol=tol) for _ in range(count)]
    ratios = [r.lhs / r.rhs for r in results if r.rhs > 0]
    return {
        "surface": surface,
        "count": count,
        "violations": sum(not r.holds for r in results),
        "max_ratio": max(ratios) if ratios else 0.0,
        "C": C2,
    }


# -- interpolation on curves -----------------------------------------------------------------

def _curve_derivs(curve: DiscreteCurve, T: np.ndarray, J: int):
    fr = curve_frame(curve.vertices, curve.space)
    return fr.sigma, arclength_derivatives(np.asarray(T, dtype=float), fr.sigma, J)


def _lp(w, f, p):
    if math.isinf(p):
        return float(np.max(np.abs(f)))
    return float(np.sum(w * np.abs(f) ** p) ** (1.0 / p))


def gn_ratio(curve: DiscreteCurve, T: np.ndarray, j: int, s: int) -> float:
    """``int |T^(j)|^2 / ((int |T^(s)|^2)^(j/s) (int |T|^2)^(1 - j/s))``; 0 when the numerator vanishes."""
    if not 1 <= j <= s <= 4:
        raise ValueError("need 1 <= j <= s <= 4")
    w, D = _curve_derivs(curve, T, s)
    T0 = float(np.sum(w * D[0] ** 2))
    if T0 == 0.0:
        raise ValueError("zero tensor excluded")
    lhs = float(np.sum(w * D[j] ** 2))
    if lhs <= 1e-20 * T0:
        return 0.0
    return lhs / (float(np.sum(w * D[s] ** 2)) ** (j / s) * T0 ** (1 - j / s))


def lq_ratio(curve: DiscreteCurve, T: np.ndarray, j: int, s: int) -> float:
    """``int |T^(j)|^(2s/j) / (||T||_inf^(2(s/j-1)) int |T^(s)|^2)``."""
    if not 1 <= j <= s - 1:
        raise ValueError("need 1 <= j <= s - 1")
    w, D = _curve_derivs(curve, T, s)
    sup = float(np.max(np.abs(D[0])))
    if sup == 0.0:
        raise ValueError("zero tensor excluded")
    lhs = float(np.sum(w * np.abs(D[j]) ** (2 * s / j)))
    if lhs <= 1e-20 * sup ** (2 * s / j) * float(np.sum(w)):
        return 0.0
    return lhs / (sup ** (2 * (s / j - 1)) * float(np.sum(w * D[s] ** 2)))


def mixed_exponent(j, s, a, q, r, n: int = 1) -> float:
    """``1/p`` from ``j/n + a (1/q - s/n) + (1 - a)/r``."""
    return j / n + a * (1 / q - s / n) + (1 - a) / r


def mixed_ratio(curve: DiscreteCurve, T: np.ndarray, j: int, s: int, a: float, q: float = 2.0,
                r: float = 2.0, p_fallback: float = 8.0) -> float:
    """``||T^(j)||_p / (||T||_{W^{s,q}}^a ||T||_r^(1-a))`` with ``p`` from the exponent relation.

    ``1/p = 0`` gives the sup norm; a negative value allows any finite ``p``
    and ``p_fallback`` is used.
    """
    if not (0 <= j <= s and j / s <= a <= 1):
        raise ValueError("need 0 <= j <= s and j/s <= a <= 1")
    inv = mixed_exponent(j, s, a, q, r)
    p = math.inf if abs(inv) < 1e-14 else (1.0 / inv if inv > 0 else p_fallback)
    w, D = _curve_derivs(curve, T, s)
    W = sum(_lp(w, D[k], q) for k in range(s + 1))
    Lr = _lp(w, D[0], r)
    if Lr == 0.0:
        raise ValueError("zero tensor excluded")
    return _lp(w, D[j], p) / (W**a * Lr ** (1 - a))


def band_limited(rng: np.random.Generator, N: int, modes: int = 8, constant: bool = True) -> np.ndarray:
    """Random trigonometric polynomial sampled at ``N`` equispaced parameters."""
    th = 2 * np.pi * np.arange(N) / N
    k = np.arange(1, modes + 1)
    a, b = rng.normal(size=modes) / k, rng.normal(size=modes) / k
    c0 = rng.normal() if constant else 0.0
    return c0 + (a[:, None] * np.cos(k[:, None] * th) + b[:, None] * np.sin(k[:, None] * th)).sum(0)


def interpolation_ladder(kind: str, j: int, s: int, Ns=(128, 256, 512), count: int = 50,
                         seed: int = 0, curve_builder=None, **kw) -> dict:
    """Sup of the empirical ratio over a random family at every ladder size."""
    fn = {"gn": gn_ratio, "lq": lq_ratio, "mixed": mixed_ratio}[kind]
    sups = []
    for N in Ns:
        curve = curve_builder(N) if curve_builder else circle(N)
        rng = np.random.default_rng(seed)
        sups.append(max(fn(curve, band_limited(rng, N), j, s, **kw) for _ in range(count)))
    finite = all(math.isfinite(v) for v in sups)
    drift = max(sups) / min(sups) if min(sups) > 0 else math.inf
    return {"kind": kind, "j": j, "s": s, "N": list(Ns), "sup": sups, "drift": drift,
            "finite": finite, "ok": finite and drift <= 2.0, **kw}


def sine_ratio(kind: str, j: int = 1, s: int = 2, N: int = 256) -> dict:
    """Ratio for ``T = sin(2 pi s / L)`` on the unit circle against its exact Fourier value."""
    curve = circle(N)
    T = np.sin(2 * np.pi * np.arange(N) / N)
    if kind == "gn":
        # every derivative of sin has the same L2 norm on the unit circle
        value, exact = gn_ratio(curve, T, j, s), 1.0
    elif kind == "lq":
        p = 2 * s / j
        # int |sin^(j)|^p over a period = 2 sqrt(pi) Gamma((p+1)/2) / Gamma(p/2 + 1)
        exact = 2 * math.sqrt(math.pi) * math.gamma((p + 1) / 2) / math.gamma(p / 2 + 1) / math.pi
        value = lq_ratio(curve, T, j, s)
    else:
        raise ValueError(kind)
    return {"kind": kind, "j": j, "s": s, "value": value, "exact": exact,
            "rel_error": abs(value - exact) / exact}


# -- density-ratio monotonicity ------------------------------------------------------------

def _check_radii(sigma, rho, b2, R):
    if not 0 < sigma <= rho:
        raise ValueError("need 0 < sigma <= rho")
    limit = R
    if b2 > 0:
        limit = min(R, math.pi / math.sqrt(b2))
    if not rho < limit:
        raise ValueError(f"radius bound violated: rho = {rho} >= {limit}")


def _sinb(b2: float, t):
    """``sin(b t)`` for real ``b``; ``t`` itself stands in for imaginary ``b``."""
    if b2 > 0:
        return np.sin(math.sqrt(b2) * np.asarray(t))
    return np.asarray(t, dtype=float)


def density_monotonicity(dist: np.ndarray, weights: np.ndarray, Habs: np.ndarray, n: int,
                         sigma: float, rho: float, b2: float, p: float,
                         R: float = math.inf, Gamma: float | None = None,
                         tol: float = DEFAULT_TOL) -> CheckResult:
    """Density-ratio comparison between radii ``sigma <= rho``.

    ``dist`` holds the ambient distances from the quadrature points to the
    centre.  For real ``b`` (``b2 > 0``) the radii are weighted with
    ``(sin b t)^n``; for imaginary ``b`` with ``t^n``.
    """
    if p <= n:
        raise ValueError("need p > n")
    _check_radii(sigma, rho, b2, R)
    if Gamma is None:
        Gamma = float(np.sum(weights * Habs**p) ** (1 / p))
    mu_s = float(np.sum(weights[dist < sigma]))
    mu_r = float(np.sum(weights[dist < rho]))
    lhs = (mu_s / _sinb(b2, sigma) ** n) ** (1 / p)
    first = (mu_r / _sinb(b2, rho) ** n) ** (1 / p)
    if b2 > 0:
        b = math.sqrt(b2)
        tail = Gamma / p * integrate.quad(lambda t: math.sin(b * t) ** (-n / p), sigma, rho)[0]
    else:
        tail = Gamma / (p - n) * (rho ** (1 - n / p) - sigma ** (1 - n / p))
    rhs = first + tail
    holds = lhs <= rhs + tol * max(lhs, 1e-300)
    return CheckResult(lhs, rhs, bool(holds), {"mu_sigma": mu_s, "mu_rho": mu_r, "Gamma": Gamma})


def weighted_density_monotonicity(dist: np.ndarray, weights: np.ndarray, h: np.ndarray,
                                  grad_h: np.ndarray, Habs: np.ndarray, n: int,
                                  sigma: float, rho: float, b2: float, R: float = math.inf,
                                  tol: float = DEFAULT_TOL, taus: int = 400) -> CheckResult:
    """Weighted form with ``int_{B_t} r (|grad h| + h |H|)`` inside the radial integral."""
    _check_radii(sigma, rho, b2, R)
    h_s = float(np.sum((weights * h)[dist < sigma]))
    h_r = float(np.sum((weights * h)[dist < rho]))
    lhs = h_s / _sinb(b2, sigma) ** n
    first = h_r / _sinb(b2, rho) ** n
    dens = weights * dist * (np.abs(grad_h) + h * Habs)
    order = np.argsort(dist)
    cum = np.concatenate([[0.0], np.cumsum(dens[order])])
    sd = dist[order]

    def inner(t):
        return cum[np.searchsorted(sd, t, side="left")]

    if rho > sigma:
        tau = np.linspace(sigma, rho, taus + 1)
        vals = np.array([inner(t) for t in tau]) / (tau * _sinb(b2, tau) ** n)
        tail = float(integrate.trapezoid(vals, tau))
    else:
        tail = 0.0
    rhs = first + tail
    holds = lhs <= rhs + tol * max(lhs, 1e-300)
    return CheckResult(lhs, rhs, bool(holds), {"tail": tail})


def sphere_density_family(grid: int = 96, p: float = 3.0, b: float = 1e-3, seed: int = 0,
                          centres: int = 8, radii=((0.2, 0.5), (0.1, 0.3), (0.3, 1.0), (0.5, 0.5))) -> list:
    """Unit sphere in R^3: random centres on the surface times a few radius pairs."""
    s = closed_grid("sphere", grid)
    du, dv = s.steps
    w = (s.inner(s.area_element()) * du * dv).ravel()
    pts = s.inner(s.X).reshape(3, -1)
    Habs = np.abs(s.inner(s.H)).ravel()
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(centres):
        xi = rng.normal(size=3)
        xi /= np.linalg.norm(xi)
        d = np.linalg.norm(pts - xi[:, None], axis=0)
        for sigma, rho in radii:
            out.append(density_monotonicity(d, w, Habs, 2, sigma, rho, b * b, p))
    return out


def curve_density_family(N: int = 512, b: float = 1e-3, seed: int = 0, curves=None,
                         radii=((0.2, 0.5), (0.1, 1.0), (0.5, 1.5), (0.4, 0.4))) -> list:
    """Weighted form with ``h = 1`` and random smooth ``h >= 0`` on planar and curved-ambient curves."""
    from .curves import perturbed_circle
    from .spaces import SpaceForm

    rng = np.random.default_rng(seed)
    if curves is None:
        curves = [circle(N), perturbed_circle(N, 1.0, 0.1, 5, seed),
                  perturbed_circle(N, 0.5, 0.1, 5, seed + 1, SpaceForm.hyperbolic())]
    out = []
    for c in curves:
        fr = curve_frame(c.vertices, c.space)
        w = fr.sigma
        Habs = np.abs(fr.kappa)
        # real b in flat space; imaginary b (b^2 = K) in the hyperbolic plane
        b2 = b * b if c.space.kind == "euclidean" else c.space.curvature
        hs = [np.ones(c.N), 1.0 + 0.9 * np.sin(2 * np.pi * np.arange(c.N) / c.N + rng.uniform(0, 6))]
        for h in hs:
            dh = arclength_derivatives(h, w, 1)[1]
            for xi_idx in rng.integers(0, c.N, size=2):
                xi = c.vertices[xi_idx]
                d = c.space.distance(c.vertices, xi)
                for sigma, rho in radii:
                    out.append(weighted_density_monotonicity(d, w, h, dh, Habs, 1, sigma, rho, b2,
                                                             R=c.space.injectivity_radius))
    return out


# -- sup-norm bound -------------------------------------------------------------------------

def sup_bound_ratio(curve: DiscreteCurve, u: np.ndarray, p: float) -> float:
    """``max|u| / (||u'||_p + ||u||_p)`` on a curve (n = 1)."""
    if p <= 1:
        raise ValueError("need p > n = 1")
    w, D = _curve_derivs(curve, u, 1)
    den = _lp(w, D[1], p) + _lp(w, D[0], p)
    if den == 0.0:
        raise ValueError("zero function excluded")
    return float(np.max(np.abs(D[0]))) / den


def sup_bound_surface_ratio(s: DiscreteSurface, u: np.ndarray, p: float) -> float:
    if p <= 2:
        raise ValueError("need p > n = 2")
    du, dv = s.steps
    w = s.inner(s.area_element()) * du * dv
    g = s.inner(surface_gradient_norm(s, u))
    uu = s.inner(u)
    den = float(np.sum(w * g**p) ** (1 / p) + np.sum(w * np.abs(uu) ** p) ** (1 / p))
    if den == 0.0:
        raise ValueError("zero function excluded")
    return float(np.max(np.abs(uu))) / den


def sup_bound_ladder(p: float = 2.0, Ns=(128, 256, 512), count: int = 50, seed: int = 0,
                     curve_builder=None) -> dict:
    sups = []
    for N in Ns:
        curve = curve_builder(N) if curve_builder else circle(N)
        rng = np.random.default_rng(seed)
        sups.append(max(sup_bound_ratio(curve, band_limited(rng, N), p) for _ in range(count)))
    drift = max(sups) / min(sups)
    finite = all(math.isfinite(v) for v in sups)
    return {"p": p, "N": list(Ns), "sup": sups, "drift": drift, "finite": finite,
            "ok": finite and drift <= 2.0}
