"""Discrete closed curves in a space-form chart.

Vertex arrays have shape ``(..., N, 2)``; the leading axes are a batch, which
lets the variation module evaluate many perturbed curves in one pass.

Jets are computed from the vertex parameter ``u`` (unit spacing) with narrow
4th-order periodic stencils and converted to arclength derivatives by the
exact chain rule, so non-uniformly spaced curves are handled consistently.
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .spaces import ChartError, SpaceForm

MIN_VERTICES = 16


class ImmersionError(ValueError):
    """Degenerate or badly resolved discrete curve."""


class ResolutionError(ValueError):
    """Jet order too high for the vertex count."""


@functools.lru_cache(maxsize=None)
def central_stencil(order: int, accuracy: int = 4):
    """Offsets and weights of the narrowest central stencil for ``d^order/du^order``."""
    half = (order + 1) // 2 + accuracy // 2 - 1
    offsets = np.arange(-half, half + 1)
    A = np.vander(offsets.astype(float), increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = math.factorial(order)
    coeffs = np.linalg.solve(A, rhs)
    # stencil weights are small rationals; snap away solver noise
    coeffs = [float(Fraction(c).limit_denominator(5040)) for c in coeffs]
    return tuple(int(o) for o in offsets), tuple(coeffs)


def periodic_diff(f: np.ndarray, order: int, axis: int = -1, accuracy: int = 4) -> np.ndarray:
    """Periodic finite-difference derivative with unit grid spacing."""
    if order == 0:
        return np.array(f, dtype=float, copy=True)
    offsets, coeffs = central_stencil(order, accuracy)
    out = np.zeros_like(f, dtype=float)
    for o, c in zip(offsets, coeffs):
        if c != 0.0:
            out += c * np.roll(f, -o, axis=axis)
    return out


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass
class CurveFrame:
    """Per-vertex differential data derived from chart vertices."""

    lam: np.ndarray        # conformal factor at vertices
    sigma: np.ndarray      # metric speed |dphi/du|
    tangent: np.ndarray    # Euclidean unit tangent in the chart
    normal: np.ndarray     # Euclidean unit normal nu_hat (outward for CCW curves)
    kappa: np.ndarray      # geodesic curvature, positive for CCW convex curves


def curve_frame(x: np.ndarray, space: SpaceForm) -> CurveFrame:
    xu = periodic_diff(x, 1, axis=-2)
    xuu = periodic_diff(x, 2, axis=-2)
    speed = np.sqrt(np.sum(xu * xu, axis=-1))
    if np.any(speed <= 0.0):
        raise ImmersionError("immersion failure: vanishing tangent")
    T = xu / speed[..., None]
    nu = np.stack([T[..., 1], -T[..., 0]], axis=-1)
    kappa_e = _cross(xu, xuu) / speed**3
    lam = space.chart_factor(x)
    # kappa_e is measured against the inward normal -nu
    dn = -np.sum(space.grad_log_factor(x) * nu, axis=-1)
    kappa = (kappa_e - dn) / lam
    return CurveFrame(lam=lam, sigma=lam * speed, tangent=T, normal=nu, kappa=kappa)


def arclength_operator(sigma: np.ndarray, J: int):
    """Coefficients ``c[j][k]`` with ``d^j f/ds^j = sum_k c[j][k] d^k f/du^k``."""
    inv = 1.0 / sigma
    coeffs = [{0: np.ones_like(sigma)}]
    for _ in range(J):
        nxt = {}
        for k, c in coeffs[-1].items():
            # c[0] is the constant 1 and only appears at j = 0
            if k > 0:
                nxt[k] = nxt.get(k, 0.0) + inv * periodic_diff(c, 1)
            nxt[k + 1] = nxt.get(k + 1, 0.0) + inv * c
        coeffs.append(nxt)
    return coeffs


def arclength_derivatives(f: np.ndarray, sigma: np.ndarray, J: int) -> np.ndarray:
    """Stack ``[f, f', ..., f^(J)]`` of arclength derivatives along the last axis."""
    coeffs = arclength_operator(sigma, J)
    udiffs = [f] + [periodic_diff(f, k) for k in range(1, J + 1)]
    out = [f]
    for j in range(1, J + 1):
        acc = np.zeros_like(f, dtype=float)
        for k, c in coeffs[j].items():
            acc = acc + c * udiffs[k]
        out.append(acc)
    return np.stack(out, axis=-2)


def jet_arrays(x: np.ndarray, space: SpaceForm, J: int):
    """Return ``(frame, kappa_jet)`` with ``kappa_jet`` of shape ``(..., J+1, N)``."""
    N = x.shape[-2]
    if J > N / 4:
        raise ResolutionError(f"insufficient resolution: jet order {J} > N/4 = {N / 4:g}")
    frame = curve_frame(x, space)
    return frame, arclength_derivatives(frame.kappa, frame.sigma, J)


def metric_arrays(x: np.ndarray, space: SpaceForm):
    """Midpoint-rule metric edge lengths and vertex weights."""
    xn = np.roll(x, -1, axis=-2)
    mid = 0.5 * (x + xn)
    ell = space.chart_factor(mid) * np.sqrt(np.sum((xn - x) ** 2, axis=-1))
    w = 0.5 * (np.roll(ell, 1, axis=-1) + ell)
    return ell, w


QUADRATURES = ("speed", "chord")


def quadrature_weights(x: np.ndarray, space: SpaceForm, rule: str = "speed") -> np.ndarray:
    """Vertex weights for integrals along the curve.

    ``speed`` is the periodic trapezoid rule on the 4th-order metric speed and
    matches the accuracy of the jets; ``chord`` is the midpoint-rule lumping of
    :func:`metric_arrays`.
    """
    if rule == "speed":
        return curve_frame(x, space).sigma
    if rule == "chord":
        return metric_arrays(x, space)[1]
    raise ValueError(f"unknown quadrature {rule!r}; expected one of {QUADRATURES}")


@dataclass(frozen=True)
class InducedMetric:
    edge_lengths: np.ndarray
    weights: np.ndarray

    @property
    def length(self) -> float:
        return float(np.sum(self.edge_lengths))


@dataclass(frozen=True)
class CurvatureJet:
    """``kappa[j]`` holds the j-th arclength derivative of geodesic curvature."""

    kappa: np.ndarray
    sigma: np.ndarray = field(repr=False)
    normal: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.kappa.shape[0] - 1

    def __getitem__(self, j):
        return self.kappa[j]


@dataclass(frozen=True)
class DiscreteCurve:
    """Closed polygon in the chart of ``space``; index ``N`` wraps to 0."""

    vertices: np.ndarray
    space: SpaceForm = field(default_factory=SpaceForm.euclidean)
    max_edge_ratio: float = 10.0
    validate: bool = True

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (N, 2)")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if self.validate:
            self.check()

    def check(self) -> None:
        if self.N < MIN_VERTICES:
            raise ImmersionError(f"need at least {MIN_VERTICES} vertices, got {self.N}")
        self.space.check_chart(self.vertices)
        ell = self.induced_metric().edge_lengths
        if np.any(ell <= 0.0):
            raise ImmersionError("immersion failure: degenerate edge")
        ratio = ell.max() / ell.min()
        if ratio > self.max_edge_ratio:
            raise ImmersionError(f"immersion proxy violated: edge ratio {ratio:.3g} > {self.max_edge_ratio:g}")

    @property
    def N(self) -> int:
        return self.vertices.shape[0]

    def with_vertices(self, vertices: np.ndarray, validate: bool | None = None) -> "DiscreteCurve":
        return DiscreteCurve(vertices, self.space, self.max_edge_ratio,
                             self.validate if validate is None else validate)

    def induced_metric(self) -> InducedMetric:
        ell, w = metric_arrays(self.vertices, self.space)
        return InducedMetric(ell, w)

    @property
    def length(self) -> float:
        return self.induced_metric().length

    def high_order_length(self) -> float:
        """Periodic trapezoid of the 4th-order metric speed (parametrization-robust)."""
        return float(np.sum(self.frame().sigma))

    def frame(self) -> CurveFrame:
        return curve_frame(self.vertices, self.space)

    def curvature_jet(self, J: int) -> CurvatureJet:
        frame, jet = jet_arrays(self.vertices, self.space, J)
        return CurvatureJet(jet, frame.sigma, frame.normal, frame.lam)

    def reparametrize(self, iterations: int = 2) -> "DiscreteCurve":
        return reparametrize(self, iterations)

    def flipped(self) -> "DiscreteCurve":
        """Same image traversed backwards (flips the unit normal)."""
        return self.with_vertices(np.roll(self.vertices[::-1], 1, axis=0))

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d: dict, **kw) -> "DiscreteCurve":
        return cls(np.asarray(d["vertices"], dtype=float), SpaceForm.from_dict(d["space"]), **kw)


def reparametrize(curve: DiscreteCurve, iterations: int = 2) -> DiscreteCurve:
    """Resample at equal metric arclength with a periodic cubic spline.

    Vertex 0 is kept fixed; the image is preserved up to interpolation error.
    """
    x = np.asarray(curve.vertices)
    N = x.shape[0]
    for _ in range(iterations):
        ell, _ = metric_arrays(x, curve.space)
        L = float(ell.sum())
        if not L > 1e-6:
            raise ImmersionError("self-degenerate curve: length below 1e-6")
        s = np.concatenate([[0.0], np.cumsum(ell)])
        pts = np.vstack([x, x[:1]])
        spline = CubicSpline(s, pts, axis=0, bc_type="periodic")
        target = np.arange(N) * (L / N)
        x = spline(target)
        x[0] = pts[0]
    return curve.with_vertices(x)


# -- initial curves ------------------------------------------------------------

def circle(N: int, radius: float = 1.0, space: SpaceForm | None = None, center=(0.0, 0.0),
           phase: float = 0.0, intrinsic: bool = False) -> DiscreteCurve:
    """Counter-clockwise chart circle; with ``intrinsic`` the radius is geodesic (centre at 0)."""
    space = space or SpaceForm.euclidean()
    r = space.intrinsic_radius_to_chart(radius) if intrinsic else radius
    th = phase + 2.0 * np.pi * np.arange(N) / N
    v = np.stack([center[0] + r * np.cos(th), center[1] + r * np.sin(th)], axis=1)
    return DiscreteCurve(v, space)


def random_modes(rng: np.random.Generator, modes: int, amplitude: float):
    """Random Fourier coefficients with max-norm of the radial profile <= amplitude."""
    a = rng.normal(size=modes)
    b = rng.normal(size=modes)
    scale = amplitude / max(np.sum(np.abs(a) + np.abs(b)), 1e-300)
    return a * scale, b * scale


def perturbed_circle(N: int, radius: float = 1.0, amplitude: float = 0.1, modes: int = 5,
                     seed: int = 0, space: SpaceForm | None = None, min_mode: int = 2,
                     reparam: bool = True) -> DiscreteCurve:
    """Chart curve ``r(theta) = radius (1 + sum a_k cos k theta + b_k sin k theta)``."""
    space = space or SpaceForm.euclidean()
    rng = np.random.default_rng(seed)
    ks = np.arange(min_mode, min_mode + modes)
    a, b = random_modes(rng, modes, amplitude)
    th = 2.0 * np.pi * np.arange(N) / N
    prof = 1.0 + (a[:, None] * np.cos(ks[:, None] * th) + b[:, None] * np.sin(ks[:, None] * th)).sum(0)
    v = radius * prof[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1)
    c = DiscreteCurve(v, space, validate=False)
    c = reparametrize(c, iterations=3) if reparam else c
    return c.with_vertices(c.vertices, validate=True)


def ellipse(N: int, a: float = 2.0, b: float = 1.0, space: SpaceForm | None = None,
            reparam: bool = False) -> DiscreteCurve:
    space = space or SpaceForm.euclidean()
    th = 2.0 * np.pi * np.arange(N) / N
    c = DiscreteCurve(np.stack([a * np.cos(th), b * np.sin(th)], axis=1), space, validate=False)
    c = reparametrize(c, iterations=3) if reparam else c
    return c.with_vertices(c.vertices, validate=True)


def best_fit_circle_deviation(curve: DiscreteCurve) -> float:
    """Max deviation (chart units) of the vertices from their least-squares circle."""
    x = curve.vertices
    A = np.column_stack([2 * x[:, 0], 2 * x[:, 1], np.ones(len(x))])
    rhs = np.sum(x * x, axis=1)
    (cx, cy, c), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    r = math.sqrt(c + cx * cx + cy * cy)
    return float(np.max(np.abs(np.hypot(x[:, 0] - cx, x[:, 1] - cy) - r)))


__all__ = [
    "ChartError", "CurvatureJet", "DiscreteCurve", "ImmersionError", "InducedMetric",
    "ResolutionError", "arclength_derivatives", "circle", "curve_frame", "ellipse",
    "jet_arrays", "metric_arrays", "perturbed_circle", "quadrature_weights", "reparametrize",
]
