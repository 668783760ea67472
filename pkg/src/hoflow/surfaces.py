"""Grid-sampled parametric surfaces in flat 3-space and the classical submanifold identities.

Every tensor is stored with its indices leading: ``g[i, j]`` is an array over
the ``(n_u, n_v)`` grid.  Derivatives are 4th-order central differences taken
on a grid padded with analytic ghost nodes in non-periodic directions, so the
reported residuals only ever involve interior nodes.

Conventions: ``h_ij = -<d_i d_j X, n>`` with the outward normal ``n`` (so the
unit sphere has ``h = g`` and ``H = g^ij h_ij = 2``), and
``R_lkij = <R(d_i, d_j) d_k, d_l>`` so that the Gauss equation reads
``R_lkij = h_li h_kj - h_lj h_ki``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

PAD = 8   # ghost depth: four nested first derivatives with a 5-point stencil


def _d(f: np.ndarray, axis: int, step: float) -> np.ndarray:
    """4th-order central first derivative along a grid axis (wraps at the array ends)."""
    return (8.0 * (np.roll(f, -1, axis) - np.roll(f, 1, axis))
            - (np.roll(f, -2, axis) - np.roll(f, 2, axis))) / (12.0 * step)


# -- parametrizations -------------------------------------------------------------

def _sphere_patch(r: float, axis: str):
    def X(u, v):
        s, c = np.sin(u), np.cos(u)
        a, b, z = r * s * np.cos(v), r * s * np.sin(v), r * c
        return np.stack([a, b, z] if axis == "z" else [z, a, b])
    return X


def _ellipsoid_patch(a: float, b: float, c: float, axis: str):
    def X(u, v):
        s, co = np.sin(u), np.cos(u)
        if axis == "z":
            return np.stack([a * s * np.cos(v), b * s * np.sin(v), c * co])
        return np.stack([a * co, b * s * np.cos(v), c * s * np.sin(v)])
    return X


def _torus(R: float, r: float):
    def X(u, v):
        w = R + r * np.cos(v)
        return np.stack([w * np.cos(u), w * np.sin(u), r * np.sin(v)])
    return X


def _plane(u, v):
    return np.stack([u, v, np.zeros_like(u)])


# polar patches keep |latitude| <= 50 degrees: colatitude in [40, 140] degrees
CAP = math.radians(40.0)


@dataclass
class Patch:
    """One coordinate patch; ``u`` is non-periodic unless ``periodic_u``."""

    X: Callable
    u_range: tuple
    v_range: tuple
    periodic_u: bool = False
    periodic_v: bool = True
    orientation: float = 1.0      # flips the normal so it points outward


def surface_patches(name: str, **params) -> list:
    if name == "sphere":
        r = params.get("r", 1.0)
        return [Patch(_sphere_patch(r, ax), (CAP, math.pi - CAP), (0.0, 2 * math.pi))
                for ax in ("z", "x")]
    if name == "ellipsoid":
        a, b, c = params.get("a", 1.0), params.get("b", 1.3), params.get("c", 0.7)
        return [Patch(_ellipsoid_patch(a, b, c, ax), (CAP, math.pi - CAP), (0.0, 2 * math.pi))
                for ax in ("z", "x")]
    if name == "torus":
        R, r = params.get("R", 2.0), params.get("r", 1.0)
        return [Patch(_torus(R, r), (0.0, 2 * math.pi), (0.0, 2 * math.pi), periodic_u=True)]
    if name == "plane":
        return [Patch(_plane, (-1.0, 1.0), (-1.0, 1.0), periodic_v=False)]
    raise ValueError(f"unknown surface {name!r}")


def _axis_nodes(rng, n, periodic):
    a, b = rng
    if periodic:
        step = (b - a) / n
        return a + step * np.arange(n), step, slice(None)
    step = (b - a) / (n - 1)
    return a + step * np.arange(-PAD, n + PAD), step, slice(PAD, PAD + n)


class DiscreteSurface:
    """Differential data of one patch sampled on an ``n_u x n_v`` grid."""

    def __init__(self, patch: Patch, n_u: int, n_v: int | None = None):
        n_v = n_v or n_u
        self.patch = patch
        self.n_u, self.n_v = n_u, n_v
        u, du, su = _axis_nodes(patch.u_range, n_u, patch.periodic_u)
        v, dv, sv = _axis_nodes(patch.v_range, n_v, patch.periodic_v)
        self.steps = (du, dv)
        self.interior = (su, sv)
        U, V = np.meshgrid(u, v, indexing="ij")
        self.u, self.v = U, V
        X = patch.X(U, V)
        self.X = X
        Xi = np.stack([self.d(X, 0), self.d(X, 1)])                     # [i, xyz]
        self.Xi = Xi
        self.Xij = np.stack([np.stack([self.d(Xi[i], j) for j in range(2)]) for i in range(2)])
        n = np.cross(Xi[0], Xi[1], axis=0)
        n = patch.orientation * n / np.linalg.norm(n, axis=0)
        self.normal = n
        self.g = np.einsum("iaxy,jaxy->ijxy", Xi, Xi)
        self.det_g = self.g[0, 0] * self.g[1, 1] - self.g[0, 1] ** 2
        self.ginv = np.stack([np.stack([self.g[1, 1], -self.g[0, 1]]),
                              np.stack([-self.g[1, 0], self.g[0, 0]])]) / self.det_g
        self.h = -np.einsum("ijaxy,axy->ijxy", self.Xij, n)
        self.H = np.einsum("ijxy,ijxy->xy", self.ginv, self.h)
        dg = np.stack([self.d(self.g, k) for k in range(2)])            # dg[k, i, j] = d_k g_ij
        # Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)
        low = 0.5 * (np.einsum("ijlxy->ijlxy", dg) + np.einsum("jilxy->ijlxy", dg)
                     - np.einsum("lijxy->ijlxy", dg))
        self.Gamma = np.einsum("klxy,ijlxy->kijxy", self.ginv, low)

    @classmethod
    def build(cls, name: str, n: int, **params) -> list:
        return [cls(p, n) for p in surface_patches(name, **params)]

    def d(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Partial derivative along grid axis 0 (u) or 1 (v); ``f`` has the grid as its last axes."""
        return _d(f, f.ndim - 2 + axis, self.steps[axis])

    def inner(self, f: np.ndarray) -> np.ndarray:
        su, sv = self.interior
        return f[..., su, sv]

    # -- derived tensors -------------------------------------------------------

    def covariant_derivative_2(self, T: np.ndarray) -> np.ndarray:
        """``(nabla T)[k, i, j] = nabla_k T_ij`` for a covariant 2-tensor."""
        dT = np.stack([self.d(T, k) for k in range(2)])
        G = self.Gamma
        return (dT - np.einsum("pkixy,pjxy->kijxy", G, T)
                - np.einsum("pkjxy,ipxy->kijxy", G, T))

    def covariant_derivative_3(self, T: np.ndarray) -> np.ndarray:
        """``(nabla T)[k, l, i, j]`` for a covariant 3-tensor ``T[l, i, j]``."""
        dT = np.stack([self.d(T, k) for k in range(2)])
        G = self.Gamma
        return (dT - np.einsum("pklxy,pijxy->klijxy", G, T)
                - np.einsum("pkixy,lpjxy->klijxy", G, T)
                - np.einsum("pkjxy,lipxy->klijxy", G, T))

    def hessian(self, f: np.ndarray) -> np.ndarray:
        df = np.stack([self.d(f, k) for k in range(2)])
        ddf = np.stack([np.stack([self.d(df[j], i) for j in range(2)]) for i in range(2)])
        return ddf - np.einsum("kijxy,kxy->ijxy", self.Gamma, df)

    def riemann(self) -> np.ndarray:
        """``R[l, k, i, j] = <R(d_i, d_j) d_k, d_l>`` from the Christoffels."""
        G = self.Gamma
        dG = np.stack([self.d(G, m) for m in range(2)])                 # dG[m, a, j, k] = d_m Gamma^a_jk
        # R^a_kij = d_i Gamma^a_jk - d_j Gamma^a_ik + Gamma^a_ib Gamma^b_jk - Gamma^a_jb Gamma^b_ik
        Rup = (np.einsum("iajkxy->akijxy", dG) - np.einsum("jaikxy->akijxy", dG)
               + np.einsum("aibxy,bjkxy->akijxy", G, G) - np.einsum("ajbxy,bikxy->akijxy", G, G))
        return np.einsum("laxy,akijxy->lkijxy", self.g, Rup)

    def gauss_curvature(self) -> np.ndarray:
        return (self.h[0, 0] * self.h[1, 1] - self.h[0, 1] ** 2) / self.det_g

    def A_sq(self) -> np.ndarray:
        return np.einsum("ikxy,jlxy,ijxy,klxy->xy", self.ginv, self.ginv, self.h, self.h)

    def area_element(self) -> np.ndarray:
        return np.sqrt(self.det_g)


# -- identity residuals (max over interior nodes) -----------------------------------

def gauss_residual(s: DiscreteSurface) -> float:
    h = s.h
    rhs = np.einsum("lixy,kjxy->lkijxy", h, h) - np.einsum("ljxy,kixy->lkijxy", h, h)
    return float(np.max(np.abs(s.inner(s.riemann() - rhs))))


def codazzi_residual(s: DiscreteSurface) -> float:
    Dh = s.covariant_derivative_2(s.h)                 # Dh[i, j, k] = h_jk,i
    res = Dh - np.einsum("jikxy->ijkxy", Dh)
    return float(np.max(np.abs(s.inner(res))))


def weingarten_residuals(s: DiscreteSurface) -> dict:
    """Residuals of ``d_i n = h_iq g^qp d_p X`` and ``d_i d_j X = Gamma^k_ij d_k X - h_ij n``."""
    dn = np.stack([s.d(s.normal, i) for i in range(2)])
    shape = np.einsum("iqxy,qpxy,paxy->iaxy", s.h, s.ginv, s.Xi)
    second = (np.einsum("kijxy,kaxy->ijaxy", s.Gamma, s.Xi)
              - np.einsum("ijxy,axy->ijaxy", s.h, s.normal))
    return {
        "normal_derivative": float(np.max(np.abs(s.inner(dn - shape)))),
        "second_derivative": float(np.max(np.abs(s.inner(s.Xij - second)))),
    }


def simon_residual(s: DiscreteSurface) -> float:
    """Residual of ``H_,ij = Lap h_ij + |A|^2 h_ij - h_is g^sr h_rj H`` (flat ambient)."""
    DDh = s.covariant_derivative_3(s.covariant_derivative_2(s.h))
    lap = np.einsum("klxy,klijxy->ijxy", s.ginv, DDh)
    hh = np.einsum("isxy,srxy,rjxy->ijxy", s.h, s.ginv, s.h)
    rhs = lap + s.A_sq() * s.h - hh * s.H
    return float(np.max(np.abs(s.inner(s.hessian(s.H) - rhs))))


def cauchy_schwarz_gap(s: DiscreteSurface) -> float:
    """``min(|A|^2 - H^2/2)`` over the interior (non-negative for surfaces)."""
    return float(np.min(s.inner(s.A_sq() - 0.5 * s.H**2)))


RESIDUALS = {
    "gauss": lambda s: gauss_residual(s),
    "codazzi": lambda s: codazzi_residual(s),
    "weingarten_normal": lambda s: weingarten_residuals(s)["normal_derivative"],
    "weingarten_second": lambda s: weingarten_residuals(s)["second_derivative"],
    "simon": lambda s: simon_residual(s),
}

# nested first derivatives of the sampled positions behind each residual
DERIVATIVE_DEPTH = {"gauss": 3, "codazzi": 3, "weingarten_normal": 2,
                    "weingarten_second": 2, "simon": 4}


def roundoff_floor(s: DiscreteSurface, depth: int, safety: float = 100.0) -> float:
    """Size below which a residual is indistinguishable from amplified rounding error."""
    scale = float(np.max(np.abs(s.inner(s.X))))
    gain = 1.5 / min(s.steps)     # l1 norm of the 5-point first-derivative stencil
    return safety * np.finfo(float).eps * max(scale, 1.0) * gain**depth


def residual_table(name: str, grids=(32, 64, 128), **params):
    """Max residual over all patches and the matching roundoff floors, per identity and grid."""
    table = {k: [] for k in RESIDUALS}
    floors = {k: [] for k in RESIDUALS}
    for n in grids:
        patches = DiscreteSurface.build(name, n, **params)
        for k, fn in RESIDUALS.items():
            table[k].append(max(fn(p) for p in patches))
            floors[k].append(max(roundoff_floor(p, DERIVATIVE_DEPTH[k]) for p in patches))
    return table, floors


def convergence_slope(grids, residuals, floors=None) -> float:
    """Least-squares slope of ``-log r`` against ``log n`` over entries above their roundoff floor.

    Returns ``inf`` when fewer than two entries are above the floor (the
    identity is already satisfied to rounding precision).
    """
    floors = floors if floors is not None else [0.0] * len(grids)
    pts = [(n, r) for n, r, f in zip(grids, residuals, floors) if r > f]
    if len(pts) < 2:
        return math.inf
    n, r = np.array(pts, dtype=float).T
    return float(-np.polyfit(np.log(n), np.log(r), 1)[0])


def convergence_report(name: str, grids=(32, 64, 128), **params) -> dict:
    table, floors = residual_table(name, grids, **params)
    return {
        "surface": name,
        "params": params,
        "grids": list(grids),
        "residuals": table,
        "floors": floors,
        "slopes": {k: convergence_slope(grids, v, floors[k]) for k, v in table.items()},
    }


# -- divergence identity on closed surfaces -------------------------------------------

def closed_grid(name: str, n: int, **params):
    """Single quadrature grid covering a closed surface: midpoint colatitudes for the sphere."""
    if name == "sphere":
        r = params.get("r", 1.0)
        step = math.pi / n
        patch = Patch(_sphere_patch(r, "z"), (0.5 * step, math.pi - 0.5 * step), (0.0, 2 * math.pi))
        return DiscreteSurface(patch, n, 2 * n)
    if name == "torus":
        return DiscreteSurface(surface_patches("torus", **params)[0], n, n)
    raise ValueError("divergence identity needs a closed surface (sphere or torus)")


def _quadrature(s: DiscreteSurface, f: np.ndarray) -> float:
    du, dv = s.steps
    return float(np.sum(s.inner(f * s.area_element())) * du * dv)


def divergence_identity(s: DiscreteSurface, field_kind: str = "normal",
                        function: Callable | None = None, vector: Callable | None = None) -> dict:
    """Both sides of ``int div X = int H <n, X>`` for an ambient field ``X`` along the surface.

    ``field_kind``: ``normal`` (X = n), ``position`` (X = position), ``zero``,
    ``tangent_gradient`` (X = surface gradient of ``function(x, y, z)``) or
    ``ambient`` (X = ``vector(x, y, z)`` returning a stacked 3-vector).
    """
    if field_kind == "normal":
        Xf = s.normal
    elif field_kind == "position":
        Xf = s.X
    elif field_kind == "zero":
        Xf = np.zeros_like(s.X)
    elif field_kind == "tangent_gradient":
        f = function(*s.X)
        df = np.stack([s.d(f, i) for i in range(2)])
        Xf = np.einsum("ijxy,jxy,iaxy->axy", s.ginv, df, s.Xi)
    elif field_kind == "ambient":
        Xf = vector(*s.X)
    else:
        raise ValueError(f"unknown field kind {field_kind!r}")
    dX = np.stack([s.d(Xf, j) for j in range(2)])
    div = np.einsum("ijxy,iaxy,jaxy->xy", s.ginv, s.Xi, dX)
    lhs = _quadrature(s, div)
    rhs = _quadrature(s, s.H * np.einsum("axy,axy->xy", s.normal, Xf))
    return {"lhs": lhs, "rhs": rhs, "gap": lhs - rhs}


def surface_area(s: DiscreteSurface) -> float:
    return _quadrature(s, np.ones_like(s.H))


def integrate(s: DiscreteSurface, f: np.ndarray) -> float:
    return _quadrature(s, f)
