"""Two-dimensional space forms in a single conformal chart.

Every model is represented on (a subset of) the plane with metric
``lambda(x)**2 * (dx**2 + dy**2)``:

* euclidean: ``lambda = 1``
* sphere / hyperbolic with curvature ``K``: ``lambda = 2 / (1 + K |x|^2)``
  (stereographic chart for ``K > 0``, Poincare disk of radius ``1/sqrt(-K)``
  for ``K < 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("euclidean", "sphere", "hyperbolic")


class ChartError(ValueError):
    """Raised when a point falls outside the admissible chart region."""


@dataclass(frozen=True)
class BInterval:
    """Admissible values of ``b**2`` (``K <= b**2 <= 1``, ``b**2 != 0``)."""

    lower: float
    upper: float
    lower_closed: bool = True

    @property
    def has_real(self) -> bool:
        return self.upper > 0.0

    @property
    def has_imaginary(self) -> bool:
        return self.lower < 0.0

    def contains(self, b2: float) -> bool:
        if b2 == 0.0 or b2 > self.upper:
            return False
        return b2 >= self.lower if self.lower_closed else b2 > self.lower

    def tag(self, b2: float) -> str:
        return "real" if b2 > 0 else "imaginary"


@dataclass(frozen=True)
class SpaceForm:
    kind: str = "euclidean"
    curvature: float = 0.0
    # sphere: reject |x| * sqrt(K) above this; hyperbolic: reject |x| sqrt(-K) >= 1 - margin
    sphere_margin: float = 20.0
    disk_margin: float = 1e-3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        K = float(self.curvature)
        if self.kind == "euclidean" and K != 0.0:
            raise ValueError("euclidean space must have curvature 0")
        if self.kind == "sphere" and not K > 0.0:
            raise ValueError("sphere requires curvature > 0")
        if self.kind == "hyperbolic" and not K < 0.0:
            raise ValueError("hyperbolic space requires curvature < 0")
        if K > 1.0:
            raise ValueError("curvature must satisfy K <= 1 (an admissible b with K <= b^2 <= 1 must exist)")
        object.__setattr__(self, "curvature", K)

    @classmethod
    def euclidean(cls) -> "SpaceForm":
        return cls("euclidean", 0.0)

    @classmethod
    def sphere(cls, curvature: float = 1.0) -> "SpaceForm":
        return cls("sphere", curvature)

    @classmethod
    def hyperbolic(cls, curvature: float = -1.0) -> "SpaceForm":
        return cls("hyperbolic", curvature)

    @classmethod
    def from_dict(cls, d: dict) -> "SpaceForm":
        kind = d.get("kind", "euclidean")
        default = {"euclidean": 0.0, "sphere": 1.0, "hyperbolic": -1.0}.get(kind, 0.0)
        return cls(kind, float(d.get("curvature", default)))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "curvature": self.curvature}

    # -- basic invariants -------------------------------------------------

    @property
    def injectivity_radius(self) -> float:
        if self.kind == "sphere":
            return math.pi / math.sqrt(self.curvature)
        return math.inf

    def chart_factor(self, x: np.ndarray) -> np.ndarray:
        """Conformal factor ``lambda`` at chart points ``x`` (shape ``(..., 2)``)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return np.ones(x.shape[:-1])
        r2 = np.sum(x * x, axis=-1)
        return 2.0 / (1.0 + self.curvature * r2)

    def grad_log_factor(self, x: np.ndarray) -> np.ndarray:
        """Euclidean gradient of ``log lambda``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return np.zeros_like(x)
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        return -2.0 * self.curvature * x / (1.0 + self.curvature * r2)

    def check_chart(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ChartError("curve leaves chart: non-finite coordinates")
        if self.kind == "euclidean":
            return
        rho = np.sqrt(np.sum(x * x, axis=-1) * abs(self.curvature))
        if self.kind == "sphere" and np.any(rho > self.sphere_margin):
            raise ChartError(f"curve leaves chart: |x| beyond sphere margin ({rho.max():.3g})")
        if self.kind == "hyperbolic" and np.any(rho >= 1.0 - self.disk_margin):
            raise ChartError(f"curve leaves chart: |x| at disk boundary ({rho.max():.6g})")

    def admissible_b_interval(self) -> BInterval:
        K = self.curvature
        if K > 0:
            return BInterval(K, 1.0)
        # b^2 = 0 is excluded (b must be real positive or pure imaginary)
        return BInterval(K, 1.0, lower_closed=K < 0)

    # -- geometry ---------------------------------------------------------

    def geodesic_curvature_correction(self, x: np.ndarray, normal: np.ndarray):
        """Return ``(lambda, d_n log lambda)`` at ``x`` along the Euclidean unit ``normal``.

        The geodesic curvature of a curve whose Euclidean curvature is measured
        against ``normal`` is ``(kappa_e - d_n log lambda) / lambda``.
        """
        self.check_chart(x)
        lam = self.chart_factor(x)
        dn = np.sum(self.grad_log_factor(x) * np.asarray(normal, dtype=float), axis=-1)
        return lam, dn

    def distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Closed-form geodesic distance between chart points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d2 = np.sum((x - y) ** 2, axis=-1)
        if self.kind == "euclidean":
            return np.sqrt(d2)
        k = math.sqrt(abs(self.curvature))
        xs2 = np.sum(x * x, axis=-1) * abs(self.curvature)
        ys2 = np.sum(y * y, axis=-1) * abs(self.curvature)
        d2s = d2 * abs(self.curvature)
        if self.kind == "sphere":
            # chordal distance on the unit sphere after inverse stereographic map
            chord2 = 4.0 * d2s / ((1.0 + xs2) * (1.0 + ys2))
            return 2.0 * np.arcsin(np.clip(np.sqrt(chord2) / 2.0, 0.0, 1.0)) / k
        arg = 1.0 + 2.0 * d2s / ((1.0 - xs2) * (1.0 - ys2))
        return np.arccosh(np.maximum(arg, 1.0)) / k

    def chart_radius_to_intrinsic(self, r: float) -> float:
        """Intrinsic radius of the chart circle ``|x| = r`` centred at the origin."""
        if self.kind == "euclidean":
            return r
        k = math.sqrt(abs(self.curvature))
        if self.kind == "sphere":
            return 2.0 * math.atan(k * r) / k
        return 2.0 * math.atanh(k * r) / k

    def intrinsic_radius_to_chart(self, rho: float) -> float:
        if self.kind == "euclidean":
            return rho
        k = math.sqrt(abs(self.curvature))
        if self.kind == "sphere":
            return math.tan(k * rho / 2.0) / k
        return math.tanh(k * rho / 2.0) / k

    def circle_curvature(self, rho: float) -> float:
        """Geodesic curvature of a geodesic circle of intrinsic radius ``rho``."""
        if self.kind == "euclidean":
            return 1.0 / rho
        k = math.sqrt(abs(self.curvature))
        if self.kind == "sphere":
            return k / math.tan(k * rho)
        return k / math.tanh(k * rho)

    def circle_length(self, rho: float) -> float:
        if self.kind == "euclidean":
            return 2.0 * math.pi * rho
        k = math.sqrt(abs(self.curvature))
        if self.kind == "sphere":
            return 2.0 * math.pi * math.sin(k * rho) / k
        return 2.0 * math.pi * math.sinh(k * rho) / k
