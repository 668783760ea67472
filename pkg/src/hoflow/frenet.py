"""Exact Frenet recursion for curves, the energy F_m, and the global-existence threshold.

Along an arclength-parametrized curve the frame obeys ``T' = -kappa nu`` and
``nu' = kappa T``.  Writing ``grad^s nu = a T + b nu`` with ``a, b`` integer
polynomials in ``kappa, kappa', ...`` the recursion is

    (a, b) -> (D a + kappa b, D b - kappa a)

where ``D`` is formal arclength differentiation (``kappa^(j) -> kappa^(j+1)``).
"""

from __future__ import annotations

import functools
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .curves import DiscreteCurve, jet_arrays, metric_arrays
from .spaces import SpaceForm

OMEGA_1 = 2.0  # length of the unit ball in R^1


def _trim(exps):
    exps = list(exps)
    while exps and exps[-1] == 0:
        exps.pop()
    return tuple(exps)


class DiffPoly:
    """Polynomial in the jet variables ``kappa^(0), kappa^(1), ...`` with integer coefficients.

    Monomials are keyed by exponent tuples with trailing zeros stripped, so the
    representation is canonical.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for exps, c in (terms or {}).items():
            c = int(c)
            if c:
                key = _trim(exps)
                clean[key] = clean.get(key, 0) + c
        self.terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def const(cls, c: int) -> "DiffPoly":
        return cls({(): c})

    @classmethod
    def var(cls, j: int = 0) -> "DiffPoly":
        return cls({(0,) * j + (1,): 1})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in _as_poly(other).terms.items():
            out[k] = out.get(k, 0) + v
        return DiffPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        out = defaultdict(int)
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                n = max(len(k1), len(k2))
                e = tuple((k1[i] if i < len(k1) else 0) + (k2[i] if i < len(k2) else 0) for i in range(n))
                out[e] += c1 * c2
        return DiffPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            return self.terms == _as_poly(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def derivative(self) -> "DiffPoly":
        """Formal arclength derivative (Leibniz rule, ``kappa^(j) -> kappa^(j+1)``)."""
        out = defaultdict(int)
        for exps, c in self.terms.items():
            for j, e in enumerate(exps):
                if e == 0:
                    continue
                new = list(exps) + [0]
                new[j] -= 1
                new[j + 1] += 1
                out[tuple(new)] += c * e
        return DiffPoly(out)

    @property
    def max_order(self) -> int:
        """Highest derivative index present (-1 for constants)."""
        return max((len(k) - 1 for k in self.terms), default=-1)

    def weights(self) -> set:
        """Set of monomial weights with ``weight(kappa^(j)) = j + 1``."""
        return {sum((j + 1) * e for j, e in enumerate(k)) for k in self.terms}

    def is_homogeneous(self, weight: int) -> bool:
        return all(w == weight for w in self.weights())

    def __call__(self, jet) -> np.ndarray:
        """Evaluate on a jet array indexed ``jet[j] = kappa^(j)``."""
        jet = np.asarray(jet, dtype=float)
        out = np.zeros(jet.shape[1:])
        for exps, c in self.terms.items():
            term = np.full(jet.shape[1:], float(c))
            for j, e in enumerate(exps):
                if e:
                    term = term * jet[j] ** e
            out = out + term
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in sorted(self.terms.items(), key=lambda kv: (-len(kv[0]), kv[0]), reverse=True):
            mono = "*".join(
                (f"k{j}" if e == 1 else f"k{j}^{e}") for j, e in enumerate(exps) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _as_poly(x) -> DiffPoly:
    if isinstance(x, DiffPoly):
        return x
    if isinstance(x, (int, np.integer)):
        return DiffPoly.const(int(x))
    raise TypeError(f"cannot combine DiffPoly with {type(x).__name__}")


KAPPA = DiffPoly.var(0)


@dataclass(frozen=True)
class FrenetVector:
    """``tangential * T + normal * nu`` representing an order-``order`` covariant derivative."""

    tangential: DiffPoly
    normal: DiffPoly
    order: int

    def derivative(self) -> "FrenetVector":
        return frenet_derivative(self)

    def norm_sq(self) -> DiffPoly:
        return self.tangential * self.tangential + self.normal * self.normal


def frenet_derivative(v: FrenetVector) -> FrenetVector:
    a, b = v.tangential, v.normal
    return FrenetVector(a.derivative() + KAPPA * b, b.derivative() - KAPPA * a, v.order + 1)


@functools.lru_cache(maxsize=None)
def frenet_nu(s: int) -> FrenetVector:
    """``grad^s nu`` in the frame ``{T, nu}``."""
    if s == 0:
        return FrenetVector(DiffPoly(), DiffPoly.const(1), 0)
    return frenet_derivative(frenet_nu(s - 1))


@functools.lru_cache(maxsize=None)
def frenet_phi(s: int) -> FrenetVector:
    """``grad^s phi`` for ``s >= 1`` (``grad phi = T``)."""
    if s < 1:
        raise ValueError("grad^s phi needs s >= 1")
    if s == 1:
        return FrenetVector(DiffPoly.const(1), DiffPoly(), 1)
    return frenet_derivative(frenet_phi(s - 1))


@functools.lru_cache(maxsize=None)
def grad_norm_sq(m: int) -> DiffPoly:
    """``|grad^m nu|^2`` as an exact polynomial in the curvature jet."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return frenet_nu(m).norm_sq()


def energy_density_arrays(x: np.ndarray, space: SpaceForm, m: int, quadrature: str = "speed"):
    """Per-vertex ``(weights, 1 + |grad^m nu|^2)`` for vertex arrays of shape ``(..., N, 2)``."""
    poly = grad_norm_sq(m)
    J = max(poly.max_order, 0)
    frame, jet = jet_arrays(x, space, J)
    if quadrature == "speed":
        w = frame.sigma
    elif quadrature == "chord":
        _, w = metric_arrays(x, space)
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    jet = np.moveaxis(jet, -2, 0)
    return w, 1.0 + poly(jet)


def energy_arrays(x: np.ndarray, space: SpaceForm, m: int, quadrature: str = "speed") -> np.ndarray:
    w, dens = energy_density_arrays(x, space, m, quadrature)
    return np.sum(w * dens, axis=-1)


def energy(curve: DiscreteCurve, m: int, quadrature: str = "speed") -> float:
    """Discrete ``F_m = sum_i w_i (1 + |grad^m nu|^2_i)``.

    The default weights are the 4th-order metric speeds; ``quadrature="chord"``
    uses the midpoint-rule weights of the induced metric instead.
    """
    return float(energy_arrays(curve.vertices, curve.space, m, quadrature))


# -- threshold for global existence -------------------------------------------

def threshold(space: SpaceForm, b2: float, n: int = 1) -> float:
    """Energy bound guaranteeing a global flow for the admissible parameter with square ``b2``."""
    if not space.admissible_b_interval().contains(b2):
        raise ValueError(f"inadmissible b^2 = {b2!r} for {space.kind} (K = {space.curvature})")
    omega = OMEGA_1 if n == 1 else math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    R = space.injectivity_radius
    bb = math.sqrt(abs(b2))
    first = omega / (bb**n * (n + 1))
    if b2 > 0:
        second = math.inf if math.isinf(R) else (bb * R / math.pi) ** n * omega / (n + 1)
    else:
        second = math.inf if math.isinf(R) else R**n * omega / ((n + 1) * 2**n)
    return min(first, second)


@dataclass(frozen=True)
class ThresholdSup:
    value: float
    b2: float           # optimizing b^2; 0.0 encodes the limit b -> 0
    kind: str           # "real", "imaginary" or "limit"


def threshold_sup(space: SpaceForm, n: int = 1) -> ThresholdSup:
    """Supremum of :func:`threshold` over the admissible interval."""
    R = space.injectivity_radius
    if math.isinf(R):
        # b = epsilon -> 0 (Euclidean) or any small b (Hadamard): the bound is unbounded
        return ThresholdSup(math.inf, 0.0, "limit")
    iv = space.admissible_b_interval()
    cands = {iv.upper}
    if iv.has_real:
        lo = max(iv.lower, 0.0)
        if lo > 0:
            cands.add(lo)
        # crossing of omega/(b^n (n+1)) and (b R/pi)^n omega/(n+1): b^2 = pi / R
        cross = math.pi / R
        if lo <= cross <= iv.upper and cross > 0:
            cands.add(cross)
    if iv.has_imaginary:
        cands.add(iv.lower)
        cross = -((2.0 / R) ** 2)
        if iv.lower <= cross < 0:
            cands.add(cross)
    best = max(((threshold(space, b2, n), b2) for b2 in cands if iv.contains(b2)),
               key=lambda t: (t[0], -abs(t[1])))
    return ThresholdSup(best[0], best[1], "real" if best[1] > 0 else "imaginary")


@dataclass(frozen=True)
class InitialConditionReport:
    F_m: float
    threshold_sup: float
    satisfied: bool
    admissible_m: bool

    def to_dict(self) -> dict:
        return {
            "F_m": self.F_m,
            "threshold_sup": self.threshold_sup,
            "satisfied": self.satisfied,
            "admissible_m": self.admissible_m,
        }


def check_initial_condition(curve: DiscreteCurve, m: int, n: int = 1) -> InitialConditionReport:
    admissible = m >= n // 2 + 1
    F = energy(curve, m) if m >= 0 else math.nan
    sup = threshold_sup(curve.space).value
    return InitialConditionReport(F, sup, bool(F <= sup), admissible)
