"""Negative L2-gradient flow ``d phi/dt = -E_m nu`` with an energy-decrease guard.

Two steppers share the same acceptance logic:

* ``semi_implicit`` (default): the normal speed is preconditioned by a
  circulant ``(I + dt c (-delta^2)^(m+1))`` solved with the FFT, which damps the
  stiff leading-order part unconditionally while leaving stationary points and
  the lowest (circle) mode untouched;
* ``explicit``: forward Euler with the CFL cap ``dt <= cfl (L/N)^(2m+2)``.

Every accepted step must satisfy ``F_new - F_old <= tol |F_old|``; otherwise dt
is halved and the step retried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .curves import DiscreteCurve, ImmersionError, curve_frame, jet_arrays, reparametrize
from .frenet import check_initial_condition, energy_arrays
from .spaces import ChartError
from .variation import discrete_gradient, euler_lagrange_m1_arrays


class BlowUp(RuntimeError):
    """Discrete singularity proxy; carries the last accepted state."""

    def __init__(self, reason: str, state: "FlowState"):
        super().__init__(reason)
        self.reason = reason
        self.state = state


@dataclass
class FlowConfig:
    m: int = 1
    t_end: float = 1.0
    dt0: float = 1e-4
    dt_max: float = 1e-2
    dt_min: float = 1e-14
    growth: float = 1.2
    max_halvings: int = 40
    energy_tol: float = 1e-10
    max_kappa: float = 1e6
    cfl: float = 0.05
    scheme: str = "semi_implicit"
    stabilization: float = 1.0
    sample_every: int = 10
    norm_order: int = 3          # K in the ||grad^k A|| columns, k = 0..K
    quadrature: str = "speed"
    h_fd: float | None = None
    max_steps: int = 1_000_000
    stationary_tol: float = 1e-8

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.scheme not in ("semi_implicit", "explicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class FlowState:
    t: float
    curve: DiscreteCurve
    F_m: float
    E_field: np.ndarray
    dt_last: float
    step: int = 0


@dataclass
class DiagnosticsRecord:
    t: float
    F_m: float
    length: float
    max_kappa: float
    normA_L2: list
    normA_2m: float
    ratio: float
    dt: float

    def row(self) -> list:
        return [self.t, self.F_m, self.length, self.max_kappa, *self.normA_L2,
                self.normA_2m, self.ratio, self.dt]


def csv_header(K: int) -> list:
    return (["t", "F_m", "length", "max_kappa"] + [f"normA_L2_k{k}" for k in range(K + 1)]
            + ["normA_2m", "ratio_5_5", "dt"])


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)      # (step, t, DiscreteCurve)
    energies: list = field(default_factory=list)       # F_m after every accepted step
    times: list = field(default_factory=list)
    radii: list = field(default_factory=list)          # mean chart radius about the centroid
    status: str = "running"
    reason: str = ""
    rejections: int = 0
    final: FlowState | None = None
    initial_check: dict = field(default_factory=dict)


# -- fields ---------------------------------------------------------------------

def gradient_field(curve: DiscreteCurve, cfg: FlowConfig) -> np.ndarray:
    if cfg.m == 1:
        return euler_lagrange_m1_arrays(curve.vertices, curve.space)
    return discrete_gradient(curve, cfg.m, cfg.h_fd, richardson=True, quadrature=cfg.quadrature).values


def _energy(curve: DiscreteCurve, cfg: FlowConfig) -> float:
    return float(energy_arrays(curve.vertices, curve.space, cfg.m, cfg.quadrature))


def curvature_norms(curve: DiscreteCurve, K: int, quadrature: str = "speed") -> dict:
    """``||grad^k A||`` in L2 and L-infinity for k = 0..K (``grad^k A = kappa^(k)``)."""
    frame, jet = jet_arrays(curve.vertices, curve.space, K)
    w = frame.sigma if quadrature == "speed" else curve.induced_metric().weights
    L2 = [float(math.sqrt(np.sum(w * jet[k] ** 2))) for k in range(K + 1)]
    Linf = [float(np.max(np.abs(jet[k]))) for k in range(K + 1)]
    return {"L2": L2, "Linf": Linf}


def diagnostics(state: FlowState, cfg: FlowConfig) -> DiagnosticsRecord:
    curve = state.curve
    K = cfg.norm_order
    frame, jet = jet_arrays(curve.vertices, curve.space, K)
    w = frame.sigma if cfg.quadrature == "speed" else curve.induced_metric().weights
    kappa = jet[0]
    L2 = [float(math.sqrt(np.sum(w * jet[k] ** 2))) for k in range(K + 1)]
    p = 2 * cfg.m
    normA = float(np.sum(w * np.abs(kappa) ** p) ** (1.0 / p))
    ratio = normA / state.F_m ** (1.0 / p)
    return DiagnosticsRecord(state.t, state.F_m, float(np.sum(w)), float(np.max(np.abs(kappa))),
                             L2, normA, ratio, state.dt_last)


# -- stepping -------------------------------------------------------------------

def _mesh_spacing(curve: DiscreteCurve) -> float:
    return float(np.sum(curve_frame(curve.vertices, curve.space).sigma)) / curve.N


def _precondition(V: np.ndarray, dt: float, c: float, m: int) -> np.ndarray:
    N = V.shape[0]
    k = np.fft.rfftfreq(N) * 2.0 * np.pi
    sym = (2.0 - 2.0 * np.cos(k)) ** (m + 1)
    return np.fft.irfft(np.fft.rfft(V) / (1.0 + dt * c * sym), n=N)


def _advance(curve: DiscreteCurve, E: np.ndarray, dt: float, cfg: FlowConfig) -> DiscreteCurve:
    frame = curve_frame(curve.vertices, curve.space)
    V = -E
    if cfg.scheme == "semi_implicit":
        h = _mesh_spacing(curve)
        c = 2.0 * cfg.stabilization / h ** (2 * cfg.m + 2)
        V = _precondition(V, dt, c, cfg.m)
    x = curve.vertices + dt * (V / frame.lam)[:, None] * frame.normal
    moved = curve.with_vertices(x, validate=False)
    curve.space.check_chart(x)
    out = reparametrize(moved, iterations=1)
    out.check()
    return out


def _new_state(curve, F, t, dt, step, cfg) -> FlowState:
    return FlowState(t, curve, F, gradient_field(curve, cfg), dt, step)


def initial_state(curve: DiscreteCurve, cfg: FlowConfig) -> FlowState:
    return _new_state(curve, _energy(curve, cfg), 0.0, cfg.dt0, 0, cfg)


class StepRejected(RuntimeError):
    """All retries failed without a clear singularity (returned with the last dt tried)."""

    def __init__(self, msg, dt):
        super().__init__(msg)
        self.dt = dt


def step(state: FlowState, cfg: FlowConfig, dt: float | None = None, t_limit: float | None = None):
    """Take one accepted step; returns ``(new_state, rejections)``.

    Raises :class:`StepRejected` when every halving failed and :class:`BlowUp`
    on a chart exit that persists at the smallest step.
    """
    curve = state.curve
    if dt is None:
        dt = min(state.dt_last * cfg.growth, cfg.dt_max)
    if cfg.scheme == "explicit":
        dt = min(dt, cfg.cfl * _mesh_spacing(curve) ** (2 * cfg.m + 2))
    if t_limit is not None:
        dt = min(dt, max(t_limit - state.t, 0.0))
    tol = cfg.energy_tol * abs(state.F_m)
    rejections = 0
    last_err = "energy increase"
    for _ in range(cfg.max_halvings + 1):
        if dt < cfg.dt_min:
            break
        try:
            cand = _advance(curve, state.E_field, dt, cfg)
            F = _energy(cand, cfg)
        except (ChartError, ImmersionError, FloatingPointError) as err:
            last_err = str(err)
            F = math.inf
        if math.isfinite(F) and F - state.F_m <= tol:
            return _new_state(cand, F, state.t + dt, dt, state.step + 1, cfg), rejections
        rejections += 1
        dt *= 0.5
    raise StepRejected(f"step rejected after {rejections} halvings ({last_err})", dt)


def _field_rms(state: FlowState) -> float:
    w = curve_frame(state.curve.vertices, state.curve.space).sigma
    return float(math.sqrt(np.sum(w * state.E_field**2) / np.sum(w)))


def run(curve: DiscreteCurve, cfg: FlowConfig, snapshot_every: int | None = None,
        raise_on_blowup: bool = False) -> Trajectory:
    """Integrate to ``cfg.t_end``; a blow-up ends the run with status ``blowup``."""
    traj = Trajectory()
    traj.initial_check = check_initial_condition(curve, cfg.m).to_dict()
    state = initial_state(curve, cfg)
    snap = snapshot_every or cfg.sample_every

    def record(s: FlowState):
        traj.records.append(diagnostics(s, cfg))

    def keep(s: FlowState):
        traj.snapshots.append((s.step, s.t, s.curve))

    traj.energies.append(state.F_m)
    traj.times.append(state.t)
    record(state)
    keep(state)
    try:
        while state.t < cfg.t_end * (1 - 1e-12) and state.step < cfg.max_steps:
            kmax = float(np.max(np.abs(curve_frame(state.curve.vertices, state.curve.space).kappa)))
            if not kmax <= cfg.max_kappa:
                raise BlowUp(f"curvature cap exceeded (max |kappa| = {kmax:.3g})", state)
            try:
                new, rej = step(state, cfg, t_limit=cfg.t_end)
            except StepRejected as err:
                if _field_rms(state) < cfg.stationary_tol:
                    traj.status, traj.reason = "stationary", "gradient vanished; no admissible decrease"
                    break
                raise BlowUp(f"step size underflow: {err}", state) from None
            traj.rejections += rej
            state = new
            traj.energies.append(state.F_m)
            traj.times.append(state.t)
            if state.step % cfg.sample_every == 0:
                record(state)
            if state.step % snap == 0:
                keep(state)
        else:
            traj.status = "completed"
    except BlowUp as err:
        traj.status, traj.reason = "blowup", err.reason
        traj.final = err.state
        if traj.records[-1].t != err.state.t:
            record(err.state)
        if raise_on_blowup:
            raise
        return traj
    traj.final = state
    if traj.records[-1].t != state.t:
        record(state)
    if traj.snapshots[-1][1] != state.t:
        keep(state)
    return traj


def energy_increments(traj: Trajectory) -> np.ndarray:
    """Relative energy changes ``(F_{k+1} - F_k) / |F_k|`` over accepted steps."""
    F = np.asarray(traj.energies)
    return np.diff(F) / np.abs(F[:-1])


def gronwall_monitor(traj: Trajectory, k: int) -> dict:
    """Boundedness probe for ``||grad^k A||_{L2}^2`` along a trajectory.

    The bound ``max(initial, 10 * initial + 1)`` is a heuristic alarm, not a
    verified constant.
    """
    vals = np.array([r.normA_L2[k] ** 2 for r in traj.records])
    init = float(vals[0])
    sup = float(np.max(vals)) if vals.size else math.nan
    bound = max(init, 10.0 * init + 1.0)
    tail = vals[len(vals) // 2:]
    if tail.size >= 2 and np.ptp(tail) > 1e-12 * max(1.0, abs(tail).max()):
        slope = float(np.polyfit(np.arange(tail.size), tail, 1)[0])
        trend = "increasing" if slope > 0 else "decreasing"
    else:
        trend = "flat"
    blew_up = traj.status == "blowup"
    return {
        "k": k,
        "initial": init,
        "sup": sup,
        "bound": bound,
        "exceeded": bool(sup > bound) or blew_up,
        "finite": bool(np.all(np.isfinite(vals))),
        "trend": trend,
        "unbounded_growth": blew_up,
        "status": traj.status,
    }


def mean_radius(curve: DiscreteCurve) -> float:
    x = curve.vertices
    return float(np.mean(np.hypot(*(x - x.mean(axis=0)).T)))
