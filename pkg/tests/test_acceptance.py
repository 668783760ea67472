"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
"""

import filecmp
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hoflow import inequalities as iq  # noqa: E402
from hoflow.curves import arclength_derivatives, circle, curve_frame, ellipse  # noqa: E402
from hoflow.flow import FlowConfig, energy_increments, gronwall_monitor, mean_radius, run  # noqa: E402
from hoflow.frenet import check_initial_condition, frenet_nu, grad_norm_sq, threshold_sup  # noqa: E402
from hoflow.io import emit_outputs  # noqa: E402
from hoflow.spaces import SpaceForm  # noqa: E402
from hoflow.surfaces import closed_grid, convergence_report, divergence_identity  # noqa: E402
from hoflow.variation import gradient_consistency  # noqa: E402
from oracles import circle_radius_ode, ellipse_kappa_jet, ellipse_nu_norm_sq  # noqa: E402
from standard import standard_config, standard_curve, standard_runs  # noqa: E402

SPACES = {"euclidean": SpaceForm.euclidean(), "sphere": SpaceForm.sphere(),
          "hyperbolic": SpaceForm.hyperbolic()}


RESULTS = []      # lines collected for the terminal summary (see conftest.py)


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n} ({title}): {detail}"
    RESULTS.append(line)
    print(line)


def check_1():
    runs, wall = standard_runs()
    worst = max(float(energy_increments(t).max()) for t in runs.values())
    steps = sum(len(t.energies) - 1 for t in runs.values())
    ok = worst <= 1e-10 and wall <= 300 and all(t.status == "completed" for t in runs.values())
    return ok, f"{steps} accepted steps, max dF/|F| = {worst:.2e} (<= 1e-10), runtime {wall:.1f}s (<= 300s)"


def check_2():
    parts, ok = [], True
    for name, space in SPACES.items():
        rep = gradient_consistency(space, Ns=(128, 256, 512))
        ok &= rep.final_error <= 1e-3 and rep.slope >= 2
        parts.append(f"{name}: err {rep.final_error:.1e}, order {rep.slope:.2f}")
    return ok, "; ".join(parts) + " (need err <= 1e-3, order >= 2)"


def check_3():
    cfg = FlowConfig(m=1, t_end=5.0, sample_every=50)
    traj = run(circle(256, 1.5), cfg, snapshot_every=1)
    t = np.array([s[1] for s in traj.snapshots])
    r = np.array([mean_radius(s[2]) for s in traj.snapshots])
    early = t <= 1.0 + 1e-12
    ref = circle_radius_ode(1.5, t[early])
    ode_err = float(np.max(np.abs(r[early] - ref) / ref))
    F_err = abs(traj.energies[-1] - 4 * math.pi) / (4 * math.pi)
    ok = traj.status == "completed" and ode_err <= 0.01 and F_err <= 1e-3
    return ok, (f"radius sup rel err on [0,1] {ode_err:.1e} (<= 1e-2); "
                f"F(5) = {traj.energies[-1]:.6f}, rel err to 4pi {F_err:.1e} (<= 1e-3)")


def check_4():
    ratios, exact_ok = [], True
    Ns = (128, 256, 512)
    for s in range(1, 6):
        errs = []
        for N in Ns:
            ex = ellipse_nu_norm_sq(N, s)
            exact_ok &= bool(np.allclose(grad_norm_sq(s)(ellipse_kappa_jet(N)), ex, rtol=1e-10, atol=1e-10))
            fr = curve_frame(ellipse(N).vertices, SpaceForm.euclidean())
            d = [arclength_derivatives(fr.normal[:, i], fr.sigma, s)[s] for i in range(2)]
            errs.append(float(np.max(np.abs(d[0] ** 2 + d[1] ** 2 - ex))))
        ratios.append(min(errs[i] / errs[i + 1] for i in range(len(errs) - 1)))
    graded = all(frenet_nu(s).tangential.is_homogeneous(s) and frenet_nu(s).normal.is_homogeneous(s)
                 and grad_norm_sq(s).is_homogeneous(2 * s) for s in range(1, 9))
    ok = exact_ok and min(ratios) >= 4 and graded
    return ok, (f"symbolic == exact for s<=5: {exact_ok}; min error ratio per N doubling "
                f"{min(ratios):.1f} (>= 4); homogeneous up to s=8: {graded}")


def check_5():
    unit = SpaceForm.sphere()
    ts = threshold_sup(unit).value
    great = check_initial_condition(circle(256, 1.0, unit), 1)
    flat, hyp = SpaceForm.euclidean(), SpaceForm.hyperbolic()
    others = [threshold_sup(flat).value, threshold_sup(hyp).value]
    sat = [check_initial_condition(c, m).satisfied
           for c in (circle(128, 3.0), ellipse(128, 2.0, 1.0), circle(128, 0.5, hyp)) for m in (1, 2)]
    ok = ts == 1.0 and not great.satisfied and others == [math.inf, math.inf] and all(sat)
    return ok, (f"sphere sup = {ts!r}, great circle F = {great.F_m:.4f} -> satisfied={great.satisfied}; "
                f"euclidean/hyperbolic sup = {others}, curves satisfied: {all(sat)}")


def check_6():
    worst, ok = {}, True
    for name in ("sphere", "ellipsoid", "torus"):
        rep = convergence_report(name, (32, 64, 128))
        m = min(rep["slopes"].values())
        worst[name] = m
        ok &= m >= 1.8
    d = divergence_identity(closed_grid("sphere", 64), "normal")
    target = 8 * math.pi
    rel = max(abs(d["lhs"] - target), abs(d["rhs"] - target)) / target
    ok &= rel <= 5e-3
    slopes = ", ".join(f"{k} {v:.2f}" for k, v in worst.items())
    return ok, (f"min slope per surface (inf = at roundoff floor): {slopes} (>= 1.8); "
                f"divergence identity lhs {d['lhs']:.5f} rhs {d['rhs']:.5f} vs 8pi, rel {rel:.1e} (<= 5e-3)")


def check_7():
    suites = [iq.sobolev_suite(name, 100, 64, seed=0) for name in ("sphere", "torus")]
    sob_v = sum(s["violations"] for s in suites)
    dens = iq.sphere_density_family() + iq.curve_density_family()
    dens_v = sum(not r.holds for r in dens)
    sb = iq.sup_bound_ladder(2.0, (128, 256, 512), 50)
    s = closed_grid("sphere", 64)
    rng = np.random.default_rng(0)
    surf = [iq.sup_bound_surface_ratio(s, iq.random_nonnegative_function(rng)(*s.X) + 0.1, 3.0)
            for _ in range(20)]
    sb_ok = sb["ok"] and all(math.isfinite(v) for v in surf)
    ok = sob_v == 0 and dens_v == 0 and sb_ok
    return ok, (f"Sobolev violations {sob_v}/200 (max lhs/rhs {max(x['max_ratio'] for x in suites):.3f}, "
                f"C = {iq.C2:.4f}); density violations {dens_v}/{len(dens)}; "
                f"sup bound drift {sb['drift']:.3f} (<= 2), surface ratios finite: {sb_ok}")


def check_8():
    ladders = [iq.interpolation_ladder("gn", 1, 2), iq.interpolation_ladder("gn", 2, 3),
               iq.interpolation_ladder("lq", 1, 2), iq.interpolation_ladder("lq", 1, 3),
               iq.interpolation_ladder("mixed", 1, 3, a=0.5)]
    sines = [iq.sine_ratio("gn"), iq.sine_ratio("lq")]
    drift = max(lad["drift"] for lad in ladders)
    sine_err = max(s["rel_error"] for s in sines)
    ok = all(lad["ok"] for lad in ladders) and sine_err <= 0.01
    return ok, f"{len(ladders)} ladders finite, max drift {drift:.3f} (<= 2); sine tests rel err {sine_err:.1e} (<= 1e-2)"


def check_9():
    runs, _ = standard_runs()
    completed = all(t.status == "completed" for t in runs.values())
    sups = {}
    finite = True
    for key, traj in runs.items():
        mons = [gronwall_monitor(traj, k) for k in range(4)]
        finite &= all(m["finite"] and math.isfinite(m["sup"]) for m in mons)
        sups[key] = max(m["sup"] for m in mons)
    with tempfile.TemporaryDirectory() as tmp:
        for sub in ("a", "b"):
            traj = run(standard_curve("sphere"), standard_config(1))
            emit_outputs(traj, Path(tmp) / sub, svg=False)
        same = filecmp.cmp(Path(tmp) / "a" / "diagnostics.csv", Path(tmp) / "b" / "diagnostics.csv",
                           shallow=False)
    ok = completed and finite and same
    return ok, (f"all 6 runs completed: {completed}; ||grad^k A||^2 (k<=3) finite: {finite}, "
                f"largest recorded sup {max(sups.values()):.3g}; byte-identical diagnostics.csv: {same}")


CRITERIA = {
    1: ("energy monotonicity", check_1),
    2: ("first-variation consistency", check_2),
    3: ("circle ODE oracle", check_3),
    4: ("Frenet recursion", check_4),
    5: ("threshold logic", check_5),
    6: ("identity lab", check_6),
    7: ("Sobolev, density and sup-bound suites", check_7),
    8: ("interpolation suite", check_8),
    9: ("boundedness monitoring and determinism", check_9),
}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    title, fn = CRITERIA[n]
    t0 = time.perf_counter()
    ok, detail = fn()
    report(n, title, ok, f"{detail} [{time.perf_counter() - t0:.1f}s]")
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for n, (title, fn) in CRITERIA.items():
        ok, detail = fn()
        report(n, title, ok, detail)
        failures += not ok
    sys.exit(1 if failures else 0)
