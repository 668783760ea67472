"""Run outputs: CSV diagnostics, JSON snapshots and report, optional SVG frames.

Floats are written with ``repr`` so files round-trip exactly and identical
runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .config import jsonable
from .curves import DiscreteCurve
from .flow import Trajectory, csv_header, energy_increments, gronwall_monitor


def write_snapshot(curve: DiscreteCurve, path, **meta) -> None:
    data = {**meta, **curve.to_dict()}
    Path(path).write_text(json.dumps(data))


def read_snapshot(path) -> DiscreteCurve:
    return DiscreteCurve.from_dict(json.loads(Path(path).read_text()))


def write_diagnostics(traj: Trajectory, path, K: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(K))
        for rec in traj.records:
            w.writerow([repr(float(v)) for v in rec.row()])


def final_report(traj: Trajectory, config: dict | None = None, K: int = 3) -> dict:
    inc = energy_increments(traj)
    st = traj.final
    return jsonable({
        "status": traj.status,
        "reason": traj.reason,
        "t_final": st.t if st else None,
        "steps": st.step if st else 0,
        "rejections": traj.rejections,
        "F_initial": traj.energies[0],
        "F_final": traj.energies[-1],
        "max_relative_energy_increment": float(inc.max()) if inc.size else 0.0,
        "initial_condition": traj.initial_check,
        "curvature_norms": [gronwall_monitor(traj, k) for k in range(K + 1)],
        "ratio_sup": max(r.ratio for r in traj.records),
        "config": config or {},
    })


def frames_svg(traj: Trajectory, size: int = 480, pad: float = 0.05) -> str:
    pts = np.concatenate([c.vertices for _, _, c in traj.snapshots])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) * (1 + 2 * pad) or 1.0
    origin = (lo + hi) / 2 - span / 2

    def tx(v):
        q = (v - origin) / span * size
        return " ".join(f"{x:.3f},{size - y:.3f}" for x, y in q)

    n = len(traj.snapshots)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">', '<rect width="100%" height="100%" fill="white"/>']
    for k, (_, t, c) in enumerate(traj.snapshots):
        shade = int(200 * (1 - k / max(n - 1, 1)))
        lines.append(f'<polygon points="{tx(c.vertices)}" fill="none" '
                     f'stroke="rgb({shade},{shade},255)" stroke-width="1"><title>t={t:.6g}</title></polygon>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_outputs(traj: Trajectory, out_dir, config: dict | None = None, K: int = 3,
                 svg: bool = True) -> list:
    """Write the run directory; returns the written file names in order."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"unwritable output directory {out}: {err}") from None
    written = []
    write_diagnostics(traj, out / "diagnostics.csv", K)
    written.append("diagnostics.csv")
    for idx, (step, t, curve) in enumerate(traj.snapshots):
        name = f"snapshot_{idx:04d}.json"
        write_snapshot(curve, out / name, step=step, t=t)
        written.append(name)
    (out / "final_report.json").write_text(json.dumps(final_report(traj, config, K), indent=2) + "\n")
    written.append("final_report.json")
    if svg:
        (out / "frames.svg").write_text(frames_svg(traj))
        written.append("frames.svg")
    return written
