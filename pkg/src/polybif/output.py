"""Forest record (JSON), per-branch CSV tables and the SVG bifurcation diagram.

All writers are deterministic: identical forests give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bifurcation import BranchForest
from .config import RunConfig
from .rational import fmt

FORMAT = "polybif-forest"
FORMAT_VERSION = 1


def _floats(v) -> list[float]:
    return [float(a) for a in np.asarray(v, dtype=float).ravel()]


@dataclass
class BranchForestRecord:
    """JSON-native view of a finished run."""

    metadata: dict
    config: dict
    matrix: list[list[str]]
    subspaces: list[dict]
    orbits: list[list[str]]
    candidates: dict[str, list[str]]
    branches: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    folds: list[dict] = field(default_factory=list)
    notes: list[dict] = field(default_factory=list)
    arrivals: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BranchForestRecord":
        d = json.loads(text)
        if d.get("metadata", {}).get("format") != FORMAT:
            raise ValueError("not a forest record")
        return cls(**d)

    def run_config(self) -> RunConfig:
        return RunConfig.from_dict(self.config)


def make_record(forest: BranchForest, cfg: RunConfig, system) -> BranchForestRecord:
    lat = forest.lattice
    meta = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "versions": {"polybif": __version__, "numpy": np.__version__},
        "n": system.n,
    }
    subs = [{"id": s.id, "kind": s.kind, "dim": s.dim, "labels": list(s.labels)} for s in lat.subspaces]
    branches = []
    for b in forest.branches:
        branches.append({
            "id": b.id, "subspace": b.subspace, "termination": b.termination, "origin": b.origin,
            "points": [{"s": float(p.s), "y": _floats(p.y), "x": _floats(p.x), "tangent": _floats(p.tangent),
                        "signatures": dict(p.signatures)} for p in b.points],
        })
    events = [{
        "id": e.id, "s_star": float(e.s_star), "x_star": _floats(e.x_star), "mother": e.mother,
        "mother_branch": e.mother_branch, "critical_vector": _floats(e.critical_vector), "daughter": e.daughter,
        "crossing_kind": e.crossing_kind, "spawn_dirs": [_floats(d) for d in e.spawn_dirs],
        "cond_b_checked": e.cond_b_checked,
    } for e in forest.events]
    folds = [{"s": float(f.s), "x": _floats(f.x), "branch": f.branch, "subspace": f.subspace} for f in forest.folds]
    notes = [{"kind": n.kind, "s": float(n.s), "x": _floats(n.x), "branch": n.branch, "detail": n.detail}
             for n in forest.notes]
    arrivals = [{"branch": a.branch, "home": a.home, "s": float(a.s), "x": _floats(a.x),
                 "direction": _floats(a.direction)} for a in forest.arrivals]
    return BranchForestRecord(meta, cfg.to_dict(), [[fmt(v) for v in row] for row in system.M],
                              subs, [list(o) for o in lat.orbits], forest.candidates,
                              branches, events, folds, notes, arrivals)


def functional_of(cfg_functional, n: int) -> np.ndarray:
    if cfg_functional is None:
        return np.full(n, 1.0 / n)
    return np.asarray(cfg_functional, dtype=float)


# ---------------------------------------------------------------------------
# CSV


def branch_csv(branch: dict, c: np.ndarray) -> str:
    pts = branch["points"]
    d = len(pts[0]["y"]) if pts else 0
    n = len(c)
    sig_keys = list(pts[0]["signatures"]) if pts else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s"] + [f"y_{i + 1}" for i in range(d)] + [f"x_{i + 1}" for i in range(n)]
               + ["cx", "norm"] + [f"sig_{k}" for k in sig_keys])
    for p in pts:
        x = np.asarray(p["x"])
        row = [p["s"]] + p["y"] + p["x"] + [float(c @ x), float(np.linalg.norm(x))]
        w.writerow(["%.17g" % v for v in row] + [str(p["signatures"].get(k, "")) for k in sig_keys])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# SVG

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939")
WIDTH, HEIGHT = 840, 520
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 50


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * span:
        out.append(round(float(v), 12) + 0.0)
        v += step
    return out


def emit_svg(record: BranchForestRecord, c: np.ndarray, title: str = "bifurcation diagram") -> str:
    cfg = record.config
    s_lo, s_hi = float(cfg["s_min"]), float(cfg["s_max"])
    vals = [float(c @ np.asarray(p["x"])) for b in record.branches for p in b["points"]]
    vals += [float(c @ np.asarray(e["x_star"])) for e in record.events]
    v_lo, v_hi = (min(vals), max(vals)) if vals else (-1.0, 1.0)
    if v_hi - v_lo < 1e-9:
        v_lo, v_hi = v_lo - 1.0, v_hi + 1.0
    pad = 0.05 * (v_hi - v_lo)
    v_lo, v_hi = v_lo - pad, v_hi + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def X(s):
        return LEFT + (s - s_lo) / (s_hi - s_lo) * pw

    def Y(v):
        return TOP + (v_hi - v) / (v_hi - v_lo) * ph

    orbit_of = {sid: i for i, orb in enumerate(record.orbits) for sid in orb}
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{LEFT + pw / 2:.2f}" y="18" text-anchor="middle">{title}</text>',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _nice_ticks(s_lo, s_hi):
        out.append(f'<line x1="{X(t):.2f}" y1="{TOP + ph}" x2="{X(t):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X(t):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(v_lo, v_hi):
        out.append(f'<line x1="{LEFT - 5}" y1="{Y(t):.2f}" x2="{LEFT}" y2="{Y(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{Y(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">s</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">c.x</text>')
    used = []
    for b in record.branches:
        k = orbit_of.get(b["subspace"], 0)
        if k not in used:
            used.append(k)
        pts = " ".join(f"{X(p['s']):.2f},{Y(float(c @ np.asarray(p['x']))):.2f}" for p in b["points"])
        out.append(f'<polyline id="{b["id"]}" fill="none" stroke="{PALETTE[k % len(PALETTE)]}" '
                   f'stroke-width="1.5" points="{pts}"/>')
    for e in record.events:
        out.append(f'<circle id="{e["id"]}" cx="{X(e["s_star"]):.2f}" '
                   f'cy="{Y(float(c @ np.asarray(e["x_star"]))):.2f}" r="4" fill="none" stroke="black"/>')
    for row, k in enumerate(sorted(used)):
        y = TOP + 10 + 18 * row
        x0 = LEFT + pw + 15
        label = "/".join(record.orbits[k])
        out.append(f'<line x1="{x0}" y1="{y}" x2="{x0 + 20}" y2="{y}" stroke="{PALETTE[k % len(PALETTE)]}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{x0 + 26}" y="{y + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_outputs(record: BranchForestRecord, out_dir, c: np.ndarray) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "forest.json"
    p.write_text(record.to_json())
    written.append(p)
    for b in record.branches:
        p = out / f"branch_{b['id']}.csv"
        p.write_text(branch_csv(b, c))
        written.append(p)
    p = out / "diagram.svg"
    p.write_text(emit_svg(record, c))
    written.append(p)
    return written
