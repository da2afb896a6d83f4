"""Re-check a saved forest record against the system it claims to solve."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import NetworkSystem, eval_F, membership_residual
from .output import BranchForestRecord
from .polydiag import subspace_from_labels
from .rational import frac

POINT_TOL = 1e-8
MEMBER_TOL = 1e-7


@dataclass
class VerifyReport:
    max_residual: float = 0.0
    points: int = 0
    events: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_record(rec: BranchForestRecord) -> VerifyReport:
    cfg = rec.run_config()
    M = np.array([[frac(v) for v in row] for row in rec.matrix], dtype=object)
    system = NetworkSystem(M, cfg.dynamics(), cfg.h)
    subs = {d["id"]: subspace_from_labels(d["id"], d["labels"]) for d in rec.subspaces}
    rep = VerifyReport()

    def check_point(where, s, x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(eval_F(system, s, x)))
        rep.max_residual = max(rep.max_residual, r)
        if r > POINT_TOL * (1 + np.linalg.norm(x)):
            rep.violations.append(f"{where}: residual {r:.3e}")

    for b in rec.branches:
        home = subs.get(b["subspace"])
        if home is None:
            rep.violations.append(f"{b['id']}: unknown subspace {b['subspace']}")
            continue
        B = home.matrix()
        for k, p in enumerate(b["points"]):
            where = f"{b['id']}[{k}]"
            rep.points += 1
            check_point(where, p["s"], p["x"])
            x = np.asarray(p["x"])
            if np.linalg.norm(B @ np.asarray(p["y"], dtype=float).reshape(-1) - x) > MEMBER_TOL * (1 + np.linalg.norm(x)):
                rep.violations.append(f"{where}: x is not the lift of y")
            if abs(np.linalg.norm(p["tangent"]) - 1) > 1e-9:
                rep.violations.append(f"{where}: tangent is not a unit vector")
    for e in rec.events:
        rep.events += 1
        check_point(e["id"], e["s_star"], e["x_star"])
        x0 = np.asarray(e["critical_vector"])
        if abs(np.linalg.norm(x0) - 1) > 1e-9:
            rep.violations.append(f"{e['id']}: critical vector is not a unit vector")
        if membership_residual(subs[e["daughter"]], x0) > MEMBER_TOL:
            rep.violations.append(f"{e['id']}: critical vector is not in {e['daughter']}")
        if membership_residual(subs[e["mother"]], x0) < 0.1:
            rep.violations.append(f"{e['id']}: critical vector lies (nearly) in the mother {e['mother']}")
    return rep
