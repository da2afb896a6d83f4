"""Tangent predictor / Newton corrector continuation inside one invariant subspace.

All work happens in the quotient coordinates ``(s, y)`` of the branch's
home subspace. The corrector solves ``F_B(s, y) = 0`` together with one
hyperplane constraint ``normal . ((s, y) - anchor) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NoConvergence, NumericalError, SingularJacobian, StartInvalid, TangentRankDeficient
from .network import QuotientSystem, eval_F_B, jac_s, jac_x

WINDOW_EXIT = "window_exit"
CLOSED_LOOP = "closed_loop"
HIT_KNOWN_EVENT = "hit_known_event"
MAX_STEPS = "max_steps"
NEWTON_FAILURE = "newton_failure"
TERMINATIONS = (WINDOW_EXIT, CLOSED_LOOP, HIT_KNOWN_EVENT, MAX_STEPS, NEWTON_FAILURE)


@dataclass(frozen=True)
class Tolerances:
    tol_newton: float = 1e-10
    tol_mem: float = 1e-9
    gap_tol: float = 1e-6
    merge_tol: float = 1e-6
    delta_init: float = 0.02
    delta_min: float = 1e-6
    delta_max: float = 0.1
    delta_spawn: float = 1e-3
    max_iter: int = 20
    max_steps: int = 10000
    max_branches: int = 512
    y_max: float = 1e3

    def check(self):
        from .errors import ValidationError

        for name in ("tol_newton", "tol_mem", "gap_tol", "merge_tol", "delta_init", "delta_min",
                     "delta_max", "delta_spawn", "y_max"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"tolerance {name} must be positive")
        if not self.delta_min <= self.delta_init <= self.delta_max:
            raise ValidationError("need delta_min <= delta_init <= delta_max")
        if self.max_iter < 1 or self.max_steps < 1 or self.max_branches < 1:
            raise ValidationError("iteration limits must be positive")


DEFAULT_TOL = Tolerances()


@dataclass
class BranchPoint:
    s: float
    y: np.ndarray
    x: np.ndarray
    tangent: np.ndarray
    signatures: dict[str, int] = field(default_factory=dict)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate(([self.s], self.y))


@dataclass
class Branch:
    id: str
    subspace: str
    points: list[BranchPoint] = field(default_factory=list)
    origin: dict | None = None
    termination: str | None = None


def _augmented(q: QuotientSystem, z, normal, anchor):
    s, y = z[0], z[1:]
    G = np.concatenate((eval_F_B(q, s, y), [normal @ (z - anchor)]))
    J = np.zeros((q.d + 1, q.d + 1))
    J[: q.d, 0] = jac_s(q, s, y)
    J[: q.d, 1:] = jac_x(q, s, y)
    J[q.d] = normal
    return G, J


def newton_correct(q: QuotientSystem, guess, normal, anchor, tol_newton: float = 1e-10,
                   max_iter: int = 20) -> tuple[float, np.ndarray]:
    """Newton on ``[F_B = 0; normal . (z - anchor) = 0]``.

    Stops once the residual is below ``tol_newton * (1 + |y|)`` and one
    further polishing step has been taken.
    """
    s0, y0 = guess
    z = np.concatenate(([float(s0)], np.asarray(y0, dtype=float)))
    normal = np.asarray(normal, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    r0 = None
    polished = False
    for it in range(max_iter + 1):
        G, J = _augmented(q, z, normal, anchor)
        r = float(np.linalg.norm(G))
        if not math.isfinite(r):
            raise NoConvergence("residual became non-finite")
        if r0 is None:
            r0 = r
        elif r > 1e4 * max(r0, tol_newton):
            raise NoConvergence(f"residual diverged to {r:.3e}")
        scale = 1.0 + float(np.linalg.norm(z[1:]))
        if r <= tol_newton * scale:
            if polished or r <= 1e-14 * scale:
                return float(z[0]), z[1:].copy()
            polished = True
        if it == max_iter:
            break
        try:
            if np.linalg.cond(J) > 1e14:
                raise SingularJacobian("augmented Jacobian is singular")
            dz = np.linalg.solve(J, G)
        except np.linalg.LinAlgError:
            raise SingularJacobian("augmented Jacobian is singular") from None
        z = z - dz
    raise NoConvergence(f"no convergence in {max_iter} iterations (residual {r:.3e})")


def compute_tangent(q: QuotientSystem, p, prev=None, rank_tol: float = 1e-9) -> np.ndarray:
    """Unit null vector of ``[F_s | F_y]``, oriented along ``prev`` if given."""
    s, y = p
    y = np.asarray(y, dtype=float)
    d = q.d
    if d == 0:
        t = np.array([1.0])
    else:
        A = np.zeros((d, d + 1))
        A[:, 0] = jac_s(q, s, y)
        A[:, 1:] = jac_x(q, s, y)
        _, sv, vt = np.linalg.svd(A)
        if sv[-1] <= rank_tol * max(1.0, sv[0]):
            raise TangentRankDeficient("augmented Jacobian has a kernel of dimension >= 2")
        t = vt[-1].copy()
    if prev is not None:
        if t @ prev < 0:
            t = -t
    else:
        lead = t[0] if abs(t[0]) > 1e-14 else t[np.flatnonzero(np.abs(t) > 1e-14)[0]]
        if lead < 0:
            t = -t
    return t / np.linalg.norm(t)


def make_point(q: QuotientSystem, s: float, y, tangent) -> BranchPoint:
    y = np.asarray(y, dtype=float)
    return BranchPoint(float(s), y, q.lift(y), np.asarray(tangent, dtype=float))


def segment_distance(p, a, b) -> float:
    """Euclidean distance from point p to the segment [a, b]."""
    ab = b - a
    L2 = float(ab @ ab)
    t = 0.0 if L2 == 0 else min(1.0, max(0.0, float((p - a) @ ab) / L2))
    return float(np.linalg.norm(a + t * ab - p))


Monitor = Callable[[Branch, QuotientSystem], "str | None"]


def follow_branch(q: QuotientSystem, start, direction, window, registry: Sequence = (),
                  tol: Tolerances = DEFAULT_TOL, monitor: Monitor | None = None,
                  branch: Branch | None = None) -> Branch:
    """Pseudo-arclength continuation from ``start = (s, y)`` along ``direction``.

    ``registry`` holds ``(s, x)`` sites of known bifurcation points lying in
    proper subspaces of the home subspace; passing through one ends the
    branch. ``monitor(branch, q)`` runs after every accepted point and may
    end the branch by returning a termination reason (it may also edit the
    point list). ``branch`` lets the caller pre-seed points.
    """
    s_min, s_max = window
    s0, y0 = start
    y0 = np.asarray(y0, dtype=float)
    res = np.linalg.norm(eval_F_B(q, s0, y0))
    if res > 1e3 * tol.tol_newton * (1 + np.linalg.norm(y0)):
        raise StartInvalid(f"start residual {res:.3e} is too large")
    t = np.asarray(direction, dtype=float)
    t = t / np.linalg.norm(t)
    try:
        t = compute_tangent(q, (s0, y0), prev=t)
    except TangentRankDeficient:
        pass
    if branch is None:
        branch = Branch("", q.subspace.id)
    first = make_point(q, s0, y0, t)
    branch.points.append(first)
    z_start = first.z
    x_start = np.concatenate(([s0], first.x))
    travelled = 0.0

    delta = tol.delta_init
    successes = 0
    for _ in range(tol.max_steps):
        p = branch.points[-1]
        z = p.z
        t = p.tangent
        z_pred = z + delta * t
        try:
            s_new, y_new = newton_correct(q, (z_pred[0], z_pred[1:]), t, z_pred, tol.tol_newton, tol.max_iter)
            z_new = np.concatenate(([s_new], y_new))
            if np.linalg.norm(z_new - z_pred) > delta:
                raise NoConvergence("corrector moved too far from the predictor")
            try:
                t_new = compute_tangent(q, (s_new, y_new), prev=t)
            except TangentRankDeficient:
                t_new = t
            if t_new @ t < 0.8:
                raise NoConvergence("tangent turned too sharply")
        except NumericalError:
            delta *= 0.5
            successes = 0
            if delta < tol.delta_min:
                branch.termination = NEWTON_FAILURE
                return branch
            continue

        if not (s_min <= s_new <= s_max):
            bound = s_max if s_new > s_max else s_min
            w = (bound - z[0]) / (s_new - z[0]) if s_new != z[0] else 1.0
            guess = z + w * (z_new - z)
            try:
                sb, yb = newton_correct(q, (bound, guess[1:]), np.eye(q.d + 1)[0], guess,
                                        tol.tol_newton, tol.max_iter)
                tb = compute_tangent(q, (sb, yb), prev=t)
                branch.points.append(make_point(q, sb, yb, tb))
                if monitor is not None:
                    monitor(branch, q)
            except NumericalError:
                pass
            branch.termination = WINDOW_EXIT
            return branch

        new = make_point(q, s_new, y_new, t_new)
        branch.points.append(new)
        travelled += float(np.linalg.norm(z_new - z))

        if monitor is not None:
            reason = monitor(branch, q)
            if reason is not None:
                branch.termination = reason
                return branch

        seg_a = np.concatenate(([z[0]], p.x))
        seg_b = np.concatenate(([s_new], new.x))
        chord = float(np.linalg.norm(seg_b - seg_a))
        near = max(tol.merge_tol, 0.05 * chord)
        for site_s, site_x in registry:
            site = np.concatenate(([site_s], np.asarray(site_x, dtype=float)))
            if np.linalg.norm(site - x_start) > 10 * tol.delta_spawn and segment_distance(site, seg_a, seg_b) <= near:
                branch.termination = HIT_KNOWN_EVENT
                return branch
        if travelled > 10 * tol.delta_max and segment_distance(x_start, seg_a, seg_b) <= near \
                and t_new @ branch.points[0].tangent > 0:
            branch.termination = CLOSED_LOOP
            return branch
        if np.linalg.norm(y_new) > tol.y_max:
            branch.termination = WINDOW_EXIT
            return branch

        successes += 1
        if successes >= 3:
            delta = min(tol.delta_max, delta * 1.3)
            successes = 0
    branch.termination = MAX_STEPS
    return branch


def sweep_trivial(q: QuotientSystem, window, tol: Tolerances = DEFAULT_TOL, monitor: Monitor | None = None,
                  branch: Branch | None = None) -> Branch:
    """The trivial branch ``{(s, 0)}`` sampled every ``delta_max`` across the window."""
    s_min, s_max = window
    if branch is None:
        branch = Branch("", q.subspace.id)
    count = max(1, int(math.ceil((s_max - s_min) / tol.delta_max)))
    tangent = np.ones(1)
    for k in range(count + 1):
        s = s_min + (s_max - s_min) * k / count
        branch.points.append(make_point(q, s, np.zeros(0), tangent))
        if monitor is not None and k > 0:
            reason = monitor(branch, q)
            if reason is not None:
                branch.termination = reason
                return branch
    branch.termination = WINDOW_EXIT
    return branch
