"""Signature monitoring, crossing refinement, daughter selection and the branch tree.

Along a branch in its home subspace W_m, the Jacobian is restricted to every
F-invariant W containing W_m and the number of eigenvalues with negative
real part is recorded per W. A change between two points means an
eigenvalue crossed the imaginary axis inside some W; the crossing is
located by bisection on the count followed by regula falsi on the real
part of the eigenvalue nearest zero. The kernel vector found in the
smallest W where the crossing shows up selects the daughter subspace.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .continuation import (DEFAULT_TOL, HIT_KNOWN_EVENT, Branch, BranchPoint, Tolerances, compute_tangent,
                           follow_branch, make_point, newton_correct, sweep_trivial)
from .errors import (EigenFailure, NoConvergence, NoSignChange, NumericalError, QueueOverflow, StartInvalid,
                     TangentRankDeficient, ValidationError)
from .network import NetworkSystem, QuotientSystem, jac_x, membership_residual
from .polydiag import Subspace, SubspaceLattice, contains
from .symmetry import SymmetryGroup, act_on_subspace, apply, seeds_equivalent

log = logging.getLogger(__name__)

FOLD = "fold"
BLIS = "blis"
SITE_TOL = 1e-6      # two refined crossings closer than this are one site
DIR_TOL = 1e-6       # kernel vectors are accurate to roughly 1e-9 / gap
MEMBER_TOL = 1e-7    # membership of a computed kernel vector in a subspace
HIT_TOL = 1e-6       # a branch point this close to a smaller subspace lies in it
KERNEL_TOL = 1e-6    # singular values below this (relative) span the kernel
THETA_TOL = 1e-3     # bisection on the count stops at this chord fraction
ROOT_TOL = 1e-9      # |Re lambda| at a refined crossing
MAX_REFINE = 80


class MultiDimKernelUnresolved(NumericalError):
    """The kernel in the smallest candidate is not explained by one-dimensional daughters."""


@dataclass
class BifurcationEvent:
    id: str
    s_star: float
    x_star: np.ndarray
    mother: str
    mother_branch: str
    critical_vector: np.ndarray
    daughter: str
    crossing_kind: str = BLIS
    spawn_dirs: list = field(default_factory=list)
    cond_b_checked: bool = False


@dataclass
class Fold:
    s: float
    x: np.ndarray
    branch: str
    subspace: str


@dataclass
class Note:
    """Something seen but not followed: hopf, unresolved kernel, degenerate spawn, ..."""

    kind: str
    s: float
    x: np.ndarray
    branch: str
    detail: str = ""


@dataclass
class Arrival:
    """A branch ending where it meets a smaller invariant subspace."""

    branch: str
    home: str
    s: float
    x: np.ndarray
    direction: np.ndarray


@dataclass
class BranchForest:
    branches: list[Branch]
    events: list[BifurcationEvent]
    folds: list[Fold]
    notes: list[Note]
    arrivals: list[Arrival]
    lattice: SubspaceLattice
    candidates: dict[str, list[str]]


# ---------------------------------------------------------------------------
# signatures


def f_invariant(sub: Subspace, system: NetworkSystem) -> bool:
    if sub.basis is None:
        return system.f.vanishes_at_zero
    return sub.is_synchrony or system.f.odd


def daughter_candidates(lattice: SubspaceLattice, mother: Subspace | str, odd: bool,
                        trivial_ok: bool = True) -> list[Subspace]:
    """Every W containing the mother, anti-synchrony dropped unless f is odd."""
    mid = mother if isinstance(mother, str) else mother.id
    base = lattice.get(mid)
    out = []
    for W in lattice.subspaces:
        if not contains(W, base):
            continue
        if W.basis is None and not trivial_ok:
            continue
        if W.basis is not None and not W.is_synchrony and not odd:
            continue
        out.append(W)
    return sorted(out, key=lambda W: (W.dim, lattice.index(W.id)))


def _spectrum(q: QuotientSystem, s: float, x) -> np.ndarray:
    if q.d == 0:
        return np.zeros(0, dtype=complex)
    J = jac_x(q, s, q.Bp @ np.asarray(x, dtype=float))
    try:
        ev = np.linalg.eigvals(J)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from None
    if not np.all(np.isfinite(ev)):
        raise EigenFailure("non-finite eigenvalues")
    return ev


def signature(point: BranchPoint, quotients) -> dict[str, int]:
    """Number of eigenvalues with negative real part per candidate subspace."""
    return {q.subspace.id: int(np.sum(_spectrum(q, point.s, point.x).real < 0)) for q in quotients}


def detect_crossings(p1: BranchPoint, p2: BranchPoint) -> list[tuple[str, int]]:
    return [(k, p2.signatures[k] - p1.signatures[k]) for k in p1.signatures
            if k in p2.signatures and p1.signatures[k] != p2.signatures[k]]


# ---------------------------------------------------------------------------
# refinement


class _Chord:
    """Points on the home branch between two accepted points, parametrized by
    the fraction theta of the chord; each is re-solved by Newton on the
    hyperplane through the chord point normal to the chord."""

    def __init__(self, qH: QuotientSystem, p1: BranchPoint, p2: BranchPoint, tol: Tolerances):
        self.qH = qH
        self.z1, self.z2 = p1.z, p2.z
        dz = self.z2 - self.z1
        self.normal = dz / np.linalg.norm(dz)
        self.tol = tol
        self.cache: dict[float, tuple[float, np.ndarray]] = {0.0: (p1.s, p1.y), 1.0: (p2.s, p2.y)}

    def at(self, theta: float) -> tuple[float, np.ndarray]:
        if theta in self.cache:
            return self.cache[theta]
        g = self.z1 + theta * (self.z2 - self.z1)
        if self.qH.d == 0:
            out = (float(g[0]), np.zeros(0))
        else:
            out = newton_correct(self.qH, (g[0], g[1:]), self.normal, g, self.tol.tol_newton, self.tol.max_iter)
        self.cache[theta] = out
        return out

    def x(self, theta: float) -> tuple[float, np.ndarray]:
        s, y = self.at(theta)
        return s, self.qH.lift(y)


def _count(qW, chord, theta):
    s, x = chord.x(theta)
    return int(np.sum(_spectrum(qW, s, x).real < 0))


def _nearest_real(qW, chord, theta):
    s, x = chord.x(theta)
    ev = _spectrum(qW, s, x)
    return float(ev[np.argmin(np.abs(ev.real))].real)


def refine_crossing(qH: QuotientSystem, qW: QuotientSystem, p1: BranchPoint, p2: BranchPoint,
                    tol: Tolerances = DEFAULT_TOL, chord: _Chord | None = None) -> list[tuple[float, np.ndarray]]:
    """Locate every place between p1 and p2 where an eigenvalue of the
    W-restricted Jacobian crosses the imaginary axis. Returns on-branch
    points ``(s, y)`` in home coordinates, ordered along the branch."""
    chord = chord or _Chord(qH, p1, p2, tol)
    c0, c1 = _count(qW, chord, 0.0), _count(qW, chord, 1.0)
    if c0 == c1:
        raise NoSignChange(f"signature of {qW.subspace.id} is the same at both ends")

    brackets = []

    def split(a, ca, b, cb):
        if ca == cb:
            return
        if b - a <= THETA_TOL:
            brackets.append((a, ca, b, cb))
            return
        m = 0.5 * (a + b)
        cm = _count(qW, chord, m)
        split(a, ca, m, cm)
        split(m, cm, b, cb)

    split(0.0, c0, 1.0, c1)
    return [chord.at(_root(qW, chord, *br)) for br in brackets]


def _root(qW, chord, a, ca, b, cb) -> float:
    """Regula falsi (Illinois) on the real part of the eigenvalue nearest the
    axis, falling back to bisection on the count."""
    ga, gb = _nearest_real(qW, chord, a), _nearest_real(qW, chord, b)
    if abs(ga) <= ROOT_TOL:
        return a
    if abs(gb) <= ROOT_TOL:
        return b
    if ga * gb < 0:
        side = 0
        for _ in range(MAX_REFINE):
            m = (a * gb - b * ga) / (gb - ga)
            if not a < m < b:
                m = 0.5 * (a + b)
            gm = _nearest_real(qW, chord, m)
            if abs(gm) <= ROOT_TOL or b - a <= 1e-15:
                return m
            if gm * ga < 0:
                b, gb = m, gm
                if side == -1:
                    ga *= 0.5
                side = -1
            else:
                a, ga = m, gm
                if side == 1:
                    gb *= 0.5
                side = 1
    for _ in range(MAX_REFINE):
        m = 0.5 * (a + b)
        cm = _count(qW, chord, m)
        if cm == ca:
            a = m
        else:
            b = m
        if b - a <= 1e-14:
            break
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# the exploration engine


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    k = np.flatnonzero(np.abs(v) > 1e-8)[0]
    return v if v[k] > 0 else -v


@dataclass
class _Seed:
    event: BifurcationEvent
    direction: np.ndarray
    sign: int


class Explorer:
    """Breadth-first exploration of the branch tree from one start solution."""

    def __init__(self, system: NetworkSystem, lattice: SubspaceLattice, group: SymmetryGroup,
                 window, tol: Tolerances = DEFAULT_TOL):
        self.system = system
        self.lattice = lattice
        self.group = group
        self.window = (float(window[0]), float(window[1]))
        self.tol = tol
        self.allowed = [W for W in lattice.subspaces if f_invariant(W, system)]
        self._q: dict[str, QuotientSystem] = {}
        self._cands: dict[str, list[Subspace]] = {}
        self._proj: dict[str, np.ndarray] = {}
        self.branches: list[Branch] = []
        self.events: list[BifurcationEvent] = []
        self.folds: list[Fold] = []
        self.notes: list[Note] = []
        self.arrivals: list[Arrival] = []
        self.site_kernels: list[tuple[float, np.ndarray, np.ndarray]] = []
        self.queue: deque[_Seed] = deque()

    # -- small caches -------------------------------------------------------

    def quotient(self, sid: str) -> QuotientSystem:
        if sid not in self._q:
            self._q[sid] = self.system.quotient(self.lattice.get(sid))
        return self._q[sid]

    def candidates(self, sid: str) -> list[Subspace]:
        if sid not in self._cands:
            self._cands[sid] = daughter_candidates(self.lattice, sid, self.system.f.odd,
                                                   self.system.f.vanishes_at_zero)
        return self._cands[sid]

    def smaller(self, sid: str) -> list[Subspace]:
        home = self.lattice.get(sid)
        return sorted((W for W in self.allowed if W.id != sid and contains(home, W)),
                      key=lambda W: (W.dim, self.lattice.index(W.id)))

    def complement(self, sid: str) -> np.ndarray:
        """Orthogonal projector onto the complement of a subspace."""
        if sid not in self._proj:
            q = self.quotient(sid)
            self._proj[sid] = np.eye(self.system.n) - q.B @ q.Bp
        return self._proj[sid]

    def home_of(self, x) -> Subspace:
        x = np.asarray(x, dtype=float)
        for W in sorted(self.allowed, key=lambda W: (W.dim, self.lattice.index(W.id))):
            if membership_residual(W, x) <= HIT_TOL * (1 + np.linalg.norm(x)):
                return W
        raise StartInvalid("start vector lies in no F-invariant subspace")

    # -- monitoring ----------------------------------------------------------

    def _sign(self, p: BranchPoint, sid: str):
        if not p.signatures:
            p.signatures = signature(p, [self.quotient(W.id) for W in self.candidates(sid)])

    def monitor(self, branch: Branch, q: QuotientSystem):
        new, prev = branch.points[-1], branch.points[-2]
        sid = branch.subspace
        self._sign(prev, sid)
        self._sign(new, sid)
        if q.d > 0 and self._passage(branch, q, prev, new):
            return HIT_KNOWN_EVENT
        changed = [k for k, _ in detect_crossings(prev, new)]
        if changed:
            self._handle_crossings(branch, q, prev, new, changed)
        return None

    def _passage(self, branch: Branch, qH: QuotientSystem, prev: BranchPoint, new: BranchPoint) -> bool:
        """Detect the segment crossing a smaller F-invariant subspace; if so
        cut the branch at the crossing point and record the arrival."""
        chord = None
        span = float(np.linalg.norm(np.concatenate(([new.s - prev.s], new.x - prev.x))))
        for W in self.smaller(branch.subspace):
            P = self.complement(W.id)
            r1, r2 = P @ prev.x, P @ new.x
            u = r2 - r1
            uu = float(u @ u)
            if uu == 0.0:
                continue
            t = -float(r1 @ u) / uu
            if not 0.0 < t <= 1.0 or np.linalg.norm(r1 + t * u) > 0.05 * span + HIT_TOL:
                continue
            chord = chord or _Chord(qH, prev, new, self.tol)
            u = u / np.sqrt(uu)

            def h(theta):
                return float((P @ chord.x(theta)[1]) @ u)

            a, b = 0.0, 1.0
            ha, hb = h(a), h(b)
            if ha * hb > 0:
                continue
            theta = b
            for _ in range(MAX_REFINE):
                theta = (a * hb - b * ha) / (hb - ha) if hb != ha else 0.5 * (a + b)
                if not a < theta < b:
                    theta = 0.5 * (a + b)
                hm = h(theta)
                if abs(hm) <= 1e-13 or b - a <= 1e-15:
                    break
                if hm * ha < 0:
                    b, hb = theta, hm
                else:
                    a, ha = theta, hm
            s_h, y_h = chord.at(theta)
            x_h = qH.lift(y_h)
            if membership_residual(W, x_h) > HIT_TOL * (1 + np.linalg.norm(x_h)):
                continue
            # near the crossing the chord corrector may land on either curve;
            # snap to the singular point of the smaller branch
            snapped = self._snap(W, qH, s_h, x_h)
            if snapped is not None and abs(snapped[0] - s_h) <= 0.05 * span + HIT_TOL:
                s_h, x_h = snapped
                y_h = qH.Bp @ x_h
            try:
                t_h = compute_tangent(qH, (s_h, y_h), prev=prev.tangent)
            except TangentRankDeficient:
                t_h = prev.tangent
            hit = make_point(qH, s_h, y_h, t_h)
            self._sign(hit, branch.subspace)
            branch.points[-1] = hit
            self.arrivals.append(Arrival(branch.id, branch.subspace, s_h, x_h, prev.x - x_h))
            log.debug("branch %s meets %s at s = %.6g", branch.id, W.id, s_h)
            return True
        return False

    def _snap(self, W: Subspace, qH: QuotientSystem, s_h: float, x_h):
        """Secant along the W branch through (s_h, x_h) on the real part of
        the home Jacobian's eigenvalue nearest zero."""
        qW = self.quotient(W.id)
        y_w = qW.Bp @ x_h

        def g(s):
            nonlocal y_w
            if qW.d:
                _, y_w = newton_correct(qW, (s, y_w), np.eye(qW.d + 1)[0], np.concatenate(([s], y_w)),
                                        self.tol.tol_newton, self.tol.max_iter)
            ev = _spectrum(qH, s, qW.lift(y_w))
            return float(ev[np.argmin(np.abs(ev.real))].real)

        try:
            a, b = s_h, s_h + 1e-4
            ga, gb = g(a), g(b)
            for _ in range(40):
                if gb == ga:
                    break
                a, ga, b = b, gb, b - gb * (b - a) / (gb - ga)
                gb = g(b)
                if abs(gb) <= 1e-12 or abs(b - a) <= 1e-14:
                    break
            if abs(gb) > ROOT_TOL:
                return None
            return b, qW.lift(y_w)
        except NumericalError:
            return None

    def _handle_crossings(self, branch, qH, prev, new, changed):
        chord = _Chord(qH, prev, new, self.tol)
        order = {W.id: i for i, W in enumerate(self.candidates(branch.subspace))}
        sites: list[dict] = []
        for sid in sorted(changed, key=order.get):
            try:
                pts = refine_crossing(qH, self.quotient(sid), prev, new, self.tol, chord)
            except NumericalError as exc:
                self.notes.append(Note("refine_failed", new.s, new.x.copy(), branch.id, f"{sid}: {exc}"))
                continue
            for s, y in pts:
                x = qH.lift(y)
                for site in sites:
                    if abs(site["s"] - s) <= SITE_TOL and np.linalg.norm(site["x"] - x) <= SITE_TOL:
                        site["W"].append(sid)
                        break
                else:
                    sites.append({"s": s, "y": y, "x": x, "W": [sid]})
        sites.sort(key=lambda st: np.linalg.norm(np.concatenate(([st["s"]], st["y"])) - prev.z))
        for site in sites:
            self.classify_and_spawn(branch, site["s"], site["y"], site["W"], prev, new)

    # -- classification ------------------------------------------------------

    def classify_and_spawn(self, branch: Branch, s: float, y, crossing: list[str],
                           prev: BranchPoint | None = None, new: BranchPoint | None = None) -> list:
        """Turn one refined crossing site into folds, notes and new events."""
        home = branch.subspace
        qH = self.quotient(home)
        x = qH.lift(y)
        out: list = []
        if home in crossing:
            if prev is not None and new is not None and prev.tangent[0] * new.tangent[0] < 0:
                fold = Fold(s, x, branch.id, home)
                self.folds.append(fold)
                out.append(fold)
            else:
                self.notes.append(Note("home_crossing", s, x, branch.id,
                                       "eigenvalue of the home subspace crossed without a fold"))
        Pm = self.complement(home)
        found: list[tuple[np.ndarray, Subspace]] = []
        # kernel vectors already seen at this site (a crossing on a sample
        # point can be split over two segments)
        known = [k0 for s0, x_0, k0 in self.site_kernels
                 if abs(s0 - s) <= SITE_TOL and np.linalg.norm(x_0 - x) <= SITE_TOL]
        for sid in crossing:
            if sid == home:
                continue
            qW = self.quotient(sid)
            J = jac_x(qW, s, qW.Bp @ x)
            _, sv, vt = np.linalg.svd(J)
            k = int(np.sum(sv <= KERNEL_TOL * max(1.0, sv[0])))
            if k == 0:
                ev = np.linalg.eigvals(J)
                lam = ev[np.argmin(np.abs(ev.real))]
                if abs(lam.imag) > self.tol.gap_tol:
                    self.notes.append(Note("hopf", s, x, branch.id,
                                           f"{sid}: pair {lam.real:.3g} +- {abs(lam.imag):.6g}i"))
                    continue
                k = 1
            kernel = qW.B @ vt[-k:].T
            if k == 1:
                x0 = _unit(kernel[:, 0])
                if any(abs(x0 @ f0) > 1 - DIR_TOL for f0 in known + [f for f, _ in found]):
                    continue
                if np.linalg.norm(Pm @ x0) < 0.1:
                    continue
                daughter = next(W for W in self.candidates(home)
                                if membership_residual(W, x0) <= MEMBER_TOL)
                found.append((x0, daughter))
            else:
                if found or known:
                    F0 = np.array(known + [f0 for f0, _ in found]).T
                    coef, *_ = np.linalg.lstsq(F0, kernel, rcond=None)
                    resid = np.linalg.norm(kernel - F0 @ coef, axis=0)
                else:
                    resid = np.linalg.norm(kernel, axis=0)
                comp = np.linalg.norm(Pm @ kernel, axis=0)
                if np.any((resid > 1e-6) & (comp > 0.1)):
                    exc = MultiDimKernelUnresolved(f"{k}-dimensional kernel in {sid} at s = {s:.9g}")
                    self.notes.append(Note("unresolved", s, x, branch.id, str(exc)))
                    log.warning("%s", exc)
        for x0, daughter in found:
            self.site_kernels.append((s, x, x0))
            event = self._register(branch, s, x, x0, daughter)
            if event is not None:
                out.append(event)
        return out

    def _register(self, branch, s, x, x0, daughter) -> BifurcationEvent | None:
        for e in self.events:
            for sgn in (1, -1):
                if seeds_equivalent((s, x, x0), (e.s_star, e.x_star, sgn * e.critical_vector), self.group, DIR_TOL):
                    return None
        dirs = [x0]
        if not seeds_equivalent((s, x, x0), (s, x, -x0), self.group, DIR_TOL):
            dirs.append(-x0)
        event = BifurcationEvent(f"E{len(self.events)}", float(s), x.copy(), branch.subspace, branch.id,
                                 x0, daughter.id, BLIS, dirs)
        self.events.append(event)
        log.info("event %s at s = %.10g on %s: %s -> %s (%d seed%s)", event.id, s, branch.id,
                 branch.subspace, daughter.id, len(dirs), "" if len(dirs) == 1 else "s")
        for k, d in enumerate(dirs):
            self.queue.append(_Seed(event, d, 1 if k == 0 else -1))
        return event

    # -- seeds and branches --------------------------------------------------

    def _arrived(self, seed: _Seed) -> bool:
        """Whether a followed branch already came into this seed's event from
        the seed's side (up to symmetry)."""
        e = seed.event
        Pm = self.complement(e.mother)
        d = Pm @ seed.direction
        d = d / np.linalg.norm(d)
        target = self.lattice.get(e.daughter)
        for arr in self.arrivals:
            if abs(arr.s - e.s_star) > 1e-5:
                continue
            home = self.lattice.get(arr.home)
            for g in self.group.elements:
                if np.linalg.norm(apply(g, arr.x) - e.x_star) > 1e-5:
                    continue
                if act_on_subspace(g, home) != target:
                    continue
                a = Pm @ apply(g, arr.direction)
                na = np.linalg.norm(a)
                if na > 0 and (a / na) @ d > 0.5:
                    return True
        return False

    def _new_branch(self, sid: str, origin: dict) -> Branch:
        if len(self.branches) >= self.tol.max_branches:
            raise QueueOverflow(f"more than {self.tol.max_branches} branches")
        br = Branch(f"B{len(self.branches)}", sid, origin=origin)
        self.branches.append(br)
        return br

    def _registry_sites(self, sid: str):
        home = self.lattice.get(sid)
        return [(e.s_star, e.x_star) for e in self.events
                if e.mother != sid and contains(home, self.lattice.get(e.mother))]

    def spawn(self, seed: _Seed) -> Branch | None:
        e = seed.event
        origin = {"event": e.id, "direction": seed.sign}
        if self._arrived(seed):
            self.notes.append(Note("already_reached", e.s_star, e.x_star, e.mother_branch,
                                   f"{e.id} direction {seed.sign:+d} reached by an earlier branch"))
            return None
        qD = self.quotient(e.daughter)
        Pm = self.complement(e.mother)
        v = Pm @ seed.direction
        x_seed = e.x_star + self.tol.delta_spawn * seed.direction
        y_seed = qD.Bp @ x_seed
        ny = qD.B.T @ v
        normal = np.concatenate(([0.0], ny / np.linalg.norm(ny)))
        anchor = np.concatenate(([e.s_star], y_seed))
        try:
            s0, y0 = newton_correct(qD, (e.s_star, y_seed), normal, anchor, self.tol.tol_newton, self.tol.max_iter)
            if np.linalg.norm(Pm @ qD.lift(y0)) < 0.1 * self.tol.delta_spawn * np.linalg.norm(v):
                raise NoConvergence("spawn converged back onto the mother branch")
            t0 = compute_tangent(qD, (s0, y0))
        except NumericalError as exc:
            self.notes.append(Note("degenerate", e.s_star, e.x_star, e.mother_branch,
                                   f"{e.id} direction {seed.sign:+d}: {exc}"))
            return None
        if (qD.B @ t0[1:]) @ v < 0:
            t0 = -t0
        br = self._new_branch(e.daughter, origin)
        y_star = qD.Bp @ e.x_star
        first = make_point(qD, e.s_star, y_star, t0)
        self._sign(first, e.daughter)
        br.points.append(first)
        follow_branch(qD, (s0, y0), t0, self.window, self._registry_sites(e.daughter), self.tol,
                      self.monitor, br)
        return br

    def start_branch(self, start=None) -> Branch:
        if start is None:
            if not self.system.f.vanishes_at_zero:
                raise StartInvalid("f(s, 0) != 0: an approximate start solution must be supplied")
            start = (self.window[0], np.zeros(self.system.n))
        s0, x0 = float(start[0]), np.asarray(start[1], dtype=float)
        home = self.home_of(x0)
        q = self.quotient(home.id)
        origin = {"start": [s0] + [float(v) for v in x0]}
        if q.d == 0:
            br = self._new_branch(home.id, origin)
            return sweep_trivial(q, (s0, self.window[1]), self.tol, self.monitor, br)
        y0 = q.Bp @ x0
        try:
            s0, y0 = newton_correct(q, (s0, y0), np.eye(q.d + 1)[0], np.concatenate(([s0], y0)),
                                    self.tol.tol_newton, self.tol.max_iter)
            t0 = compute_tangent(q, (s0, y0))
        except NumericalError as exc:
            raise StartInvalid(f"start does not converge to a solution: {exc}") from None
        br = self._new_branch(home.id, origin)
        fwd = follow_branch(q, (s0, y0), t0, self.window, (), self.tol, self.monitor,
                            Branch(br.id, home.id))
        if fwd.termination == "closed_loop":
            br.points, br.termination = fwd.points, fwd.termination
            return br
        back = follow_branch(q, (s0, y0), -t0, self.window, (), self.tol, self.monitor,
                             Branch(br.id, home.id))
        for p in back.points:
            p.tangent = -p.tangent
        br.points = back.points[:0:-1] + fwd.points
        br.termination = fwd.termination
        br.origin = dict(origin, backward_termination=back.termination)
        return br

    def run(self, start=None) -> BranchForest:
        self.start_branch(start)
        while self.queue:
            self.spawn(self.queue.popleft())
        cands = {W.id: [c.id for c in self.candidates(W.id)] for W in self.allowed}
        return BranchForest(self.branches, self.events, self.folds, self.notes, self.arrivals,
                            self.lattice, cands)


def explore(system: NetworkSystem, lattice: SubspaceLattice, group: SymmetryGroup, window,
            tol: Tolerances = DEFAULT_TOL, start=None) -> BranchForest:
    """Follow the start branch and, recursively, every daughter branch."""
    if not window[0] < window[1]:
        raise ValidationError("window must satisfy s_min < s_max")
    return Explorer(system, lattice, group, window, tol).run(start)
