import math

import numpy as np
import pytest

from conftest import by_labels, diamond, setup
from polybif.bifurcation import (BLIS, Explorer, daughter_candidates, detect_crossings, explore, refine_crossing,
                                 signature)
from polybif.continuation import DEFAULT_TOL, Tolerances, compute_tangent, make_point, newton_correct
from polybif.errors import NoSignChange, QueueOverflow, StartInvalid, ValidationError
from polybif.network import InternalDynamics, NetworkSystem, QuotientSystem, eval_F, jac_x, membership_residual
from polybif.polydiag import contains
from polybif.symmetry import apply

R2 = math.sqrt(2)
DIAG = (1, 1, 1, 1)
W5 = (1, 2, 1, 1)
W5R = (1, 1, 1, 2)
W6 = (1, 2, 1, 2)
W8 = (1, 2, 1, 3)


def _q(system, lattice, labels):
    return QuotientSystem(system, by_labels(lattice, labels))


def _point(q, s, y_guess):
    s, y = newton_correct(q, (s, y_guess), np.eye(q.d + 1)[0], np.concatenate(([s], y_guess)))
    return make_point(q, s, y, compute_tangent(q, (s, y)))


def test_daughter_candidates(diamond_setup):
    _, lat, _ = diamond_setup
    w0 = lat.subspaces[0]
    assert len(daughter_candidates(lat, w0, odd=True)) == 12
    assert [W.id for W in daughter_candidates(lat, lat.subspaces[-1], True)] == [lat.subspaces[-1].id]
    got = {W.labels for W in daughter_candidates(lat, by_labels(lat, DIAG), True)}
    assert {DIAG, W5, W5R, W6, W8, (1, 2, 3, 2), (1, 2, 3, 4)} == got
    sync = daughter_candidates(lat, w0, odd=False)
    assert all(W.basis is None or W.is_synchrony for W in sync)
    assert len(sync) == 8
    dims = [W.dim for W in sync]
    assert dims == sorted(dims)


def test_signature_examples(diamond_setup):
    system, lat, _ = diamond_setup
    q0 = _q(system, lat, (0, 0, 0, 0))
    p = make_point(q0, 1.0, np.zeros(0), np.ones(1))
    quots = [_q(system, lat, lab) for lab in [(1, 2, 3, 4), DIAG, W5]]
    assert list(signature(p, quots).values()) == [3, 0, 1]


def test_detect_crossings(diamond_setup):
    system, lat, _ = diamond_setup
    q0 = _q(system, lat, (0, 0, 0, 0))
    quots = [QuotientSystem(system, W) for W in lat.subspaces if W.basis is not None]

    def pt(s):
        p = make_point(q0, s, np.zeros(0), np.ones(1))
        p.signatures = signature(p, quots)
        return p

    got = dict(detect_crossings(pt(1.9), pt(2.1)))
    e = np.array([1.0, 0.0, -1.0, 0.0])
    expect = {W.id for W in lat.subspaces if W.basis is not None and membership_residual(W, e) < 1e-12}
    assert set(got) == expect
    assert all(v == -1 for v in got.values())
    assert detect_crossings(pt(0.5), pt(0.7)) == []
    got = dict(detect_crossings(pt(3.9), pt(4.1)))
    assert got[lat.subspaces[-1].id] == -2
    assert got[by_labels(lat, W5).id] == -1


def test_refine_trivial_branch(diamond_setup):
    system, lat, _ = diamond_setup
    q0 = _q(system, lat, (0, 0, 0, 0))
    qW = _q(system, lat, (1, 0, -1, 0))
    p1, p2 = (make_point(q0, s, np.zeros(0), np.ones(1)) for s in (1.9, 2.1))
    [(s, y)] = refine_crossing(q0, qW, p1, p2)
    assert abs(s - 2.0) <= 1e-8 and y.size == 0
    with pytest.raises(NoSignChange):
        refine_crossing(q0, qW, p1, make_point(q0, 1.95, np.zeros(0), np.ones(1)))


def test_refine_w1_branch(diamond_setup):
    system, lat, _ = diamond_setup
    qH = _q(system, lat, DIAG)
    p1, p2 = _point(qH, -2.1, np.array([1.4])), _point(qH, -1.9, np.array([1.4]))
    [(s, y)] = refine_crossing(qH, _q(system, lat, W5), p1, p2)
    assert abs(s + 2.0) <= 1e-7
    assert np.allclose(qH.lift(y), R2 * np.ones(4), atol=1e-7)


def test_refine_w5_branch(diamond_setup):
    system, lat, _ = diamond_setup
    qH = _q(system, lat, W5)
    y0 = np.array([1 / R2, -R2])
    p1, p2 = _point(qH, 2.4, y0), _point(qH, 2.6, y0)
    [(s, y)] = refine_crossing(qH, _q(system, lat, W8), p1, p2)
    assert abs(s - 2.5) <= 1e-6
    assert np.allclose(y, y0, atol=1e-6)


# ---------------------------------------------------------------------------
# the diamond forest


def _events(forest, mother_labels):
    lat = forest.lattice
    mid = by_labels(lat, mother_labels).id
    return [e for e in forest.events if e.mother == mid]


def test_trivial_events(diamond_forest):
    lat = diamond_forest.lattice
    ev = _events(diamond_forest, (0, 0, 0, 0))
    assert sorted({round(e.s_star, 8) for e in ev}) == [0.0, 2.0, 4.0]
    at4 = [e for e in ev if abs(e.s_star - 4) < 1e-6]
    assert sorted(lat.get(e.daughter).dim for e in at4) == [1, 1, 2]
    [e5] = [e for e in at4 if lat.get(e.daughter).dim == 2]
    v = np.array([1, -3, 1, 1]) / math.sqrt(12)
    assert min(np.linalg.norm(e5.critical_vector - v), np.linalg.norm(e5.critical_vector + v)) <= 1e-6


def test_w1_events(diamond_forest):
    lat = diamond_forest.lattice
    ev = _events(diamond_forest, DIAG)
    assert sorted({round(e.s_star, 6) for e in ev}) == [-2.0, -1.0]
    at2 = [e for e in ev if abs(e.s_star + 2) < 1e-6]
    kinds = {lat.representative(e.daughter) for e in at2}
    assert kinds == {lat.representative(by_labels(lat, W5).id), by_labels(lat, W6).id}


def test_w5_event(diamond_forest):
    lat = diamond_forest.lattice
    [e] = [e for e in _events(diamond_forest, W5) if e.s_star > 0]
    assert abs(e.s_star - 2.5) <= 1e-6
    assert e.daughter == by_labels(lat, W8).id
    v = np.array([1, 0, 1, -2]) / math.sqrt(6)
    assert min(np.linalg.norm(e.critical_vector - v), np.linalg.norm(e.critical_vector + v)) <= 1e-6


def test_event_invariants(diamond_forest, diamond_setup):
    system, lat, _ = diamond_setup
    for e in diamond_forest.events:
        assert e.crossing_kind == BLIS and e.cond_b_checked is False
        assert np.linalg.norm(eval_F(system, e.s_star, e.x_star)) <= 1e-8 * (1 + np.linalg.norm(e.x_star))
        D = lat.get(e.daughter)
        qD = QuotientSystem(system, D)
        ev = np.linalg.eigvals(jac_x(qD, e.s_star, qD.Bp @ e.x_star))
        order = np.argsort(np.abs(ev.real))
        assert abs(ev[order[0]].real) <= 1e-8
        assert all(abs(ev[k].real) > DEFAULT_TOL.gap_tol for k in order[1:])
        assert abs(np.linalg.norm(e.critical_vector) - 1) <= 1e-12
        assert membership_residual(D, e.critical_vector) <= DEFAULT_TOL.tol_mem
        assert membership_residual(lat.get(e.mother), e.critical_vector) >= 0.1
        assert 1 <= len(e.spawn_dirs) <= 2


def test_daughter_minimality(diamond_forest):
    lat = diamond_forest.lattice
    for e in diamond_forest.events:
        D = lat.get(e.daughter)
        for W in daughter_candidates(lat, e.mother, odd=True):
            if W.dim < D.dim or (contains(D, W) and W != D):
                assert membership_residual(W, e.critical_vector) > DEFAULT_TOL.tol_mem, (e.id, W.id)


def test_orbit_completeness(diamond_forest, diamond_setup):
    system, _, G = diamond_setup
    for b in diamond_forest.branches:
        for p in b.points[:: max(1, len(b.points) // 10)]:
            for g in G.elements:
                gx = apply(g, p.x)
                assert np.linalg.norm(eval_F(system, p.s, gx)) <= 1e-8 * (1 + np.linalg.norm(gx))


def test_branch_points_valid(diamond_forest, diamond_setup):
    system, lat, _ = diamond_setup
    for b in diamond_forest.branches:
        home = lat.get(b.subspace)
        assert b.termination in ("window_exit", "closed_loop", "hit_known_event", "max_steps", "newton_failure")
        for p in b.points:
            assert np.linalg.norm(eval_F(system, p.s, p.x)) <= 1e-8 * (1 + np.linalg.norm(p.x))
            assert membership_residual(home, p.x) <= 1e-9 * (1 + np.linalg.norm(p.x))
            assert -3 - 1e-9 <= p.s <= 5 + 1e-9


def test_every_branch_has_origin(diamond_forest):
    ids = {e.id for e in diamond_forest.events}
    for b in diamond_forest.branches[1:]:
        assert b.origin["event"] in ids


def test_determinism(diamond_forest, diamond_setup):
    again = explore(*diamond_setup, (-3.0, 5.0))
    assert [(e.id, e.s_star, e.daughter) for e in again.events] == \
        [(e.id, e.s_star, e.daughter) for e in diamond_forest.events]
    assert [(b.id, len(b.points)) for b in again.branches] == [(b.id, len(b.points)) for b in diamond_forest.branches]


# ---------------------------------------------------------------------------
# one cell and degenerate cases


def test_pitchfork_one_cell():
    forest = explore(*setup([[0]]), (-1.0, 1.0))
    [e] = forest.events
    assert abs(e.s_star) <= 1e-9
    assert len(e.spawn_dirs) == 1
    [_, d] = forest.branches
    assert max(abs(p.s + p.x[0] ** 2) for p in d.points) <= 1e-8


def test_fold_one_cell_has_no_events():
    system, lat, G = setup([[0]], InternalDynamics("custom", terms=((1, 1, 0), (-1, 0, 2))))
    forest = explore(system, lat, G, (-1.0, 1.0), start=(0.5, [0.7]))
    assert forest.events == []
    [fold] = forest.folds
    assert abs(fold.s) <= 1e-6 and abs(fold.x[0]) <= 1e-3
    assert len(forest.branches) == 1


def test_transcritical_seeds_both_ways():
    system, lat, G = setup([[0]], InternalDynamics("quad_cubic", alpha=1))
    forest = explore(system, lat, G, (-1.0, 1.0))
    [e] = forest.events
    assert len(e.spawn_dirs) == 2
    assert len(forest.folds) == 1 and abs(forest.folds[0].s + 0.25) <= 1e-6


def test_window_without_events():
    forest = explore(*setup(diamond()), (0.5, 1.5))
    assert forest.events == [] and len(forest.branches) == 1
    assert forest.branches[0].termination == "window_exit"


def test_hopf_is_noted_only():
    forest = explore(*setup(np.array([[0, 1], [-1, 0]])), (-1.0, 1.0))
    assert forest.events == []
    assert [n.kind for n in forest.notes] == ["hopf"]


def test_explore_errors():
    with pytest.raises(ValidationError):
        explore(*setup(diamond()), (1.0, 1.0))
    with pytest.raises(QueueOverflow):
        explore(*setup(diamond()), (-3.0, 5.0), Tolerances(max_branches=3))
    system, lat, G = setup([[0]], InternalDynamics("custom", terms=((1, 1, 1), (1, 0, 0))))
    with pytest.raises(StartInvalid):
        explore(system, lat, G, (-1.0, 1.0))
