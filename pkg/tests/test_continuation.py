import math

import numpy as np
import pytest

from conftest import diamond
from polybif.continuation import (CLOSED_LOOP, DEFAULT_TOL, HIT_KNOWN_EVENT, MAX_STEPS, NEWTON_FAILURE, WINDOW_EXIT,
                                  Tolerances, compute_tangent, follow_branch, newton_correct, segment_distance,
                                  sweep_trivial)
from polybif.errors import NoConvergence, SingularJacobian, StartInvalid, TangentRankDeficient, ValidationError
from polybif.network import InternalDynamics, NetworkSystem, QuotientSystem, eval_F_B, jac_s, jac_x
from polybif.polydiag import full, subspace_from_labels, trivial

S_AXIS = np.array([1.0, 0.0])


def one_cell(f=None):
    return QuotientSystem(NetworkSystem([[0]], f or InternalDynamics()), full(1))


def fold_cell():
    return one_cell(InternalDynamics("custom", terms=((1, 1, 0), (-1, 0, 2))))


def circle_cell():
    return one_cell(InternalDynamics("custom", terms=((1, 2, 0), (1, 0, 2), (-1, 0, 0))))


def w1():
    return QuotientSystem(NetworkSystem(diamond()), subspace_from_labels("W1", (1, 1, 1, 1)))


def test_newton_examples():
    s, y = newton_correct(one_cell(), (-1.0, [1.05]), S_AXIS, [-1.0, 1.05])
    assert s == -1.0 and abs(y[0] - 1.0) <= 1e-12
    s, y = newton_correct(w1(), (-4.0, [2.1]), S_AXIS, [-4.0, 2.1])
    assert s == -4.0 and abs(y[0] - 2.0) <= 1e-12
    s, y = newton_correct(w1(), (-4.0, [2.0]), S_AXIS, [-4.0, 2.0])
    assert (s, y[0]) == (-4.0, 2.0)


def test_newton_failures():
    # s = 1: s y + y^3 = 0 has only y = 0 on the line, and the cubic is stiff far out
    with pytest.raises(NoConvergence):
        newton_correct(one_cell(), (1.0, [1e6]), S_AXIS, [1.0, 1e6], max_iter=3)
    with pytest.raises(SingularJacobian):
        newton_correct(one_cell(), (0.0, [0.0]), [0.0, 1.0], [0.0, 1e-3])


def test_tangent_examples():
    q0 = QuotientSystem(NetworkSystem(diamond()), trivial(4))
    assert compute_tangent(q0, (1.3, np.zeros(0))).tolist() == [1.0]
    qf = QuotientSystem(NetworkSystem(diamond()), full(4))
    t = compute_tangent(qf, (1.3, np.zeros(4)))
    assert np.allclose(t, [1, 0, 0, 0, 0], atol=1e-15)
    t = compute_tangent(w1(), (-4.0, [2.0]))
    assert np.allclose(t, np.array([1, -0.25]) / math.hypot(1, 0.25), atol=1e-14)
    assert np.allclose(compute_tangent(w1(), (-4.0, [2.0]), prev=[-1, 0]), -t)
    t = compute_tangent(fold_cell(), (0.0, [0.0]))
    assert abs(t[0]) <= 1e-15 and abs(abs(t[1]) - 1) <= 1e-15


def test_tangent_rank_deficient():
    with pytest.raises(TangentRankDeficient):
        compute_tangent(one_cell(), (0.0, [0.0]))


def test_tangent_is_null_vector():
    q = QuotientSystem(NetworkSystem(diamond()), subspace_from_labels("W", (1, 2, 1, 1)))
    rng = np.random.default_rng(1)
    for _ in range(20):
        s, y = rng.normal(size=1)[0], rng.normal(size=2)
        t = compute_tangent(q, (s, y))
        A = np.column_stack((jac_s(q, s, y), jac_x(q, s, y)))
        assert abs(np.linalg.norm(t) - 1) <= 1e-14
        assert np.linalg.norm(A @ t) <= 1e-8


def _check_branch(q, br, tol=DEFAULT_TOL):
    for p in br.points:
        assert np.linalg.norm(eval_F_B(q, p.s, p.y)) <= tol.tol_newton * (1 + np.linalg.norm(p.y))
        assert abs(np.linalg.norm(p.tangent) - 1) <= 1e-12
        assert np.allclose(p.x, q.lift(p.y))
    for a, b in zip(br.points, br.points[1:]):
        assert a.tangent @ b.tangent > 0
        assert np.linalg.norm(b.z - a.z) <= 2 * tol.delta_max


def test_trivial_sweep():
    q0 = QuotientSystem(NetworkSystem(diamond()), trivial(4))
    br = sweep_trivial(q0, (-3.0, 5.0))
    assert br.termination == WINDOW_EXIT
    assert br.points[0].s == -3.0 and br.points[-1].s == 5.0
    assert all(np.array_equal(p.x, np.zeros(4)) for p in br.points)
    assert np.all(np.diff([p.s for p in br.points]) <= DEFAULT_TOL.delta_max + 1e-12)


def test_follow_w1_branch():
    q = w1()
    br = follow_branch(q, (-0.01, [0.1]), [-1.0, 0.0], (-3.0, 5.0))
    assert br.termination == WINDOW_EXIT
    assert br.points[-1].s == -3.0
    assert len(br.points) > 20
    assert max(abs(p.s + p.y[0] ** 2) for p in br.points) <= 1e-8
    _check_branch(q, br)


def test_fold_is_traversed():
    q = fold_cell()
    br = follow_branch(q, (0.25, [0.5]), [-1.0, -1.0], (-1.0, 1.0))
    assert br.termination == WINDOW_EXIT
    ts = np.array([p.tangent[0] for p in br.points])
    assert np.count_nonzero(np.diff(np.sign(ts)) != 0) == 1
    ys = [p.y[0] for p in br.points]
    assert ys[0] > 0 and ys[-1] < 0
    _check_branch(q, br)


def test_closed_loop():
    q = circle_cell()
    br = follow_branch(q, (0.0, [1.0]), [1.0, 0.0], (-2.0, 2.0))
    assert br.termination == CLOSED_LOOP
    assert max(abs(p.s**2 + p.y[0] ** 2 - 1) for p in br.points) <= 1e-9
    _check_branch(q, br)


def test_registry_hit():
    q = w1()
    x_site = math.sqrt(2) * np.ones(4)
    br = follow_branch(q, (-0.5, [math.sqrt(0.5)]), [-1.0, 0.0], (-3.0, 5.0), registry=[(-2.0, x_site)])
    assert br.termination == HIT_KNOWN_EVENT
    assert abs(br.points[-1].s + 2.0) <= 0.2


def test_max_steps_and_failure():
    br = follow_branch(w1(), (-0.5, [math.sqrt(0.5)]), [-1.0, 0.0], (-3.0, 5.0), tol=Tolerances(max_steps=5))
    assert br.termination == MAX_STEPS and len(br.points) == 6
    # an impossible corrector budget fails at delta_min
    br = follow_branch(w1(), (-0.5, [math.sqrt(0.5)]), [-1.0, 0.0], (-3.0, 5.0),
                       tol=Tolerances(max_iter=1, delta_min=1e-3))
    assert br.termination == NEWTON_FAILURE


def test_monitor_can_stop():
    br = follow_branch(w1(), (-0.5, [math.sqrt(0.5)]), [-1.0, 0.0], (-3.0, 5.0),
                       monitor=lambda b, q: "stop" if len(b.points) == 3 else None)
    assert br.termination == "stop" and len(br.points) == 3


def test_start_invalid():
    with pytest.raises(StartInvalid):
        follow_branch(w1(), (-1.0, [3.0]), [1.0, 0.0], (-3.0, 5.0))


def test_retrace_reproduces_branch():
    q = w1()
    fwd = follow_branch(q, (-0.04, [0.2]), [-1.0, 0.0], (-3.0, -0.04))
    end = fwd.points[-1]
    back = follow_branch(q, (end.s, end.y), -end.tangent, (-3.0, -0.04))
    assert back.termination == WINDOW_EXIT
    assert abs(back.points[-1].s + 0.04) <= 10 * DEFAULT_TOL.tol_newton
    assert abs(back.points[-1].y[0] - 0.2) <= 10 * DEFAULT_TOL.tol_newton
    # every retraced point is on the forward curve
    for p in back.points:
        assert abs(p.y[0] - math.sqrt(-p.s)) <= 10 * DEFAULT_TOL.tol_newton


def test_segment_distance():
    a, b = np.zeros(2), np.array([2.0, 0.0])
    assert segment_distance(np.array([1.0, 1.0]), a, b) == 1.0
    assert segment_distance(np.array([3.0, 0.0]), a, b) == 1.0
    assert segment_distance(np.array([1.0, 0.0]), a, a) == 1.0


def test_tolerance_check():
    DEFAULT_TOL.check()
    with pytest.raises(ValidationError):
        Tolerances(delta_min=0.5).check()
    with pytest.raises(ValidationError):
        Tolerances(tol_newton=0).check()
    with pytest.raises(ValidationError):
        Tolerances(max_iter=0).check()
