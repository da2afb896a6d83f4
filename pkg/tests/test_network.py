import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import by_labels, diamond, k3, p3, random_matrices
from polybif.errors import InvalidQuotient, NonFinite, NotInSubspace, NotInvariant, ParseError, ValidationError
from polybif.network import (InternalDynamics, NetworkSystem, QuotientSystem, eval_F, eval_F_B, jac_s, jac_x, lift,
                             project, quotient_matrix, read_matrix, write_matrix)
from polybif.polydiag import enumerate_invariant, from_labels, subspace_from_labels, trivial, validate
from polybif.symmetry import apply, find_automorphisms

F = Fraction
R2 = math.sqrt(2)
EX_M = [[0, 1, 1, 1], [1, 0, 0, -1], [1, 0, 0, 1], [1, -1, 1, 0]]
FAMILIES = [InternalDynamics(), InternalDynamics("quad_cubic", alpha=0.7), InternalDynamics("quad_cubic"),
            InternalDynamics("quintic", beta=0.3), InternalDynamics("custom", terms=((1, 2, 1), (-1, 0, 1), (1, 0, 3)))]


def test_quotient_matrix_examples():
    assert quotient_matrix(EX_M, validate([[1, 0], [0, 1], [0, 0], [-1, 0]])).tolist() == [[-1, 1], [2, 0]]
    assert quotient_matrix(diamond(), from_labels((1, 2, 1, 1))).tolist() == [[1, -1], [-3, 3]]
    assert quotient_matrix(diamond(), from_labels((1, 1, 1, 1))).tolist() == [[0]]
    assert all(type(v) is F for v in quotient_matrix(diamond(), from_labels((1, 2, 1, 3))).ravel())
    with pytest.raises(NotInvariant):
        quotient_matrix(diamond(), from_labels((1, 1, 2, 2)))


def test_families():
    assert InternalDynamics().odd
    assert InternalDynamics("quintic", beta=2).odd
    assert InternalDynamics("quad_cubic").odd
    assert not InternalDynamics("quad_cubic", alpha=1).odd
    assert not InternalDynamics("custom", terms=((1, 1, 1), (1, 0, 0))).vanishes_at_zero
    with pytest.raises(ValidationError):
        InternalDynamics("sine")
    with pytest.raises(ValidationError):
        InternalDynamics("custom", terms=((1, 3, 1),))
    with pytest.raises(ValidationError):
        InternalDynamics("custom")


@pytest.mark.parametrize("f", FAMILIES, ids=lambda f: f.family)
def test_odd_flag_matches_values(f):
    rng = np.random.default_rng(0)
    s, x = rng.normal(size=2)
    if f.odd:
        assert abs(f.f(s, -x) + f.f(s, x)) <= 1e-12
    else:
        assert abs(f.f(s, -x) + f.f(s, x)) > 1e-12


def test_eval_F_examples():
    sysd = NetworkSystem(diamond())
    assert np.array_equal(eval_F(sysd, 3.7, np.zeros(4)), np.zeros(4))
    assert np.allclose(eval_F(sysd, -1.0, np.ones(4)), 0.0, atol=0)
    assert eval_F(NetworkSystem([[0]]), -1.0, [1.0]).tolist() == [0.0]
    with pytest.raises(NonFinite):
        eval_F(sysd, float("nan"), np.zeros(4))
    with pytest.raises(NonFinite):
        eval_F(sysd, 0.0, [0, 0, float("inf"), 0])


def test_eval_F_B_examples():
    sysd = NetworkSystem(diamond())
    q5 = QuotientSystem(sysd, subspace_from_labels("W", (1, 2, 1, 1)))
    assert np.linalg.norm(eval_F_B(q5, 2.5, [1 / R2, -R2])) <= 1e-12
    q1 = QuotientSystem(sysd, subspace_from_labels("W", (1, 1, 1, 1)))
    for s in (-0.5, -2.0, -4.0):
        assert abs(eval_F_B(q1, s, [math.sqrt(-s)])[0]) <= 1e-12
    assert eval_F_B(q1, 0.3, [0.5])[0] == pytest.approx(0.3 * 0.5 + 0.125, abs=1e-15)
    q = QuotientSystem(sysd, subspace_from_labels("W", (1, 2, -1, -2)))
    assert np.array_equal(eval_F_B(q, 1.2, [0.0, 0.0]), [0.0, 0.0])


def test_jac_x_examples():
    sysd = NetworkSystem(diamond())
    q5 = QuotientSystem(sysd, subspace_from_labels("W", (1, 2, 1, 1)))
    assert np.allclose(jac_x(q5, 2.5, [1 / R2, -R2]), [[3, 1], [3, 5.5]], atol=1e-12)
    q8 = QuotientSystem(sysd, subspace_from_labels("W", (1, 2, 1, 3)))
    y8 = q8.project([1 / R2, -R2, 1 / R2, 1 / R2])
    assert np.allclose(jac_x(q8, 2.5, y8), [[2, 1, 1], [2, 5.5, 1], [2, 1, 1]], atol=1e-12)
    L = np.array(diamond(), dtype=float)
    for f in FAMILIES[:4]:
        assert np.array_equal(jac_x(NetworkSystem(diamond(), f), 1.5, np.zeros(4)), 1.5 * np.eye(4) - L)


def test_jac_s_examples():
    sysd = NetworkSystem(np.eye(2, dtype=int))
    assert jac_s(sysd, 0.4, [2, -1]).tolist() == [2, -1]
    assert jac_s(sysd, 0.4, [0, 0]).tolist() == [0, 0]
    sys5 = NetworkSystem([[1]], InternalDynamics("quintic", beta=1))
    assert jac_s(sys5, -3, [3]).tolist() == [3]


def test_lift_project_examples():
    B = subspace_from_labels("W", (1, 2, 0, -1))
    assert lift(B, [3.0, 5.0]).tolist() == [3.0, 5.0, 0.0, -3.0]
    assert lift(trivial(4), np.zeros(0)).tolist() == [0.0] * 4
    assert lift(subspace_from_labels("W", (1, 2, 1, 3)), [1, 0, -2]).tolist() == [1, 0, 1, -2]
    assert project(B, [3.0, 5.0, 0.0, -3.0]).tolist() == [3.0, 5.0]
    with pytest.raises(NotInSubspace):
        project(B, [1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        lift(B, [1.0])


def test_invalid_quotients():
    sysq = NetworkSystem(diamond(), InternalDynamics("quad_cubic", alpha=1))
    with pytest.raises(InvalidQuotient):
        QuotientSystem(sysq, subspace_from_labels("W", (1, 0, -1, 0)))
    QuotientSystem(sysq, subspace_from_labels("W", (1, 2, 1, 1)))
    sys1 = NetworkSystem(diamond(), InternalDynamics("custom", terms=((1, 1, 1), (1, 0, 0))))
    with pytest.raises(InvalidQuotient):
        QuotientSystem(sys1, trivial(4))
    with pytest.raises(ValidationError):
        NetworkSystem([[1, 2, 3]])


def test_matrix_file_roundtrip():
    M = np.array([[F(1, 2), -1], [0, F(-3, 7)]], dtype=object)
    text = write_matrix(M)
    assert text == "2\n1/2 -1\n0 -3/7\n"
    assert read_matrix(text).tolist() == M.tolist()
    assert read_matrix("# diamond\n1\n 5 # one cell\n").tolist() == [[5]]


@pytest.mark.parametrize("text, line", [("", None), ("x\n", 1), ("2\n1 2\n", None), ("2\n1 2\n3\n", 3),
                                        ("2\n1 2\n3 q\n", 3), ("0\n", 1), ("1\n1/0\n", 2)])
def test_matrix_file_errors(text, line):
    with pytest.raises(ParseError) as info:
        read_matrix(text, "m.mat")
    assert info.value.line == line


# ---------------------------------------------------------------------------
# properties

CASES = []
for M in [diamond(), k3(), p3(), EX_M] + random_matrices()[:10]:
    for f in (FAMILIES[0], FAMILIES[1]):
        system = NetworkSystem(M, f)
        for sub in enumerate_invariant(M):
            if sub.basis is not None and (sub.is_synchrony or f.odd):
                CASES.append(QuotientSystem(system, sub))

reals = st.floats(-2, 2, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(CASES), reals, st.lists(reals, min_size=5, max_size=5))
def test_restriction_identity(q, s, ys):
    y = np.array(ys[:q.d])
    x = q.lift(y)
    scale = 1 + np.linalg.norm(y) ** 3
    Fx = eval_F(q.parent, s, x)
    assert np.linalg.norm(q.Bp @ Fx - eval_F_B(q, s, y)) <= 1e-12 * scale
    # flow invariance: F(s, By) = B F_B(s, y)
    assert np.linalg.norm(Fx - q.B @ (q.Bp @ Fx)) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(CASES), reals, st.lists(reals, min_size=5, max_size=5))
def test_project_lift_identity(q, s, ys):
    y = np.array(ys[:q.d])
    assert np.allclose(q.project(q.lift(y)), y, rtol=0, atol=1e-15)


def _fd(fun, z, eps=1e-6):
    cols = []
    for i in range(len(z)):
        e = np.zeros(len(z))
        e[i] = eps
        cols.append((fun(z + e) - fun(z - e)) / (2 * eps))
    return np.array(cols).T


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(CASES), reals, st.lists(reals, min_size=5, max_size=5))
def test_jacobians_match_finite_differences(q, s, ys):
    y = np.array(ys[:q.d])
    x = q.lift(y)
    evals = ((q.parent, x, lambda s_, z: eval_F(q.parent, s_, z)), (q, y, lambda s_, z: eval_F_B(q, s_, z)))
    for sysx, state, fun in evals:
        J = jac_x(sysx, s, state)
        num = _fd(lambda z: fun(s, z), state)
        assert np.linalg.norm(J - num) <= 1e-6 * (1 + np.linalg.norm(J))
        Fs = jac_s(sysx, s, state)
        num_s = (fun(s + 1e-6, state) - fun(s - 1e-6, state)) / 2e-6
        assert np.linalg.norm(Fs - num_s) <= 1e-6 * (1 + np.linalg.norm(Fs))


EQUIV = [(NetworkSystem(M, f), find_automorphisms(M)) for M in [diamond(), k3(), p3()] + random_matrices()[:6]
         for f in (FAMILIES[0], FAMILIES[1])]


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(EQUIV), reals, st.lists(reals, min_size=5, max_size=5))
def test_equivariance(case, s, xs):
    system, perms = case
    x = np.array(xs[:system.n])
    Fx = eval_F(system, s, x)
    for p in perms:
        assert np.allclose(eval_F(system, s, apply((p, 1), x)), apply((p, 1), Fx), rtol=0, atol=1e-12)
    if system.f.odd:
        assert np.allclose(eval_F(system, s, -x), -Fx, rtol=0, atol=1e-12)
