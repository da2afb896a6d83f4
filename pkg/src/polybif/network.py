"""Coupled cell vector field ``F(s, x)_i = f(s, x_i) + h (M x)_i`` and its quotients."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidQuotient, NonFinite, NotInSubspace, NotInvariant, ParseError, ValidationError
from .polydiag import PolyBasisMatrix, Subspace, is_invariant, pseudoinverse
from .rational import fmt, frac, to_float, to_rational

FAMILIES = ("cubic_soft", "quad_cubic", "quintic", "custom")
MAX_S_POWER = 2
MAX_X_POWER = 5
TOL_MEM = 1e-9


@dataclass(frozen=True)
class InternalDynamics:
    """Polynomial internal dynamics ``f(s, x) = sum c * s**p * x**k``.

    ``terms`` holds ``(c, p, k)`` triples. The three named families are
    stored in the same form; ``custom`` accepts any table with ``p <= 2`` and
    ``k <= 5``.
    """

    family: str = "cubic_soft"
    alpha: float = 0.0
    beta: float = 0.0
    terms: tuple[tuple[float, int, int], ...] = field(default=())

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown dynamics family {self.family!r}")
        if self.family == "cubic_soft":
            terms = ((1.0, 1, 1), (1.0, 0, 3))
        elif self.family == "quad_cubic":
            terms = ((1.0, 1, 1), (float(self.alpha), 0, 2), (-1.0, 0, 3))
        elif self.family == "quintic":
            terms = ((1.0, 1, 1), (1.0, 0, 3), (-float(self.beta), 0, 5))
        else:
            if not self.terms:
                raise ValidationError("custom dynamics needs at least one term")
            terms = tuple((float(c), int(p), int(k)) for c, p, k in self.terms)
            for c, p, k in terms:
                if not (0 <= p <= MAX_S_POWER and 0 <= k <= MAX_X_POWER):
                    raise ValidationError(f"term s^{p} x^{k} outside the supported table")
        object.__setattr__(self, "terms", tuple(t for t in terms if t[0] != 0.0))

    @property
    def odd(self) -> bool:
        return all(k % 2 == 1 for _, _, k in self.terms)

    @property
    def vanishes_at_zero(self) -> bool:
        """``f(s, 0) = 0`` for every s."""
        return all(k > 0 for _, _, k in self.terms)

    def f(self, s: float, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, p, k in self.terms:
            out = out + c * s**p * x**k
        return out

    def f_x(self, s: float, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, p, k in self.terms:
            if k:
                out = out + c * k * s**p * x ** (k - 1)
        return out

    def f_s(self, s: float, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, p, k in self.terms:
            if p:
                out = out + c * p * s ** (p - 1) * x**k
        return out


@dataclass(frozen=True, eq=False)
class NetworkSystem:
    M: np.ndarray  # rational object array
    f: InternalDynamics = field(default_factory=InternalDynamics)
    h: float = -1.0

    def __post_init__(self):
        R = to_rational(self.M)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValidationError(f"M must be square, got shape {R.shape}")
        object.__setattr__(self, "M", R)
        object.__setattr__(self, "Mf", to_float(R))

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def quotient(self, sub: Subspace) -> "QuotientSystem":
        return QuotientSystem(self, sub)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(np.asarray(a, dtype=float))):
            raise NonFinite("non-finite input")


def quotient_matrix(M, B: PolyBasisMatrix) -> np.ndarray:
    """Exact ``B^+ M B`` (adjacency matrix of the weighted quotient digraph)."""
    if not is_invariant(M, B):
        raise NotInvariant("col(B) is not M-invariant")
    R = to_rational(M)
    return pseudoinverse(B).dot(R).dot(to_rational(B.array))


def eval_F(sys: NetworkSystem, s: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_finite(s, x)
    return sys.f.f(s, x) + sys.h * (sys.Mf @ x)


def jac_x(sys, s: float, state) -> np.ndarray:
    """``diag(f_x(s, state)) + h * M`` (or ``h * Q`` for a quotient)."""
    state = np.asarray(state, dtype=float)
    A = sys.Mf if isinstance(sys, NetworkSystem) else sys.Qf
    return np.diag(sys.f.f_x(s, state)) + sys.h * A


def jac_s(sys, s: float, state) -> np.ndarray:
    return sys.f.f_s(s, np.asarray(state, dtype=float))


@dataclass(frozen=True, eq=False)
class QuotientSystem:
    """The restriction of a network to an invariant subspace, in its coordinates."""

    parent: NetworkSystem
    subspace: Subspace

    def __post_init__(self):
        sub = self.subspace
        f = self.parent.f
        if sub.n != self.parent.n:
            raise ValidationError(f"{sub.id} lives in R^{sub.n}, network has n = {self.parent.n}")
        if sub.basis is None:
            if not f.vanishes_at_zero:
                raise InvalidQuotient(f"{sub.id}: trivial subspace is not invariant since f(s, 0) != 0")
            Q = np.empty((0, 0), dtype=object)
        else:
            if not sub.is_synchrony and not f.odd:
                raise InvalidQuotient(f"{sub.id}: anti-synchrony subspace requires odd internal dynamics")
            Q = quotient_matrix(self.parent.M, sub.basis)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "Qf", to_float(Q) if Q.size else np.zeros((0, 0)))
        object.__setattr__(self, "B", sub.matrix())
        object.__setattr__(self, "Bp", sub.pinv())

    @property
    def f(self) -> InternalDynamics:
        return self.parent.f

    @property
    def h(self) -> float:
        return self.parent.h

    @property
    def d(self) -> int:
        return self.subspace.dim

    def lift(self, y) -> np.ndarray:
        return lift(self.subspace, y)

    def project(self, x) -> np.ndarray:
        return project(self.subspace, x)


def eval_F_B(q: QuotientSystem, s: float, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    _check_finite(s, y)
    return q.f.f(s, y) + q.h * (q.Qf @ y)


def lift(sub: Subspace, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (sub.dim,):
        raise ValidationError(f"{sub.id}: expected {sub.dim} coordinates, got shape {y.shape}")
    return sub.matrix() @ y


def membership_residual(sub: Subspace, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - sub.matrix() @ (sub.pinv() @ x)))


def project(sub: Subspace, x, tol: float = TOL_MEM) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sub.n,):
        raise ValidationError(f"expected a vector of length {sub.n}, got shape {x.shape}")
    res = membership_residual(sub, x)
    if res > tol * (1.0 + np.linalg.norm(x)):
        raise NotInSubspace(f"vector is {res:.3e} away from {sub.id}")
    return sub.pinv() @ x


# ---------------------------------------------------------------------------
# matrix files and helpers


def laplacian(n: int, edges: Sequence[tuple[int, int]]) -> np.ndarray:
    """Graph Laplacian with 1-based edge list, as a rational object array."""
    L = np.array([[Fraction(0)] * n for _ in range(n)], dtype=object)
    for a, b in edges:
        i, j = a - 1, b - 1
        L[i, j] -= 1
        L[j, i] -= 1
        L[i, i] += 1
        L[j, j] += 1
    return L


def read_matrix(text: str, path=None) -> np.ndarray:
    lines = [(k, ln.split("#", 1)[0].strip()) for k, ln in enumerate(text.splitlines(), start=1)]
    lines = [(k, ln) for k, ln in lines if ln]
    if not lines:
        raise ParseError("empty matrix file", path)
    k0, first = lines[0]
    try:
        n = int(first)
    except ValueError:
        raise ParseError(f"first line must be the dimension, got {first!r}", path, k0, 1) from None
    if n <= 0:
        raise ParseError("dimension must be positive", path, k0, 1)
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"expected {n} matrix rows, found {len(rows)}", path)
    out = np.empty((n, n), dtype=object)
    for i, (k, ln) in enumerate(rows):
        toks = ln.split()
        if len(toks) != n:
            raise ParseError(f"expected {n} entries, found {len(toks)}", path, k)
        col = 1
        for j, tok in enumerate(toks):
            col = ln.find(tok, col - 1) + 1
            try:
                out[i, j] = frac(tok)
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"not a rational number: {tok!r}", path, k, col) from None
    return out


def write_matrix(M) -> str:
    R = to_rational(M)
    n = R.shape[0]
    return f"{n}\n" + "".join(" ".join(fmt(v) for v in row) + "\n" for row in R)
