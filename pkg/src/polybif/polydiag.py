"""Polydiagonal subspaces represented by canonical {-1, 0, 1} basis matrices.

A polydiagonal subspace of R^n is cut out by equations ``x_i = x_j``,
``x_i = -x_j`` and ``x_i = 0``. Every nontrivial one is the column space of a
unique *basis matrix* ``B`` (n x d) with entries in {-1, 0, 1} such that

1. ``rank(B) = d``,
2. each row has at most one non-zero entry,
3. ``B^T`` is in reduced row-echelon form.

Internally a basis matrix is also handled as a *label* tuple: one integer per
row, ``0`` for a zero row and ``+c``/``-c`` for an entry +1/-1 in column ``c``
(1-based). Everything in this module is exact; floats only enter in
:func:`canonicalize` when the spanning vectors themselves are floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import (
    BadEntry,
    DimensionMismatch,
    InconsistentAmbient,
    NotEchelon,
    NotPolydiagonal,
    ParseError,
    RankDeficient,
    RowConflict,
    TooLarge,
    UnknownSubspace,
    ValidationError,
)
from .rational import integer_scaled, is_exact, rref, to_rational

TRIVIAL = "trivial"
SYNCHRONY = "synchrony"
ANTISYNCHRONY = "anti-synchrony"
FULL = "full"
KINDS = (TRIVIAL, SYNCHRONY, ANTISYNCHRONY, FULL)

N_MAX = 8
TOL_INV = 1e-10


@dataclass(frozen=True)
class PolyBasisMatrix:
    """Validated basis matrix; construct through :func:`validate`."""

    entries: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def d(self) -> int:
        return len(self.entries[0])

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.n, self.d)

    @property
    def labels(self) -> tuple[int, ...]:
        return labels_of(self.entries)

    @property
    def kind(self) -> str:
        if all(1 in row for row in self.entries):
            return SYNCHRONY
        return ANTISYNCHRONY

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.entries for v in row)


def labels_of(entries) -> tuple[int, ...]:
    labels = []
    for row in entries:
        lab = 0
        for c, v in enumerate(row):
            if v:
                lab = (c + 1) * int(v)
        labels.append(lab)
    return tuple(labels)


def entries_from_labels(labels: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    d = max((abs(v) for v in labels), default=0)
    rows = []
    for lab in labels:
        row = [0] * d
        if lab:
            row[abs(lab) - 1] = 1 if lab > 0 else -1
        rows.append(tuple(row))
    return tuple(rows)


def normalize_labels(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel columns by first appearance and make each first entry +1.

    Turns any matrix with at most one +-1 per row and no zero column into the
    labels of its canonical basis matrix.
    """
    colmap: dict[int, int] = {}
    flip: dict[int, int] = {}
    out = []
    for lab in labels:
        if lab == 0:
            out.append(0)
            continue
        c = abs(lab)
        if c not in colmap:
            colmap[c] = len(colmap) + 1
            flip[c] = 1 if lab > 0 else -1
        sgn = (1 if lab > 0 else -1) * flip[c]
        out.append(sgn * colmap[c])
    return tuple(out)


def validate(B) -> PolyBasisMatrix:
    """Check the three basis-matrix conditions and return the typed value."""
    arr = np.asarray(B, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise RankDeficient(f"basis matrix must be a non-empty 2-D array, got shape {arr.shape}")
    n, d = arr.shape
    rows = []
    for i in range(n):
        row = []
        for j in range(d):
            v = arr[i, j]
            if isinstance(v, (float, np.floating)) and float(v).is_integer():
                v = int(v)
            if isinstance(v, Fraction) and v.denominator == 1:
                v = int(v)
            if not isinstance(v, (int, np.integer)) or int(v) not in (-1, 0, 1):
                raise BadEntry(f"entry ({i + 1}, {j + 1}) = {v!r} is not in {{-1, 0, 1}}")
            row.append(int(v))
        if sum(1 for v in row if v) > 1:
            raise RowConflict(f"row {i + 1} has more than one non-zero entry")
        rows.append(tuple(row))
    if d > n:
        raise RankDeficient(f"{n}x{d} matrix cannot have rank {d}")
    for j in range(d):
        if not any(rows[i][j] for i in range(n)):
            raise RankDeficient(f"column {j + 1} is zero")
    prev = -1
    for j in range(d):
        first = next(i for i in range(n) if rows[i][j])
        if rows[first][j] != 1:
            raise NotEchelon(f"first non-zero entry of column {j + 1} is -1")
        if first <= prev:
            raise NotEchelon(f"pivot of column {j + 1} is not below the pivot of column {j}")
        prev = first
    return PolyBasisMatrix(tuple(rows))


def from_labels(labels: Sequence[int]) -> PolyBasisMatrix:
    return validate(entries_from_labels(labels))


def canonicalize(vectors, tol: float = 1e-8) -> PolyBasisMatrix:
    """Canonical basis matrix of the span of ``vectors`` (a sequence of length-n vectors).

    Integer/Fraction input is handled exactly; float input uses an
    orthonormal basis and compares its rows to within ``tol``.
    """
    S = np.asarray(vectors, dtype=object)
    if S.ndim == 1:
        S = S.reshape(1, -1)
    n = S.shape[1]
    if is_exact(S):
        R, _ = rref(S)
        r = R.shape[0]
        coords = [tuple(R[:, i]) for i in range(n)]
        zero = [all(v == 0 for v in c) for c in coords]

        def keyed(c):
            lead = next(v for v in c if v != 0)
            sgn = 1 if lead > 0 else -1
            return sgn, tuple(sgn * v for v in c)

        classes: dict[tuple, int] = {}
        class_sign: dict[int, int] = {}
        labels = []
        for i in range(n):
            if zero[i]:
                labels.append(0)
                continue
            sgn, key = keyed(coords[i])
            if key not in classes:
                classes[key] = len(classes) + 1
                class_sign[classes[key]] = sgn
            c = classes[key]
            labels.append(c if sgn == class_sign[c] else -c)
    else:
        A = np.array(S, dtype=float)
        if not np.all(np.isfinite(A)):
            raise NotPolydiagonal("non-finite spanning vector")
        _, sv, vt = np.linalg.svd(A)
        scale = max(1.0, sv[0] if sv.size else 0.0)
        r = int(np.sum(sv > tol * scale))
        Q = vt[:r].T
        reps: list[np.ndarray] = []
        labels = []
        for i in range(n):
            q = Q[i]
            if np.linalg.norm(q) <= tol:
                labels.append(0)
                continue
            for c, rep in enumerate(reps, start=1):
                if np.linalg.norm(q - rep) <= tol:
                    labels.append(c)
                    break
                if np.linalg.norm(q + rep) <= tol:
                    labels.append(-c)
                    break
            else:
                reps.append(q)
                labels.append(len(reps))
    if r == 0:
        raise NotPolydiagonal("the zero subspace has no basis matrix")
    d = max(abs(v) for v in labels)
    if d != r:
        raise NotPolydiagonal(f"span has dimension {r} but its polydiagonal hull has dimension {d}")
    return from_labels(normalize_labels(labels))


def pseudoinverse(B: PolyBasisMatrix) -> np.ndarray:
    """Exact ``(B^T B)^{-1} B^T``; ``B^T B`` is diagonal with the column supports."""
    arr = B.array
    counts = [int(np.count_nonzero(arr[:, j])) for j in range(B.d)]
    out = np.empty((B.d, B.n), dtype=object)
    for j in range(B.d):
        for i in range(B.n):
            out[j, i] = Fraction(int(arr[i, j]), counts[j])
    return out


def projector(B: PolyBasisMatrix) -> np.ndarray:
    """Exact orthogonal projector ``B B^+`` onto col(B)."""
    return to_rational(B.array).dot(pseudoinverse(B))


def is_invariant(M, B: PolyBasisMatrix, tol: float = TOL_INV) -> bool:
    """Whether col(B) is M-invariant, i.e. ``(I - B B^+) M B = 0``.

    Exact for integer/rational M; float M uses ``||res|| <= tol * ||M B||``.
    """
    Marr = np.asarray(M, dtype=object)
    if Marr.ndim != 2 or Marr.shape != (B.n, B.n):
        raise DimensionMismatch(f"M has shape {Marr.shape}, basis has n = {B.n}")
    if is_exact(Marr):
        R = to_rational(Marr)
        Bq = to_rational(B.array)
        MB = R.dot(Bq)
        res = MB - projector(B).dot(MB)
        return all(v == 0 for v in res.flat)
    Mf = np.array(Marr, dtype=float)
    Bf = B.array.astype(float)
    MB = Mf @ Bf
    P = np.array(projector(B), dtype=float)
    res = MB - P @ MB
    return bool(np.linalg.norm(res) <= tol * max(np.linalg.norm(MB), np.finfo(float).tiny))


@dataclass(frozen=True)
class Subspace:
    """An invariant subspace. Equality compares the canonical basis only."""

    id: str = field(compare=False)
    n: int
    basis: PolyBasisMatrix | None = None

    def __post_init__(self):
        if self.basis is not None and self.basis.n != self.n:
            raise InconsistentAmbient(f"{self.id}: basis has {self.basis.n} rows, n = {self.n}")

    @property
    def dim(self) -> int:
        return 0 if self.basis is None else self.basis.d

    @property
    def kind(self) -> str:
        if self.basis is None:
            return TRIVIAL
        if self.basis.d == self.n:
            return FULL
        return self.basis.kind

    @property
    def labels(self) -> tuple[int, ...]:
        return (0,) * self.n if self.basis is None else self.basis.labels

    @property
    def is_synchrony(self) -> bool:
        """Synchrony in the wide sense (includes the full space)."""
        return self.kind in (SYNCHRONY, FULL)

    def sort_key(self):
        flat = () if self.basis is None else self.basis.flat
        return (self.dim, flat)

    def matrix(self) -> np.ndarray:
        """Float basis matrix (n x dim)."""
        if self.basis is None:
            return np.zeros((self.n, 0))
        return self.basis.array.astype(float)

    def pinv(self) -> np.ndarray:
        if self.basis is None:
            return np.zeros((0, self.n))
        return np.array(pseudoinverse(self.basis), dtype=float)

    def contains_vector(self, v) -> bool:
        """Exact membership for integer/rational vectors."""
        return _member(self.labels, list(v))

    def __str__(self) -> str:
        return f"{self.id}({self.kind}, dim {self.dim})"


def trivial(n: int, id: str = "W0") -> Subspace:
    return Subspace(id, n, None)


def full(n: int, id: str = "") -> Subspace:
    return Subspace(id, n, from_labels(tuple(range(1, n + 1))))


def subspace_from_labels(id: str, labels: Sequence[int]) -> Subspace:
    if not any(labels):
        return trivial(len(labels), id)
    return Subspace(id, len(labels), from_labels(labels))


def _member(labels: Sequence[int], v: Sequence) -> bool:
    ref: dict[int, object] = {}
    for lab, x in zip(labels, v):
        if lab == 0:
            if x != 0:
                return False
            continue
        val = x if lab > 0 else -x
        c = abs(lab)
        if c in ref:
            if ref[c] != val:
                return False
        else:
            ref[c] = val
    return True


def contains(outer: Subspace, inner: Subspace) -> bool:
    """Whether ``inner`` is a subspace of ``outer`` (exact)."""
    if outer.n != inner.n:
        raise DimensionMismatch(f"ambient dimensions differ: {outer.n} vs {inner.n}")
    if inner.basis is None or outer.kind == FULL:
        return True
    if outer.basis is None:
        return False
    cols = inner.basis.array.T
    return all(_member(outer.labels, list(col)) for col in cols)


def enumerate_invariant(M, include_antisynchrony: bool = True, n_max: int = N_MAX,
                        backend: str | None = None) -> list[Subspace]:
    """All M-invariant polydiagonal subspaces, trivial and full included.

    Sorted by (dimension, row-major entries); ids ``W0, W1, ...`` follow
    that order.
    """
    R = to_rational(M)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DimensionMismatch(f"M must be square, got shape {R.shape}")
    n = R.shape[0]
    if n > n_max:
        raise TooLarge(f"n = {n} exceeds n_max = {n_max} for brute-force enumeration")
    K, _ = integer_scaled(R)
    found = kernels.enumerate_labels(K, include_antisynchrony, backend=backend)
    subs = [trivial(n, "")] + [Subspace("", n, from_labels(lab)) for lab in found]
    return assign_ids(subs)


def assign_ids(subspaces: Iterable[Subspace]) -> list[Subspace]:
    ordered = sorted(subspaces, key=lambda s: s.sort_key())
    return [Subspace(f"W{i}", s.n, s.basis) for i, s in enumerate(ordered)]


@dataclass(frozen=True)
class SubspaceLattice:
    subspaces: tuple[Subspace, ...]
    covers: tuple[tuple[str, str], ...]
    orbits: tuple[tuple[str, ...], ...]

    @property
    def n(self) -> int:
        return self.subspaces[0].n

    def __post_init__(self):
        object.__setattr__(self, "_index", {s.id: i for i, s in enumerate(self.subspaces)})

    def get(self, sid: str) -> Subspace:
        try:
            return self.subspaces[self._index[sid]]
        except KeyError:
            raise UnknownSubspace(f"no subspace with id {sid!r}") from None

    def index(self, sid: str) -> int:
        return self._index[sid]

    def find(self, sub: Subspace) -> Subspace:
        """The lattice member equal to ``sub``."""
        for s in self.subspaces:
            if s == sub:
                return s
        raise UnknownSubspace(f"subspace {sub} is not in the lattice")

    def containing(self, sid: str) -> list[Subspace]:
        base = self.get(sid)
        return [s for s in self.subspaces if contains(s, base)]

    def contained_in(self, sid: str) -> list[Subspace]:
        top = self.get(sid)
        return [s for s in self.subspaces if contains(top, s)]

    def orbit_of(self, sid: str) -> tuple[str, ...]:
        for orb in self.orbits:
            if sid in orb:
                return orb
        raise UnknownSubspace(sid)

    def representative(self, sid: str) -> str:
        return self.orbit_of(sid)[0]


def containment_matrix(subspaces: Sequence[Subspace]) -> np.ndarray:
    """``C[i, j]`` true iff subspace i is contained in subspace j."""
    k = len(subspaces)
    C = np.zeros((k, k), dtype=bool)
    for i, a in enumerate(subspaces):
        for j, b in enumerate(subspaces):
            C[i, j] = a.dim <= b.dim and contains(b, a)
    return C


def build_lattice(subspaces: Sequence[Subspace], group=None) -> SubspaceLattice:
    """Hasse diagram of containment plus the orbit partition under ``group``."""
    subs = list(subspaces)
    if not subs:
        raise InconsistentAmbient("empty subspace list")
    n = subs[0].n
    for s in subs:
        if s.n != n:
            raise InconsistentAmbient(f"{s.id} lives in R^{s.n}, expected R^{n}")
    ids = [s.id for s in subs]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate subspace ids")
    C = containment_matrix(subs)
    strict = C & ~np.eye(len(subs), dtype=bool)
    two_step = (strict.astype(np.int64) @ strict.astype(np.int64)) > 0
    cover = strict & ~two_step
    covers = tuple((ids[i], ids[j]) for i, j in zip(*np.nonzero(cover)))
    if group is None:
        orbits = tuple((sid,) for sid in ids)
    else:
        from .symmetry import orbit_partition

        orbits = tuple(tuple(o) for o in orbit_partition(subs, group))
    return SubspaceLattice(tuple(subs), covers, orbits)


# ---------------------------------------------------------------------------
# file formats


def format_subspace(s: Subspace) -> str:
    if s.basis is None:
        return f"{s.id} {TRIVIAL} 0 ;"
    body = " ".join(str(v) for v in s.basis.flat)
    return f"{s.id} {s.kind} {s.dim} ; {body}"


def write_subspaces(subspaces: Sequence[Subspace]) -> str:
    return "".join(format_subspace(s) + "\n" for s in subspaces)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def read_subspaces(text: str, n: int | None = None, path=None) -> list[Subspace]:
    """Parse ``id kind d ; row-major entries`` lines."""
    parsed = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if ";" not in line:
            raise ParseError("missing ';' separator", path, lineno)
        head, body = line.split(";", 1)
        parts = head.split()
        if len(parts) != 3:
            raise ParseError("expected 'id kind d' before ';'", path, lineno)
        sid, kind, dtxt = parts
        if kind not in KINDS:
            raise ParseError(f"unknown kind {kind!r}", path, lineno, raw.find(kind) + 1)
        try:
            d = int(dtxt)
            vals = [int(t) for t in body.split()]
        except ValueError as exc:
            raise ParseError(f"non-integer field: {exc}", path, lineno) from None
        parsed.append((lineno, sid, kind, d, vals))
    for lineno, sid, kind, d, vals in parsed:
        if d > 0:
            if len(vals) % d:
                raise ParseError(f"{len(vals)} entries do not fill {d} columns", path, lineno)
            rows = len(vals) // d
            if n is None:
                n = rows
            elif rows != n:
                raise ParseError(f"{sid} has {rows} rows, expected {n}", path, lineno)
    if n is None:
        raise ParseError("cannot infer ambient dimension from a file with only trivial subspaces", path)
    out = []
    for lineno, sid, kind, d, vals in parsed:
        if d == 0:
            if kind != TRIVIAL or vals:
                raise ParseError("dimension 0 requires kind 'trivial' and no entries", path, lineno)
            out.append(trivial(n, sid))
            continue
        try:
            B = validate(np.array(vals, dtype=object).reshape(n, d))
        except ValidationError as exc:
            raise ValidationError(f"{sid}: {exc}") from None
        s = Subspace(sid, n, B)
        if s.kind != kind:
            raise ValidationError(f"{sid}: declared kind {kind!r} but basis is {s.kind!r}")
        out.append(s)
    return out


def write_lattice(lattice: SubspaceLattice) -> str:
    return "".join(f"{a} < {b}\n" for a, b in lattice.covers)


def read_lattice(text: str, path=None) -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        parts = [p.strip() for p in line.split("<")]
        if len(parts) != 2 or not all(parts) or any(" " in p for p in parts):
            raise ParseError("expected 'childId < parentId'", path, lineno)
        pairs.append((parts[0], parts[1]))
    return pairs
