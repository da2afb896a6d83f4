"""Permutation symmetries of M, the optional sign flip, and orbit bookkeeping.

A permutation is stored as a 0-based image array ``p`` (cell ``i`` goes to
cell ``p[i]``); it acts on vectors by ``(P x)[p[i]] = x[i]``. It commutes
with M iff ``M[p[i], p[j]] == M[i, j]`` for all i, j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotClosed, ParseError, TooLarge, ValidationError
from .polydiag import N_MAX, Subspace, normalize_labels, subspace_from_labels
from .rational import to_rational

Perm = tuple[int, ...]
SEED_TOL = 1e-7


def find_automorphisms(M, n_max: int = N_MAX) -> list[Perm]:
    """All permutations commuting with M, by backtracking with partial-row pruning."""
    R = to_rational(M)
    n = R.shape[0]
    if n > n_max:
        raise TooLarge(f"n = {n} exceeds n_max = {n_max} for the automorphism search")
    found: list[Perm] = []
    p = [-1] * n
    used = [False] * n

    def extend(k):
        if k == n:
            found.append(tuple(p))
            return
        for v in range(n):
            if used[v] or R[v, v] != R[k, k]:
                continue
            if all(R[p[j], v] == R[j, k] and R[v, p[j]] == R[k, j] for j in range(k)):
                p[k] = v
                used[v] = True
                extend(k + 1)
                used[v] = False
        p[k] = -1

    extend(0)
    return sorted(found)


def compose(a: Perm, b: Perm) -> Perm:
    """``a after b``."""
    return tuple(a[b[i]] for i in range(len(b)))


def inverse(a: Perm) -> Perm:
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v] = i
    return tuple(out)


def commutes(M, p: Perm) -> bool:
    R = to_rational(M)
    n = R.shape[0]
    return len(p) == n and all(R[p[i], p[j]] == R[i, j] for i in range(n) for j in range(n))


@dataclass(frozen=True)
class SymmetryGroup:
    perms: tuple[Perm, ...]
    has_sign_flip: bool = False

    @property
    def n(self) -> int:
        return len(self.perms[0])

    @property
    def elements(self) -> list[tuple[Perm, int]]:
        signs = (1, -1) if self.has_sign_flip else (1,)
        return [(p, e) for p in self.perms for e in signs]

    @property
    def order(self) -> int:
        return len(self.perms) * (2 if self.has_sign_flip else 1)

    def check(self) -> None:
        """Closure, identity and inverses of the permutation part."""
        ident = tuple(range(self.n))
        pset = set(self.perms)
        if ident not in pset:
            raise ValidationError("permutation set lacks the identity")
        for a in self.perms:
            if inverse(a) not in pset:
                raise ValidationError(f"permutation {a} has no inverse in the set")
            for b in self.perms:
                if compose(a, b) not in pset:
                    raise ValidationError(f"permutations {a}, {b} compose outside the set")

    @classmethod
    def trivial(cls, n: int) -> "SymmetryGroup":
        return cls((tuple(range(n)),), False)


def group_for(M, odd: bool, perms: Sequence[Perm] | None = None) -> SymmetryGroup:
    if perms is None:
        perms = find_automorphisms(M)
    return SymmetryGroup(tuple(sorted(tuple(p) for p in perms)), bool(odd))


def apply(g: tuple[Perm, int], x) -> np.ndarray:
    p, eps = g
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[list(p)] = x
    return eps * out


def act_on_subspace(g: tuple[Perm, int], sub: Subspace) -> Subspace:
    """Image of ``sub`` under g; the sign part never changes a subspace."""
    p, _ = g
    if sub.basis is None:
        return sub
    labels = [0] * sub.n
    for i, lab in enumerate(sub.labels):
        labels[p[i]] = lab
    return subspace_from_labels(sub.id, normalize_labels(labels))


def orbit_partition(subspaces: Sequence[Subspace], G: SymmetryGroup) -> list[list[str]]:
    """Equivalence classes of ids; each class listed in input order, so the
    first entry (smallest position) is the representative."""
    pos = {s: i for i, s in enumerate(subspaces)}
    parent = list(range(len(subspaces)))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, s in enumerate(subspaces):
        for g in G.elements:
            img = act_on_subspace(g, s)
            j = pos.get(img)
            if j is None:
                raise NotClosed(f"image of {s.id} under {g[0]} is not in the subspace list")
            a, b = root(i), root(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    classes: dict[int, list[str]] = {}
    for i, s in enumerate(subspaces):
        classes.setdefault(root(i), []).append(s.id)
    return [classes[k] for k in sorted(classes)]


def seeds_equivalent(e1, e2, G: SymmetryGroup, tol: float = SEED_TOL) -> bool:
    """Whether some group element maps seed ``(s, x, dir)`` e1 onto e2."""
    s1, x1, d1 = e1
    s2, x2, d2 = e2
    if abs(s1 - s2) > tol:
        return False
    x2 = np.asarray(x2, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    for g in G.elements:
        if np.max(np.abs(apply(g, x1) - x2), initial=0.0) <= tol and \
                np.max(np.abs(apply(g, d1) - d2), initial=0.0) <= tol:
            return True
    return False


# ---------------------------------------------------------------------------
# automorphism files


def read_automorphisms(text: str, n: int | None = None, path=None) -> tuple[list[Perm], bool | None]:
    """Parse one-line image notation (1-based); optional ``signflip 0|1`` header."""
    perms: list[Perm] = []
    signflip = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "signflip":
            if perms or signflip is not None:
                raise ParseError("'signflip' must be a single header line", path, lineno)
            if len(toks) != 2 or toks[1] not in ("0", "1"):
                raise ParseError("expected 'signflip 0' or 'signflip 1'", path, lineno)
            signflip = toks[1] == "1"
            continue
        try:
            img = [int(t) - 1 for t in toks]
        except ValueError:
            raise ParseError("permutation entries must be integers", path, lineno) from None
        m = len(img)
        if n is not None and m != n:
            raise ParseError(f"permutation has {m} entries, expected {n}", path, lineno)
        if sorted(img) != list(range(m)):
            raise ParseError("not a permutation of 1..n", path, lineno)
        perms.append(tuple(img))
    return perms, signflip


def write_automorphisms(perms: Iterable[Perm], signflip: bool | None = None) -> str:
    head = "" if signflip is None else f"signflip {int(signflip)}\n"
    return head + "".join(" ".join(str(v + 1) for v in p) + "\n" for p in perms)
