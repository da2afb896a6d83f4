"""Loading the input files named by a run config and cross-checking them."""

from __future__ import annotations

import logging
from pathlib import Path

from .config import RunConfig
from .errors import NotInvariant, ValidationError
from .network import NetworkSystem, read_matrix
from .polydiag import FULL, TRIVIAL, build_lattice, enumerate_invariant, is_invariant, read_lattice, read_subspaces
from .symmetry import SymmetryGroup, commutes, find_automorphisms, read_automorphisms

log = logging.getLogger(__name__)


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_inputs(cfg: RunConfig):
    """Return ``(system, lattice, group)``; missing optional files are computed."""
    cfg.check()
    mpath = cfg.path("matrix")
    M = read_matrix(_read(mpath), mpath)
    f = cfg.dynamics()
    system = NetworkSystem(M, f, cfg.h)
    n = system.n
    if cfg.functional is not None and len(cfg.functional) != n:
        raise ValidationError(f"functional has {len(cfg.functional)} entries, n = {n}")
    if cfg.seed_x is not None and len(cfg.seed_x) != n:
        raise ValidationError(f"seed_x has {len(cfg.seed_x)} entries, n = {n}")

    apath = cfg.path("automorphisms")
    if apath is None:
        perms = find_automorphisms(M)
        signflip = None
        log.info("no automorphism file: found %d automorphisms by search", len(perms))
    else:
        perms, signflip = read_automorphisms(_read(apath), n, apath)
        for p in perms:
            if not commutes(M, p):
                raise ValidationError(f"{apath}: permutation {' '.join(str(v + 1) for v in p)} does not commute with M")
    group = SymmetryGroup(tuple(sorted(perms)), f.odd if signflip is None else signflip)
    group.check()

    spath = cfg.path("subspaces")
    if spath is None:
        subs = enumerate_invariant(M, include_antisynchrony=True)
        log.info("no subspace file: enumerated %d invariant subspaces", len(subs))
    else:
        subs = read_subspaces(_read(spath), n, spath)
        kinds = {s.kind for s in subs}
        if TRIVIAL not in kinds or FULL not in kinds:
            raise ValidationError(f"{spath}: the subspace list must contain the trivial and the full subspace")
        for s in subs:
            if s.basis is not None and not is_invariant(M, s.basis):
                raise NotInvariant(f"{spath}: subspace {s.id} is not M-invariant")
    lattice = build_lattice(subs, group)

    lpath = cfg.path("lattice")
    if lpath is not None:
        given = set(read_lattice(_read(lpath), lpath))
        computed = set(lattice.covers)
        if given != computed:
            diff = sorted(given ^ computed)
            raise ValidationError(f"{lpath}: cover relation disagrees with containment, e.g. {diff[0][0]} < {diff[0][1]}")
    return system, lattice, group
