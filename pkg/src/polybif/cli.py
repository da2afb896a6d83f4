"""Command line interface.

    polybif run CONFIG [--out DIR] [--smin S] [--smax S] [--seed-s S --seed-x "X1 ... Xn"]
    polybif subspaces MATRIX [--all] [--lattice] [--synchrony-only]
    polybif check CONFIG
    polybif verify FOREST_JSON

Exit status: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .bifurcation import explore
from .config import read_config, with_overrides
from .errors import NumericalError, ValidationError
from .fileio import load_inputs
from .network import read_matrix
from .output import BranchForestRecord, functional_of, make_record, write_outputs
from .polydiag import build_lattice, enumerate_invariant, format_subspace, write_lattice
from .symmetry import find_automorphisms, group_for
from .verify import verify_record

log = logging.getLogger("polybif")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _config(args):
    cfg = read_config(args.config)
    return with_overrides(cfg, out=getattr(args, "out", None), s_min=getattr(args, "smin", None),
                          s_max=getattr(args, "smax", None), seed_s=getattr(args, "seed_s", None),
                          seed_x=None if getattr(args, "seed_x", None) is None else args.seed_x.replace(",", " ").split())


def cmd_run(args) -> int:
    cfg = _config(args)
    system, lattice, group = load_inputs(cfg)
    t0 = time.perf_counter()
    forest = explore(system, lattice, group, (cfg.s_min, cfg.s_max), cfg.tolerances, cfg.start)
    elapsed = time.perf_counter() - t0
    record = make_record(forest, cfg, system)
    out = Path(cfg.out) if args.out is not None else cfg.path("out")
    written = write_outputs(record, out, functional_of(cfg.functional, system.n))
    print(f"{len(forest.branches)} branches, {len(forest.events)} events, {len(forest.folds)} folds "
          f"in {elapsed:.2f} s")
    for e in forest.events:
        print(f"  {e.id}: s = {e.s_star:.10g}  {e.mother} -> {e.daughter}  seeds {len(e.spawn_dirs)}")
    for n in forest.notes:
        if n.kind in ("unresolved", "degenerate", "hopf"):
            print(f"  note ({n.kind}) at s = {n.s:.6g}: {n.detail}")
    print(f"wrote {len(written)} files to {out}")
    return EXIT_OK


def cmd_subspaces(args) -> int:
    path = Path(args.matrix)
    M = read_matrix(path.read_text(), path)
    subs = enumerate_invariant(M, include_antisynchrony=not args.synchrony_only)
    group = group_for(M, odd=not args.synchrony_only, perms=find_automorphisms(M))
    lattice = build_lattice(subs, group)
    if args.all:
        shown = list(lattice.subspaces)
    else:
        shown = [lattice.get(orb[0]) for orb in lattice.orbits]
    for s in shown:
        print(format_subspace(s))
    if args.lattice:
        print(write_lattice(lattice), end="")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _config(args)
    system, lattice, group = load_inputs(cfg)
    print(f"ok: n = {system.n}, {len(lattice.subspaces)} subspaces in {len(lattice.orbits)} orbits, "
          f"|G| = {group.order}, f odd = {system.f.odd}")
    return EXIT_OK


def cmd_verify(args) -> int:
    path = Path(args.forest)
    try:
        rec = BranchForestRecord.from_json(path.read_text())
    except (ValueError, TypeError, KeyError) as exc:
        raise ValidationError(f"{path}: not a forest record ({exc})") from None
    rep = verify_record(rec)
    print(f"checked {rep.points} points and {rep.events} events; max residual {rep.max_residual:.3e}")
    for v in rep.violations[:20]:
        print(f"  violation: {v}")
    return EXIT_OK if rep.ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polybif", description="Bifurcation diagrams of coupled cell networks.")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="explore the branch tree and write outputs")
    p.add_argument("config")
    p.add_argument("--out", help="output directory")
    p.add_argument("--smin", type=float)
    p.add_argument("--smax", type=float)
    p.add_argument("--seed-s", dest="seed_s", type=float)
    p.add_argument("--seed-x", dest="seed_x", help="start vector, space or comma separated")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("subspaces", help="enumerate invariant subspaces of a matrix file")
    p.add_argument("matrix")
    p.add_argument("--all", action="store_true", help="list every subspace, not one per orbit")
    p.add_argument("--lattice", action="store_true", help="also print the cover relation")
    p.add_argument("--synchrony-only", action="store_true")
    p.set_defaults(func=cmd_subspaces)

    p = sub.add_parser("check", help="validate the inputs of a config")
    p.add_argument("config")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="re-check residuals and invariants of a saved forest")
    p.add_argument("forest")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
