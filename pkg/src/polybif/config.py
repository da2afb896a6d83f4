"""Run configuration: a flat ``key = value`` file with optional sections.

Example::

    matrix = diamond.mat
    s_min = -3
    s_max = 5
    out = out

    [dynamics]
    family = cubic_soft

    [tolerances]
    delta_max = 0.1

Keys before the first section header belong to the run itself. Relative
paths are resolved against the directory holding the config file.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .continuation import Tolerances
from .errors import ParseError, ValidationError
from .network import FAMILIES, InternalDynamics

RUN_SECTION = "run"
RUN_KEYS = ("matrix", "subspaces", "lattice", "automorphisms", "h", "s_min", "s_max",
            "seed_s", "seed_x", "functional", "out")
DYNAMICS_KEYS = ("family", "alpha", "beta", "terms")
TOLERANCE_KEYS = tuple(f.name for f in fields(Tolerances))


@dataclass(frozen=True)
class RunConfig:
    matrix: str
    s_min: float
    s_max: float
    subspaces: str | None = None
    lattice: str | None = None
    automorphisms: str | None = None
    family: str = "cubic_soft"
    alpha: float = 0.0
    beta: float = 0.0
    terms: tuple[tuple[float, int, int], ...] = ()
    h: float = -1.0
    seed_s: float | None = None
    seed_x: tuple[float, ...] | None = None
    functional: tuple[float, ...] | None = None
    out: str = "out"
    tolerances: Tolerances = field(default_factory=Tolerances)
    base: str = field(default=".", compare=False)

    def check(self) -> "RunConfig":
        if not (math.isfinite(self.s_min) and math.isfinite(self.s_max)) or not self.s_min < self.s_max:
            raise ValidationError(f"need s_min < s_max, got {self.s_min} and {self.s_max}")
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown dynamics family {self.family!r}")
        if (self.seed_s is None) != (self.seed_x is None):
            raise ValidationError("seed_s and seed_x must be given together")
        self.tolerances.check()
        self.dynamics()
        return self

    def dynamics(self) -> InternalDynamics:
        return InternalDynamics(self.family, self.alpha, self.beta, self.terms)

    @property
    def start(self):
        if self.seed_s is None:
            return None
        return self.seed_s, list(self.seed_x)

    def path(self, name: str) -> Path | None:
        value = getattr(self, name)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else Path(self.base) / p

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base")
        d["terms"] = [list(t) for t in self.terms]
        for k in ("seed_x", "functional"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict, base: str = ".") -> "RunConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        tol = Tolerances(**d.pop("tolerances", {}))
        d["terms"] = tuple((float(c), int(p), int(k)) for c, p, k in d.get("terms", ()))
        for k in ("seed_x", "functional"):
            if d.get(k) is not None:
                d[k] = tuple(float(v) for v in d[k])
        return cls(tolerances=tol, base=base, **d)

    def to_text(self) -> str:
        """Config file text that parses back to an equal RunConfig."""
        lines = [f"matrix = {self.matrix}"]
        for k in ("subspaces", "lattice", "automorphisms"):
            if getattr(self, k) is not None:
                lines.append(f"{k} = {getattr(self, k)}")
        lines += [f"h = {self.h!r}", f"s_min = {self.s_min!r}", f"s_max = {self.s_max!r}"]
        if self.seed_s is not None:
            lines.append(f"seed_s = {self.seed_s!r}")
            lines.append("seed_x = " + " ".join(repr(v) for v in self.seed_x))
        if self.functional is not None:
            lines.append("functional = " + " ".join(repr(v) for v in self.functional))
        lines.append(f"out = {self.out}")
        lines += ["", "[dynamics]", f"family = {self.family}", f"alpha = {self.alpha!r}", f"beta = {self.beta!r}"]
        if self.terms:
            lines.append("terms = " + "; ".join(f"{c!r} {p} {k}" for c, p, k in self.terms))
        lines += ["", "[tolerances]"]
        lines += [f"{k} = {getattr(self.tolerances, k)!r}" for k in TOLERANCE_KEYS]
        return "\n".join(lines) + "\n"


def _floats(text: str, key: str, path, line) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise ParseError(f"{key}: expected numbers, got {text!r}", path, line) from None


def _line_of(text: str, section: str, key: str) -> int | None:
    """Line of ``key`` in ``section``; an empty key finds the section header."""
    current = RUN_SECTION
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current == section and not key:
                return k
        elif current == section and line.split("=", 1)[0].strip() == key:
            return k
    return None


def parse_config(text: str, path=None, base: str | None = None) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        # the header keeps reported line numbers one too high; subtract below
        cp.read_string(f"[{RUN_SECTION}]\n" + text, source=str(path or "<config>"))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        msg = getattr(exc, "message", str(exc)).splitlines()[0]
        raise ParseError(msg, path, None if line is None else line - 1) from None

    allowed = {RUN_SECTION: RUN_KEYS, "dynamics": DYNAMICS_KEYS, "tolerances": TOLERANCE_KEYS}
    for section in cp.sections():
        if section not in allowed:
            raise ParseError(f"unknown section [{section}]", path, _line_of(text, section, ""))
        for key in cp[section]:
            if key not in allowed[section]:
                raise ParseError(f"unknown key {key!r} in [{section}]", path, _line_of(text, section, key))

    run = cp[RUN_SECTION]
    dyn = cp["dynamics"] if cp.has_section("dynamics") else {}
    tol = cp["tolerances"] if cp.has_section("tolerances") else {}

    def num(section, sec, key, default=None, kind=float):
        if key not in sec:
            return default
        try:
            return kind(sec[key])
        except ValueError:
            raise ParseError(f"{key}: not a valid {kind.__name__}: {sec[key]!r}", path,
                             _line_of(text, section, key)) from None

    if "matrix" not in run:
        raise ParseError("missing required key 'matrix'", path)
    for key in ("s_min", "s_max"):
        if key not in run:
            raise ParseError(f"missing required key {key!r}", path)

    terms = ()
    if "terms" in dyn:
        rows = []
        for chunk in dyn["terms"].split(";"):
            vals = chunk.split()
            if len(vals) != 3:
                raise ParseError("terms: each entry needs 'coefficient s_power x_power'", path,
                                 _line_of(text, "dynamics", "terms"))
            try:
                rows.append((float(vals[0]), int(vals[1]), int(vals[2])))
            except ValueError:
                raise ParseError(f"terms: bad entry {chunk.strip()!r}", path,
                                 _line_of(text, "dynamics", "terms")) from None
        terms = tuple(rows)

    tol_kwargs = {}
    for f in fields(Tolerances):
        v = num("tolerances", tol, f.name, kind=int if f.type in ("int", int) else float)
        if v is not None:
            tol_kwargs[f.name] = v

    seed_x = run.get("seed_x")
    functional = run.get("functional")
    cfg = RunConfig(
        matrix=run["matrix"],
        s_min=num(RUN_SECTION, run, "s_min"),
        s_max=num(RUN_SECTION, run, "s_max"),
        subspaces=run.get("subspaces"),
        lattice=run.get("lattice"),
        automorphisms=run.get("automorphisms"),
        family=dyn.get("family", "cubic_soft"),
        alpha=num("dynamics", dyn, "alpha", 0.0),
        beta=num("dynamics", dyn, "beta", 0.0),
        terms=terms,
        h=num(RUN_SECTION, run, "h", -1.0),
        seed_s=num(RUN_SECTION, run, "seed_s"),
        seed_x=None if seed_x is None else _floats(seed_x, "seed_x", path, _line_of(text, RUN_SECTION, "seed_x")),
        functional=None if functional is None else _floats(functional, "functional", path,
                                                           _line_of(text, RUN_SECTION, "functional")),
        out=run.get("out", "out"),
        tolerances=Tolerances(**tol_kwargs),
        base=base if base is not None else (str(Path(path).parent) if path else "."),
    )
    return cfg


def read_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), path)


def with_overrides(cfg: RunConfig, out=None, s_min=None, s_max=None, seed_s=None, seed_x=None) -> RunConfig:
    changes = {}
    if out is not None:
        changes["out"] = out
    if s_min is not None:
        changes["s_min"] = float(s_min)
    if s_max is not None:
        changes["s_max"] = float(s_max)
    if seed_s is not None:
        changes["seed_s"] = float(seed_s)
    if seed_x is not None:
        changes["seed_x"] = tuple(float(v) for v in seed_x)
    return replace(cfg, **changes)
