"""Scenario files: INI-style sections with ``key = value`` lines.

Sections: ``[scenario]``, ``[grid]``, ``[physics]``, ``[solenoid]``,
``[interferometer]``, ``[experiment]``, ``[checks]``, ``[tolerances]`` and
named blocks ``[path.<id>]`` and ``[gauge.<id>]``.  Lists are comma
separated; vertex lists are ``x y; x y; ...``.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .analytic import GaugeChi, SolenoidSpec
from .fields import Disk, Grid2
from .interferometry import InterferometerSpec, LoopPath, OpenPath
from .propagation import CFL_MAX, courant_number

KINDS = ("ab-phase", "gauge-classify", "propagate", "locality-report", "pattern")


class ScenarioError(ValueError):
    """Structured parse error: ``code`` plus the offending section/key/line."""

    def __init__(self, code: str, message: str, section: Optional[str] = None,
                 key: Optional[str] = None, line: Optional[int] = None):
        self.code = code
        self.section = section
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        super().__init__(f"{code}: {message}" + (f" ({', '.join(where)})" if where else ""))


# --- value types -----------------------------------------------------------

def _float(s):
    return float(s)


def _int(s):
    return int(s)


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


def _pair(s):
    v = _floats(s)
    if len(v) != 2:
        raise ValueError("expected two numbers")
    return v


def _names(s):
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _vertices(s):
    pts = []
    for chunk in s.split(";"):
        if chunk.strip():
            xy = chunk.split()
            if len(xy) != 2:
                raise ValueError(f"bad vertex {chunk.strip()!r}")
            pts.append((float(xy[0]), float(xy[1])))
    return tuple(pts)


def _terms(s):
    out = []
    for chunk in s.split(";"):
        if chunk.strip():
            parts = chunk.split()
            if len(parts) != 4:
                raise ValueError(f"term needs 'i j k coeff': {chunk.strip()!r}")
            out.append((int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])))
    return tuple(out)


def _str(s):
    return s.strip()


def _fmt(v) -> str:
    """Inverse of the parsers above; floats use repr so round-trips are exact."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            if len(v[0]) == 4:
                return "; ".join(f"{i} {j} {k} {c!r}" for i, j, k, c in v)
            return "; ".join(f"{x!r} {y!r}" for x, y in v)
        return ", ".join(_fmt(x) for x in v)
    return str(v)


# section -> key -> (parser, default); a default of ... marks a required key
SCHEMA = {
    "scenario": {"name": (_str, ...), "kind": (_str, ...), "seed": (_int, 0),
                 "description": (_str, "")},
    "grid": {"nx": (_int, ...), "ny": (_int, ...), "dx": (_float, 1.0), "dy": (_float, 1.0),
             "x0": (_float, None), "y0": (_float, None)},
    "physics": {"c": (_float, 1.0), "kappa": (_float, 1.0)},
    "solenoid": {"center": (_pair, (0.0, 0.0)), "radius": (_float, 0.0), "flux": (_float, 1.0),
                 "t_on": (_float, 0.0), "ramp": (_float, 0.0), "feed_dipole": (_float, 0.0),
                 "exclusion_radius": (_float, None)},
    "interferometer": {"lambda_b": (_float, 1.0), "l": (_float, 1.0), "d": (_float, 1.0),
                       "screen_half_width": (_float, None), "screen_points": (_int, 2001)},
    "tolerances": {"classify": (_float, None), "quadrature": (_float, 1e-8),
                   "solver": (_float, 1e-8)},
}

PATH_SCHEMA = {"kind": (_str, "polyline"), "vertices": (_vertices, None),
               "center": (_pair, (0.0, 0.0)), "radius": (_float, 1.0), "n": (_int, 64),
               "turns": (_int, 1), "start": (_float, 0.0), "stop": (_float, None)}

GAUGE_SCHEMA = {"kind": (_str, ...), "terms": (_terms, ()), "k": (_pair, None),
                "amplitude": (_float, 1.0), "phase": (_float, 0.0), "flux": (_float, None),
                "center": (_pair, None)}

_PROPAGATE = {"t_end": (_float, ...), "dt": (_float, None), "cadence": (_int, 4),
              "damping_width": (_int, 16), "damping_strength": (_float, None),
              "threads": (_int, None), "frames_out": (_int, 0)}

EXPERIMENT_SCHEMA = {
    "ab-phase": {"potential": (_str, "thin"), "path1": (_str, None), "path2": (_str, None),
                 "loops": (_names, ()), "random_loops": (_int, 0)},
    "gauge-classify": {"first": (_str, "thin"), "second": (_str, "zero"),
                       "transform_first": (_names, ()), "transform_second": (_names, ()),
                       "loops": (_names, ())},
    "pattern": {"fluxes": (_floats, ...)},
    "propagate": dict(_PROPAGATE, residual_gauge=(_str, None), residual_frame=(_int, None)),
    "locality-report": dict(_PROPAGATE, radii=(_floats, ...), threshold=(_float, 0.01),
                            channels=(_names, ("A", "E")), coulomb=(_bool, True),
                            prefront_radius=(_float, None), prefront_time=(_float, None)),
}

# check name -> comparison; "label" checks compare strings
CHECKS = {
    "ab-phase": {"phase_error": "<", "loop_error": "<", "stokes_error": "<"},
    "gauge-classify": {"label": "==", "label_transformed": "==",
                       "loop_difference_error": "<", "holonomy_change": "<"},
    "pattern": {"fringe_shift_cells": "<=", "periodicity_error": "<"},
    "propagate": {"lorenz_growth": "<", "confinement": "<", "residual_lorenz_change": "<",
                  "residual_field_change": "<", "residual_holonomy_change": "<"},
    "locality-report": {"speed_error_A": "<", "speed_error_E": "<", "coulomb_prefront": ">",
                        "lorenz_prefront": "<", "field_agreement": "<",
                        "lorenz_growth": "<", "confinement": "<"},
}

REQUIRED = {
    "ab-phase": ("solenoid",),
    "gauge-classify": ("grid", "solenoid"),
    "pattern": ("interferometer",),
    "propagate": ("grid", "solenoid"),
    "locality-report": ("grid", "solenoid"),
}


# --- declarations ----------------------------------------------------------

@dataclass(frozen=True)
class GridConfig:
    nx: int
    ny: int
    dx: float = 1.0
    dy: float = 1.0
    x0: Optional[float] = None
    y0: Optional[float] = None

    def build(self, disk: Optional[Disk] = None) -> Grid2:
        x0 = -(self.nx - 1) * self.dx / 2 if self.x0 is None else self.x0
        y0 = -(self.ny - 1) * self.dy / 2 if self.y0 is None else self.y0
        return Grid2(self.nx, self.ny, self.dx, self.dy, x0, y0, disk)


@dataclass(frozen=True)
class PathDecl:
    id: str
    kind: str = "polyline"
    vertices: Optional[tuple] = None
    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    n: int = 64
    turns: int = 1
    start: float = 0.0
    stop: Optional[float] = None

    @property
    def closed(self) -> bool:
        if self.kind == "circle":
            return True
        if self.kind == "polyline":
            return len(self.vertices) > 2 and self.vertices[0] == self.vertices[-1]
        return False

    def build(self):
        if self.kind == "circle":
            return LoopPath.circle(self.center, self.radius, self.n, self.turns, self.start)
        if self.kind == "arc":
            return OpenPath.arc(self.center, self.radius, self.start, self.stop, self.n)
        return (LoopPath if self.closed else OpenPath)(self.vertices)


@dataclass(frozen=True)
class GaugeDecl:
    id: str
    kind: str
    terms: tuple = ()
    k: Optional[tuple] = None
    amplitude: float = 1.0
    phase: float = 0.0
    flux: Optional[float] = None
    center: Optional[tuple] = None

    def build(self, c: float = 1.0, solenoid: Optional[SolenoidSpec] = None) -> GaugeChi:
        if self.kind == "polynomial":
            return GaugeChi.polynomial({(i, j, k): v for i, j, k, v in self.terms})
        if self.kind == "plane_wave":
            return GaugeChi.plane_wave(self.k, self.amplitude, self.phase, c)
        flux = self.flux if self.flux is not None else (solenoid.flux if solenoid else 1.0)
        center = self.center if self.center is not None else (
            solenoid.center if solenoid else (0.0, 0.0))
        return GaugeChi.polar(flux, center)


@dataclass
class Scenario:
    name: str
    kind: str
    seed: int = 0
    description: str = ""
    grid: Optional[GridConfig] = None
    c: float = 1.0
    kappa: float = 1.0
    solenoid: Optional[SolenoidSpec] = None
    exclusion_radius: Optional[float] = None
    interferometer: Optional[InterferometerSpec] = None
    screen_half_width: Optional[float] = None
    screen_points: int = 2001
    paths: dict = field(default_factory=dict)
    gauges: dict = field(default_factory=dict)
    experiment: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def build_grid(self) -> Grid2:
        disk = None
        if self.solenoid is not None:
            g0 = self.grid.build()
            r = self.exclusion_radius
            if r is None:
                r = self.solenoid.radius if self.solenoid.radius > 0 else 3 * g0.h
            disk = Disk(self.solenoid.center[0], self.solenoid.center[1], r)
        return self.grid.build(disk)


# --- parsing ---------------------------------------------------------------

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _locations(text: str) -> dict:
    """Map ``(section, key)`` and ``(section, None)`` to 1-based line numbers."""
    loc = {}
    section = None
    for n, line in enumerate(text.splitlines(), 1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            loc.setdefault((section, None), n)
            continue
        if line[:1] in (" ", "\t") or line.lstrip().startswith(("#", ";")):
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            loc.setdefault((section, m.group(1).strip()), n)
    return loc


def _read_block(cp, section: str, schema: dict, loc: dict) -> dict:
    out = {}
    items = dict(cp.items(section)) if cp.has_section(section) else {}
    for key in items:
        if key not in schema:
            raise ScenarioError("E_UNKNOWN_KEY", f"unknown key {key!r}", section, key,
                                loc.get((section, key)))
    for key, (parse, default) in schema.items():
        if key in items:
            try:
                out[key] = parse(items[key])
            except ValueError as exc:
                raise ScenarioError("E_SYNTAX", f"cannot parse {key!r}: {exc}", section, key,
                                    loc.get((section, key))) from None
        elif default is ...:
            raise ScenarioError("E_MISSING_KEY", f"required key {key!r} missing", section, key,
                                loc.get((section, None)))
        else:
            out[key] = default
    return out


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; raises :class:`ScenarioError`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ScenarioError("E_SYNTAX", str(exc).splitlines()[0], line=line) from None
    loc = _locations(text)

    known = set(SCHEMA) | {"experiment", "checks"}
    for sec in cp.sections():
        if sec not in known and not sec.startswith(("path.", "gauge.")):
            raise ScenarioError("E_UNKNOWN_KEY", f"unknown section [{sec}]", sec,
                                line=loc.get((sec, None)))
    if not cp.has_section("scenario"):
        raise ScenarioError("E_MISSING_SECTION", "missing [scenario] section", "scenario")
    head = _read_block(cp, "scenario", SCHEMA["scenario"], loc)
    kind = head["kind"]
    if kind not in KINDS:
        raise ScenarioError("E_INVARIANT", f"unknown experiment kind {kind!r}", "scenario",
                            "kind", loc.get(("scenario", "kind")))
    for sec in REQUIRED[kind] + ("experiment",):
        if not cp.has_section(sec):
            raise ScenarioError("E_MISSING_SECTION", f"kind {kind!r} needs [{sec}]", sec)

    def invariant(msg, sec, key=None):
        return ScenarioError("E_INVARIANT", msg, sec, key, loc.get((sec, key)))

    sc = Scenario(name=head["name"], kind=kind, seed=head["seed"],
                  description=head["description"])
    if cp.has_section("grid"):
        g = _read_block(cp, "grid", SCHEMA["grid"], loc)
        try:
            sc.grid = GridConfig(**g)
            sc.grid.build()
        except ValueError as exc:
            raise invariant(str(exc), "grid") from None
    ph = _read_block(cp, "physics", SCHEMA["physics"], loc)
    sc.c, sc.kappa = ph["c"], ph["kappa"]
    if sc.c <= 0:
        raise invariant("c must be positive", "physics", "c")
    if cp.has_section("solenoid"):
        s = _read_block(cp, "solenoid", SCHEMA["solenoid"], loc)
        sc.exclusion_radius = s.pop("exclusion_radius")
        try:
            sc.solenoid = SolenoidSpec(**s)
        except ValueError as exc:
            raise invariant(str(exc), "solenoid") from None
        if sc.grid is not None:
            try:
                sc.build_grid()
            except ValueError as exc:
                raise invariant(str(exc), "solenoid") from None
    if cp.has_section("interferometer"):
        it = _read_block(cp, "interferometer", SCHEMA["interferometer"], loc)
        sc.screen_half_width = it.pop("screen_half_width")
        sc.screen_points = it.pop("screen_points")
        try:
            sc.interferometer = InterferometerSpec(kappa=sc.kappa, **it)
        except ValueError as exc:
            raise invariant(str(exc), "interferometer") from None
        if sc.screen_points < 3:
            raise invariant("screen_points must be >= 3", "interferometer", "screen_points")
    sc.tolerances = _read_block(cp, "tolerances", SCHEMA["tolerances"], loc)

    for sec in cp.sections():
        if sec.startswith("path."):
            sc.paths[sec[5:]] = _parse_path(cp, sec, loc)
        elif sec.startswith("gauge."):
            sc.gauges[sec[6:]] = _parse_gauge(cp, sec, loc)

    sc.experiment = _read_block(cp, "experiment", EXPERIMENT_SCHEMA[kind], loc)
    _resolve_refs(sc, loc)
    _check_cfl(sc, loc)

    if cp.has_section("checks"):
        for key, raw in cp.items("checks"):
            if key not in CHECKS[kind]:
                raise ScenarioError("E_UNKNOWN_KEY", f"check {key!r} not defined for {kind}",
                                    "checks", key, loc.get(("checks", key)))
            if CHECKS[kind][key] == "==":
                sc.checks[key] = raw.strip()
            else:
                try:
                    sc.checks[key] = float(raw)
                except ValueError:
                    raise ScenarioError("E_SYNTAX", f"threshold for {key!r} is not a number",
                                        "checks", key, loc.get(("checks", key))) from None
    return sc


def _parse_path(cp, sec, loc) -> PathDecl:
    d = _read_block(cp, sec, PATH_SCHEMA, loc)
    pid = sec[5:]
    if d["kind"] not in ("polyline", "circle", "arc"):
        raise ScenarioError("E_INVARIANT", f"unknown path kind {d['kind']!r}", sec, "kind",
                            loc.get((sec, "kind")))
    if d["kind"] == "polyline" and not d["vertices"]:
        raise ScenarioError("E_MISSING_KEY", "polyline needs vertices", sec, "vertices",
                            loc.get((sec, None)))
    if d["kind"] == "arc" and d["stop"] is None:
        raise ScenarioError("E_MISSING_KEY", "arc needs stop", sec, "stop", loc.get((sec, None)))
    decl = PathDecl(pid, **d)
    try:
        decl.build()
    except ValueError as exc:
        raise ScenarioError("E_INVARIANT", str(exc), sec, line=loc.get((sec, None))) from None
    return decl


def _parse_gauge(cp, sec, loc) -> GaugeDecl:
    d = _read_block(cp, sec, GAUGE_SCHEMA, loc)
    gid = sec[6:]
    if d["kind"] not in ("polynomial", "plane_wave", "polar"):
        raise ScenarioError("E_INVARIANT", f"unknown gauge kind {d['kind']!r}", sec, "kind",
                            loc.get((sec, "kind")))
    if d["kind"] == "plane_wave":
        if d["k"] is None:
            raise ScenarioError("E_MISSING_KEY", "plane_wave needs k", sec, "k",
                                loc.get((sec, None)))
        if math.hypot(*d["k"]) == 0:
            raise ScenarioError("E_INVARIANT", "wave vector must be nonzero", sec, "k",
                                loc.get((sec, "k")))
    return GaugeDecl(gid, **d)


def _resolve_refs(sc: Scenario, loc) -> None:
    ex = sc.experiment

    def need(ids, table, what, key):
        for i in ids:
            if i not in table:
                raise ScenarioError("E_RESOLUTION", f"undeclared {what} {i!r}", "experiment",
                                    key, loc.get(("experiment", key)))

    def choice(key, options):
        if ex[key] not in options:
            raise ScenarioError("E_INVARIANT", f"{key} must be one of {options}", "experiment",
                                key, loc.get(("experiment", key)))

    if sc.kind == "ab-phase":
        choice("potential", ("thin", "finite", "grid"))
        for key in ("path1", "path2"):
            if ex[key] is not None:
                need([ex[key]], sc.paths, "path", key)
        need(ex["loops"], sc.paths, "path", "loops")
        if (ex["path1"] is None) != (ex["path2"] is None):
            raise ScenarioError("E_INVARIANT", "path1 and path2 come together", "experiment",
                                line=loc.get(("experiment", None)))
        if ex["potential"] != "thin" and sc.grid is None:
            raise ScenarioError("E_MISSING_SECTION", "grid potentials need [grid]", "grid")
        for key in ("loops",):
            for i in ex[key]:
                if not sc.paths[i].closed:
                    raise ScenarioError("E_INVARIANT", f"path {i!r} is not closed",
                                        "experiment", key, loc.get(("experiment", key)))
    elif sc.kind == "gauge-classify":
        choice("first", ("thin", "finite", "zero"))
        choice("second", ("thin", "finite", "zero"))
        need(ex["transform_first"], sc.gauges, "gauge", "transform_first")
        need(ex["transform_second"], sc.gauges, "gauge", "transform_second")
        need(ex["loops"], sc.paths, "path", "loops")
    elif sc.kind in ("propagate", "locality-report"):
        if sc.solenoid.radius <= 0:
            raise ScenarioError("E_INVARIANT", "time-domain runs need a finite radius",
                                "solenoid", "radius", loc.get(("solenoid", "radius")))
        if ex["cadence"] < 1:
            raise ScenarioError("E_INVARIANT", "cadence must be >= 1", "experiment", "cadence",
                                loc.get(("experiment", "cadence")))
        if sc.kind == "propagate" and ex["residual_gauge"] is not None:
            need([ex["residual_gauge"]], sc.gauges, "gauge", "residual_gauge")
        if sc.kind == "locality-report":
            for ch in ex["channels"]:
                if ch not in ("A", "E"):
                    raise ScenarioError("E_INVARIANT", f"unknown channel {ch!r}", "experiment",
                                        "channels", loc.get(("experiment", "channels")))


def _check_cfl(sc: Scenario, loc) -> None:
    if sc.kind not in ("propagate", "locality-report") or sc.experiment.get("dt") is None:
        return
    g = sc.grid
    nu = courant_number(sc.c, sc.experiment["dt"], g.dx, g.dy)
    if nu > CFL_MAX * (1 + 1e-12):
        raise ScenarioError("E_CFL", f"Courant number {nu:.4g} exceeds {CFL_MAX}",
                            "experiment", "dt", loc.get(("experiment", "dt")))


# --- serialization ---------------------------------------------------------

def _block(name: str, values: dict, schema: dict) -> list:
    lines = [f"[{name}]"]
    for key, (_, default) in schema.items():
        v = values.get(key, default)
        if v is None or v is ...:
            continue
        if v == () and default == ():
            continue
        lines.append(f"{key} = {_fmt(v)}")
    return lines + [""]


def serialize(sc: Scenario) -> str:
    """Scenario text such that ``parse_scenario(serialize(s)) == s``."""
    out = _block("scenario", {"name": sc.name, "kind": sc.kind, "seed": sc.seed,
                              "description": sc.description}, SCHEMA["scenario"])
    if sc.grid is not None:
        out += _block("grid", sc.grid.__dict__, SCHEMA["grid"])
    out += _block("physics", {"c": sc.c, "kappa": sc.kappa}, SCHEMA["physics"])
    if sc.solenoid is not None:
        s = sc.solenoid
        out += _block("solenoid", {"center": s.center, "radius": s.radius, "flux": s.flux,
                                   "t_on": s.t_on, "ramp": s.ramp,
                                   "feed_dipole": s.feed_dipole,
                                   "exclusion_radius": sc.exclusion_radius},
                      SCHEMA["solenoid"])
    if sc.interferometer is not None:
        it = sc.interferometer
        out += _block("interferometer", {"lambda_b": it.lambda_b, "l": it.l, "d": it.d,
                                         "screen_half_width": sc.screen_half_width,
                                         "screen_points": sc.screen_points},
                      SCHEMA["interferometer"])
    out += _block("tolerances", sc.tolerances, SCHEMA["tolerances"])
    for pid, p in sc.paths.items():
        d = {k: v for k, v in p.__dict__.items() if k != "id"}
        out += _block(f"path.{pid}", d, PATH_SCHEMA)
    for gid, g in sc.gauges.items():
        d = {k: v for k, v in g.__dict__.items() if k != "id"}
        out += _block(f"gauge.{gid}", d, GAUGE_SCHEMA)
    out += _block("experiment", sc.experiment, EXPERIMENT_SCHEMA[sc.kind])
    if sc.checks:
        out += ["[checks]"] + [f"{k} = {_fmt(v)}" for k, v in sc.checks.items()] + [""]
    return "\n".join(out)
