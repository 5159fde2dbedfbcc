"""Execute a parsed scenario, write its artifacts and score its checks."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .analytic import GaugeChi, SolenoidSpec, finite_solenoid, finite_solenoid_field, \
    thin_solenoid_field
from .fields import PotentialState, ScalarField2, VectorField2, derive_fields
from .gauge import apply_narrow, classify_equivalence, lorenz_residual
from .interferometry import (InterferometerSpec, LoopPath, _bilinear, central_fringe,
                             flux_via_stokes, fringe_shift, holonomy, interference_pattern,
                             line_integral_A, loop_phase_diff, random_loop, winding_number)
from .propagation import (Series, coulomb_companion, energy_history, lorenz_growth,
                          max_confinement, probe_point, signal_locality_report,
                          switch_on_scenario)
from .scenario import CHECKS, Scenario


@dataclass
class CheckResult:
    name: str
    measured: object
    threshold: object
    op: str
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "measured": self.measured, "op": self.op,
                "threshold": self.threshold, "passed": self.passed, "note": self.note}


@dataclass
class RunReport:
    scenario: str
    wall_clock: float
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        # no wall-clock here: report.json must be reproducible byte for byte
        return {"scenario": self.scenario, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks],
                "artifacts": list(self.artifacts), "warnings": list(self.warnings)}


def _compare(op, measured, threshold) -> bool:
    if measured is None:
        return False
    if op == "==":
        return str(measured) == str(threshold)
    if isinstance(measured, float) and math.isnan(measured):
        return False
    return {"<": measured < threshold, "<=": measured <= threshold,
            ">": measured > threshold}[op]


class _Writer:
    def __init__(self, out: Path):
        self.out = out
        self.files = []
        out.mkdir(parents=True, exist_ok=True)

    def text(self, name: str, text: str):
        (self.out / name).write_text(text)
        self.files.append(name)

    def json(self, name: str, obj):
        self.text(name, io.dumps(obj))


def run(sc: Scenario, out_dir, seed: Optional[int] = None,
        threads: Optional[int] = None) -> RunReport:
    """Run ``sc`` and write artifacts plus ``report.json`` into ``out_dir``."""
    t0 = time.perf_counter()
    w = _Writer(Path(out_dir))
    seed = sc.seed if seed is None else seed
    notes = []
    try:
        measured = _KINDS[sc.kind](sc, w, seed, threads, notes)
    except Exception as exc:
        raise RuntimeError(f"scenario {sc.name!r}: {exc}") from exc
    report = RunReport(sc.name, 0.0, warnings=notes)
    for name, threshold in sc.checks.items():
        op = CHECKS[sc.kind][name]
        value = measured.get(name)
        note = "" if name in measured else "not measured by this configuration"
        report.checks.append(CheckResult(name, value, threshold, op,
                                         _compare(op, value, threshold), note))
    report.artifacts = sorted(w.files + ["report.json"])
    w.json("report.json", report.to_dict())
    report.wall_clock = time.perf_counter() - t0
    return report


# --- ab-phase --------------------------------------------------------------

def _ab_phase(sc: Scenario, w: _Writer, seed, threads, notes) -> dict:
    ex = sc.experiment
    sol = sc.solenoid
    potential = ex["potential"]
    bz = None
    if potential == "thin":
        a = SolenoidSpec(sol.center, 0.0, sol.flux)
    elif potential == "finite":
        a = sol
    else:
        grid = sc.build_grid()
        a = VectorField2.from_function(grid, finite_solenoid_field(sol), keep_exact=False)
    if sc.grid is not None and sol.radius > 0:
        bz = ScalarField2.cell_average(sc.build_grid(), lambda x, y: finite_solenoid(x, y, sol)[2])

    out = {}
    rtol = sc.tolerances["quadrature"]
    if ex["path1"] is not None:
        p1 = sc.paths[ex["path1"]].build()
        p2 = sc.paths[ex["path2"]].build()
        spec = sc.interferometer or InterferometerSpec(kappa=sc.kappa)
        res = loop_phase_diff(spec, a, p1, p2)
        wnd = winding_number(LoopPath.join(p1, p2), sol.center)
        out["phase_error"] = abs(res.delta_s_over_hbar + sc.kappa * wnd * sol.flux)
        w.json("phase.json", res.to_dict(spec))

    loops = [(i, sc.paths[i].build()) for i in ex["loops"]]
    rng = np.random.default_rng(seed)
    r_min = max(sol.radius, sc.exclusion_radius or 0.0) * 1.5 or 0.5
    for k in range(ex["random_loops"]):
        wnd = int(rng.integers(-2, 3))
        loops.append((f"random{k}", random_loop(rng, sol.center, wnd, r_min, 4 * r_min)))
    rows = []
    loop_err = 0.0
    stokes_err = None
    for lid, lp in loops:
        wnd = winding_number(lp, sol.center)
        val = line_integral_A(a, lp, rtol=rtol)
        err = abs(val - wnd * sol.flux) / max(abs(sol.flux), 1e-300)
        loop_err = max(loop_err, err)
        row = {"id": lid, "winding": wnd, "value": val}
        if bz is not None and lp.is_simple():
            st = flux_via_stokes(bz, lp)
            row["stokes"] = st
            e = abs(val - st) / max(abs(val), 1e-300) if wnd else abs(val - st)
            stokes_err = e if stokes_err is None else max(stokes_err, e)
        rows.append(row)
    if loops:
        out["loop_error"] = loop_err
        w.json("loops.json", {"flux": sol.flux, "loops": rows})
    if stokes_err is not None:
        out["stokes_error"] = stokes_err
    return out


# --- gauge-classify --------------------------------------------------------

def _static_state(kind: str, sc: Scenario, grid) -> PotentialState:
    sol = sc.solenoid
    if kind == "zero":
        return PotentialState.zero(grid)
    if kind == "thin":
        f = thin_solenoid_field(SolenoidSpec(sol.center, 0.0, sol.flux))
    else:
        f = finite_solenoid_field(sol)
    return PotentialState.from_static(VectorField2.from_function(grid, f, skip_disk=True))


def _flux_of(kind: str, sc: Scenario) -> float:
    return 0.0 if kind == "zero" else sc.solenoid.flux


def _gauge_classify(sc: Scenario, w: _Writer, seed, threads, notes) -> dict:
    ex = sc.experiment
    grid = sc.build_grid()
    loops = [sc.paths[i].build() for i in ex["loops"]]
    ids = list(ex["loops"])
    if not loops:
        d = grid.disk
        span = min(d.cx - grid.x0, grid.x1 - d.cx, d.cy - grid.y0, grid.y1 - d.cy)
        loops = [LoopPath.circle((d.cx, d.cy), 0.5 * (d.radius + span), n=128)]
        ids = ["enclosing"]
    tol = sc.tolerances["classify"]
    s1 = _static_state(ex["first"], sc, grid)
    s2 = _static_state(ex["second"], sc, grid)
    base = classify_equivalence(s1, s2, loops, tol, ids)
    w.json("verdict.json", base.to_dict())
    expect = _flux_of(ex["second"], sc) - _flux_of(ex["first"], sc)
    out = {"label": base.label.value,
           "loop_difference_error": max(abs(v - wnd * expect)
                                        for _, wnd, v in base.loop_integrals)}
    if ex["transform_first"] or ex["transform_second"]:
        t1, t2 = s1, s2
        for gid in ex["transform_first"]:
            t1 = apply_narrow(t1, sc.gauges[gid].build(sc.c, sc.solenoid))
        for gid in ex["transform_second"]:
            t2 = apply_narrow(t2, sc.gauges[gid].build(sc.c, sc.solenoid))
        moved = classify_equivalence(t1, t2, loops, tol, ids)
        w.json("verdict_transformed.json", moved.to_dict())
        out["label_transformed"] = moved.label.value
        change = 0.0
        for lp in loops:
            for a, b in ((s1, t1), (s2, t2)):
                change = max(change, abs(holonomy(b.a, lp, sc.kappa) - holonomy(a.a, lp, sc.kappa)))
        out["holonomy_change"] = change
    return out


# --- pattern ---------------------------------------------------------------

def _pattern(sc: Scenario, w: _Writer, seed, threads, notes) -> dict:
    spec = sc.interferometer
    half = sc.screen_half_width or spec.fringe_period
    xs = np.linspace(-half, half, sc.screen_points)
    cell = xs[1] - xs[0]
    off = interference_pattern(spec, 0.0, xs)
    worst = 0.0
    period = 0.0
    rows = []
    on = off
    for k, flux in enumerate(sc.experiment["fluxes"]):
        ds = -spec.kappa * flux
        inten = interference_pattern(spec, ds, xs)
        shifted = interference_pattern(spec, ds + 2 * np.pi, xs)
        period = max(period, float(np.max(np.abs(shifted - inten))))
        x_c = central_fringe(xs, inten)
        pred = fringe_shift(spec, flux)
        worst = max(worst, abs(x_c - pred) / cell)
        rows.append({"flux": flux, "delta_s_over_hbar": ds, "predicted": pred, "measured": x_c})
        w.text(f"pattern_{k}.csv", io.pattern_to_csv(xs, inten))
        if flux != 0:
            on = inten
    w.json("fringes.json", {"screen_cell": cell, "fringes": rows})
    w.text("pattern_plot.csv", emit_plot_data({"x": xs, "on": on, "off": off}, "pattern"))
    return {"fringe_shift_cells": worst, "periodicity_error": period}


# --- time domain -----------------------------------------------------------

def _series(sc: Scenario, threads, notes) -> Series:
    ex = sc.experiment
    grid = sc.build_grid()
    s = switch_on_scenario(sc.solenoid, grid, ex["t_end"], ex["dt"], ex["cadence"], sc.c,
                           ex["damping_width"], ex["damping_strength"],
                           threads if threads is not None else ex["threads"])
    notes.extend(s.warnings)
    return s


def _frame_artifacts(series: Series, w: _Writer, every: int, tag: str):
    frames = series.frames
    picks = frames[::every] if every > 0 else [frames[-1]]
    for f in picks:
        w.text(f"{tag}_A_{f.index:04d}.csv", io.field_to_csv(f.state.a, f.index))
        w.text(f"{tag}_bz_{f.index:04d}.csv", io.field_to_csv(f.bz, f.index))
    last = frames[-1]
    w.text(f"{tag}_bz_heatmap.csv", emit_plot_data(last.bz, "frame"))


def residual_gauge_changes(state: PotentialState, chi: GaugeChi, loop: LoopPath,
                           c: float = 1.0, kappa: float = 1.0) -> dict:
    """Effect of a residual (wave-equation) gauge function on one state.

    Each change is divided by its O(h^2 + dt^2) scale, so values of order
    one or below mean the change is pure discretisation error.
    """
    p = chi.params
    k = math.hypot(*p["k"])
    amp, om = p["amplitude"], p["omega"]
    g = state.grid
    mask = g.probe_mask()
    eps = k * k * g.h * g.h + om * om * state.dt * state.dt
    moved = apply_narrow(state, chi)
    dl = (lorenz_residual(moved, c) - lorenz_residual(state, c)).max_norm(mask)
    e0, b0 = derive_fields(state)
    e1, b1 = derive_fields(moved)
    df = max((e1 - e0).max_norm(mask), c * (b1 - b0).max_norm(mask))
    per = float(np.sum(np.hypot(*np.diff(loop.vertices, axis=0).T)))
    dh = abs(holonomy(moved.a, loop, kappa) - holonomy(state.a, loop, kappa))
    return {"residual_lorenz_change": dl / (amp * k * k * eps),
            "residual_field_change": df / (amp * k * om * eps),
            "residual_holonomy_change": dh / (abs(kappa) * amp * k * per * eps)}


def _propagate(sc: Scenario, w: _Writer, seed, threads, notes) -> dict:
    ex = sc.experiment
    series = _series(sc, threads, notes)
    _frame_artifacts(series, w, ex["frames_out"], "lorenz")
    out = {"lorenz_growth": lorenz_growth(series), "confinement": max_confinement(series)}
    energy = [float(v) for v in energy_history(series)]
    w.json("energy.json", {"time": list(series.times), "energy": energy})
    if ex["residual_gauge"] is not None:
        chi = sc.gauges[ex["residual_gauge"]].build(sc.c, sc.solenoid)
        if chi.kind != "plane_wave":
            raise ValueError("residual gauge must be a plane wave")
        idx = ex["residual_frame"] if ex["residual_frame"] is not None else len(series.frames) // 2
        state = series.frames[idx].state
        R = sc.solenoid.radius
        loop = LoopPath.circle(sc.solenoid.center, 2 * R + 4 * series.grid.h, n=128)
        changes = residual_gauge_changes(state, chi, loop, sc.c, sc.kappa)
        w.json("residual_gauge.json", {"frame": idx, "time": state.time, **changes})
        out.update(changes)
    return out


def prefront_probe(series: Series, radius: Optional[float] = None,
                   t_probe: Optional[float] = None):
    """Probe radius, time and frame used for the Coulomb pre-front test."""
    spec = series.source.spec
    h = series.grid.h
    tau = series.source.tau
    if radius is None:
        radius = min(spec.radius + 60 * h, series.damping_distance - 2 * h)
    if t_probe is None:
        t_probe = spec.t_on + tau
    limit = spec.t_on + (radius - spec.radius) / series.c - 3 * tau
    if not t_probe < limit:
        raise ValueError(f"probe time {t_probe:.6g} is not before the causal limit {limit:.6g}")
    idx = max(i for i, f in enumerate(series.frames) if f.time <= t_probe)
    return radius, series.frames[idx].time, idx


def prefront_levels(lorenz: Series, coulomb: Series, radius=None, t_probe=None) -> dict:
    """|A| at the pre-front probe in both gauges, relative to the Lorenz peak."""
    r, t, idx = prefront_probe(lorenz, radius, t_probe)
    peak = max(float(np.max(f.state.a.magnitude())) for f in lorenz.frames)
    x, y = probe_point(lorenz, r)
    g = lorenz.grid

    def level(series):
        a = series.frames[idx].state.a
        return math.hypot(_bilinear(a.vx, g, x, y), _bilinear(a.vy, g, x, y)) / peak

    return {"radius": r, "time": t, "frame": idx, "peak": peak,
            "coulomb": level(coulomb), "lorenz": level(lorenz)}


def field_agreement(lorenz: Series, coulomb: Series) -> float:
    """Frame-wise max difference of derived fields, over peak |E| times h^2."""
    mask = lorenz.grid.probe_mask()
    peak = max(f.e.max_norm(mask) for f in lorenz.frames) or 1.0
    diff = 0.0
    for a, b in zip(lorenz.frames, coulomb.frames):
        diff = max(diff, (a.e - b.e).max_norm(mask), lorenz.c * (a.bz - b.bz).max_norm(mask))
    return diff / (peak * lorenz.grid.h ** 2)


def _locality(sc: Scenario, w: _Writer, seed, threads, notes) -> dict:
    ex = sc.experiment
    series = _series(sc, threads, notes)
    out = {"lorenz_growth": lorenz_growth(series), "confinement": max_confinement(series)}
    reports = {}
    for ch in ex["channels"]:
        rep = signal_locality_report(series, ex["radii"], ex["threshold"], ch)
        reports[("LORENZ", ch)] = rep
        w.json(f"arrivals_lorenz_{ch}.json", rep.to_dict())
        out[f"speed_error_{ch}"] = abs(rep.fitted_speed - sc.c) / sc.c
    if ex["coulomb"]:
        cser = coulomb_companion(series, sc.tolerances["solver"])
        rep = signal_locality_report(cser, ex["radii"], ex["threshold"], "A")
        reports[("COULOMB", "A")] = rep
        w.json("arrivals_coulomb_A.json", rep.to_dict())
        lv = prefront_levels(series, cser, ex["prefront_radius"], ex["prefront_time"])
        w.json("prefront.json", lv)
        out["coulomb_prefront"] = lv["coulomb"]
        out["lorenz_prefront"] = lv["lorenz"]
        out["field_agreement"] = field_agreement(series, cser)
        if ("LORENZ", "A") in reports:
            w.text("front_chart.csv", emit_plot_data(
                (reports[("LORENZ", "A")], rep), "arrivals"))
    _frame_artifacts(series, w, ex["frames_out"], "lorenz")
    return out


_KINDS = {"ab-phase": _ab_phase, "gauge-classify": _gauge_classify, "pattern": _pattern,
          "propagate": _propagate, "locality-report": _locality}


# --- plot data -------------------------------------------------------------

def emit_plot_data(artifact, kind: str, stride: int = 4) -> str:
    """Plot-ready CSV text.

    ``pattern``: mapping with ``x``, ``on`` and ``off`` intensities.
    ``arrivals``: pair of (Lorenz, Coulomb) locality reports.
    ``frame``: a scalar field, downsampled by ``stride`` to ``x,y,value``.
    """
    if kind == "pattern":
        return io.table_to_csv(["x", "intensity_flux_on", "intensity_flux_off"],
                               [artifact["x"], artifact["on"], artifact["off"]])
    if kind == "arrivals":
        lor, cou = artifact
        radii = [r.radius for r in lor.records]
        tc = {r.radius: r.t_arrival for r in cou.records}
        return io.table_to_csv(["radius", "t_arrival_lorenz", "t_arrival_coulomb"],
                               [radii, [r.t_arrival for r in lor.records],
                                [tc.get(r) for r in radii]])
    if kind == "frame":
        f = artifact
        xs, ys = f.grid.axes()
        v = f.values if isinstance(f, ScalarField2) else f.magnitude()
        X, Y = np.meshgrid(xs[::stride], ys[::stride], indexing="ij")
        return io.table_to_csv(["x", "y", "value"],
                               [X.ravel(), Y.ravel(), v[::stride, ::stride].ravel()])
    raise ValueError(f"unknown plot kind {kind!r}")
