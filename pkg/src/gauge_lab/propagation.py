"""Leapfrog solver for the Lorenz-gauge wave equations and locality diagnostics.

Units: eps0 = 1 and mu0 = 1/c^2, so the potentials obey

    phi_tt = c^2 lap(phi) + c^2 rho,     A_tt = c^2 lap(A) + J.

The solenoid enters as J = c^2 curl(M z) for a magnetisation-like profile
M that is uniform inside radius R and drops to zero across two cells; the
static field is then B_z = M and the enclosed flux is the integral of M.
Because J is built with the same central differences as ``div``, it is
exactly divergence-free on the grid.

A nonzero ``feed_dipole`` adds the charge separated by the driving source
while the current ramps: a polarisation P = p g(t) b(x) x inside the disk,
with rho = -div P and current dP/dt, so charge is conserved exactly.  A
purely azimuthal current has no longitudinal part and looks the same in the
Coulomb and Lorenz gauges; the feed is what gives the Coulomb gauge its
instantaneous response.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .analytic import SolenoidSpec
from .fields import (Disk, Grid2, PotentialState, ScalarField2, VectorField2,
                     curl_z, derive_fields, div, field_energy, grad, laplacian)
from .gauge import coulomb_project

CFL_MAX = 0.5
DEFAULT_RAMP_STEPS = 5


class CFLError(ValueError):
    pass


def courant_number(c: float, dt: float, dx: float, dy: float) -> float:
    return c * dt * math.sqrt(1.0 / dx**2 + 1.0 / dy**2)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("GAUGE_LAB_THREADS", "1")))
    except ValueError:
        return 1


# --- source model ----------------------------------------------------------

def _smootherstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6 * u - 15) + 10)


def ramp_profile(t, t_on: float, tau: float):
    """Raised-cosine switch-on: 0 before t_on, 1 after t_on + tau, C^2 joins."""
    t = np.asarray(t, float)
    if tau == 0:
        return (t >= t_on).astype(float)
    s = np.clip((t - t_on) / tau, 0.0, 1.0)
    return s - np.sin(2 * np.pi * s) / (2 * np.pi)


def feed_profile(t, t_on: float, tau: float):
    """Bump ``g`` with peak 1 during the ramp and its time derivative."""
    t = np.asarray(t, float)
    s = (t - t_on) / tau
    on = (s >= 0) & (s <= 1)
    g = np.where(on, 0.5 * (1 - np.cos(2 * np.pi * s)), 0.0)
    dg = np.where(on, np.pi * np.sin(2 * np.pi * s) / tau, 0.0)
    return g, dg


@dataclass(frozen=True, eq=False)
class SourceModel:
    spec: SolenoidSpec
    tau: float
    m_amplitude: float
    jx: np.ndarray
    jy: np.ndarray
    outer_radius: float
    feed_bump: Optional[np.ndarray] = None
    feed_rho: Optional[np.ndarray] = None

    @classmethod
    def build(cls, spec: SolenoidSpec, grid: Grid2, tau: float, c: float = 1.0) -> "SourceModel":
        if spec.radius <= 0:
            raise ValueError("time-domain source needs a solenoid of finite radius")
        X, Y = grid.coords()
        r = np.hypot(X - spec.center[0], Y - spec.center[1])
        w = grid.h  # half-width: the current sheet spans two cells
        shape = 1.0 - _smootherstep((r - (spec.radius - w)) / (2 * w))
        # flux calibration: the static field equals M, so its cell sum is the flux
        m0 = spec.flux / (np.sum(shape) * grid.dx * grid.dy)
        M = m0 * shape
        jx = c * c * np.gradient(M, grid.dy, axis=1, edge_order=1)
        jy = -c * c * np.gradient(M, grid.dx, axis=0, edge_order=1)
        bump = rho = None
        if spec.feed_dipole != 0.0:
            if tau <= 0:
                raise ValueError("a feed dipole needs a ramp of finite duration")
            rb = 0.5 * spec.radius
            bump = np.where(r < rb, np.cos(0.5 * np.pi * r / rb) ** 4, 0.0)
            bump /= np.sum(bump) * grid.dx * grid.dy
            # rho = -div P for P = feed * g(t) * bump * x_hat
            rho = -spec.feed_dipole * np.gradient(bump, grid.dx, axis=0, edge_order=1)
        return cls(spec, tau, m0, jx, jy, spec.radius + w, bump, rho)

    def terms(self, t: float):
        """Source terms ``(rho, jx, jy)`` at time ``t`` (``rho`` may be None)."""
        s = self.spec
        f = float(ramp_profile(t, s.t_on, self.tau))
        jx = f * self.jx
        jy = f * self.jy
        rho = None
        if self.feed_bump is not None:
            g, dg = feed_profile(t, s.t_on, self.tau)
            g, dg = float(g), float(dg)
            jx = jx + s.feed_dipole * dg * self.feed_bump
            rho = g * self.feed_rho
        return rho, jx, jy


# --- stepper ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FDTDState:
    """Two time levels of (phi, Ax, Ay) on a grid, plus solver settings."""
    grid: Grid2
    dt: float
    phi: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    phi_prev: np.ndarray
    ax_prev: np.ndarray
    ay_prev: np.ndarray
    step: int = 0
    t0: float = 0.0
    c: float = 1.0
    damping_width: int = 16
    damping_strength: Optional[float] = None
    boundary: str = "sponge"
    source: Optional[SourceModel] = None
    cfl_max: float = CFL_MAX
    threads: int = 1
    sigma: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        g = self.grid
        nu = courant_number(self.c, self.dt, g.dx, g.dy)
        if nu > self.cfl_max * (1 + 1e-12):
            raise CFLError(f"Courant number {nu:.4f} exceeds {self.cfl_max}")
        if self.boundary not in ("sponge", "periodic"):
            raise ValueError("boundary must be 'sponge' or 'periodic'")
        if self.sigma is None:
            object.__setattr__(self, "sigma", self._damping_profile())

    @classmethod
    def initial(cls, grid: Grid2, dt: float, phi=None, ax=None, ay=None,
                phi_prev=None, ax_prev=None, ay_prev=None, **kw) -> "FDTDState":
        z = lambda a: np.zeros(grid.shape) if a is None else np.array(a, float)
        phi, ax, ay = z(phi), z(ax), z(ay)
        phi_prev = phi.copy() if phi_prev is None else np.array(phi_prev, float)
        ax_prev = ax.copy() if ax_prev is None else np.array(ax_prev, float)
        ay_prev = ay.copy() if ay_prev is None else np.array(ay_prev, float)
        return cls(grid, dt, phi, ax, ay, phi_prev, ax_prev, ay_prev, **kw)

    @property
    def time(self) -> float:
        return self.t0 + self.step * self.dt

    def _damping_profile(self) -> Optional[np.ndarray]:
        if self.boundary == "periodic":
            return None
        g = self.grid
        W = self.damping_width
        if W <= 0:
            return np.zeros(g.shape)
        strength = self.damping_strength
        if strength is None:
            strength = 24.0 * self.c / (W * g.h)
        i = np.arange(g.nx, dtype=float)
        j = np.arange(g.ny, dtype=float)
        di = np.maximum(0.0, np.maximum(W - i, i - (g.nx - 1 - W))) / W
        dj = np.maximum(0.0, np.maximum(W - j, j - (g.ny - 1 - W))) / W
        return strength * (di[:, None] ** 2 + dj[None, :] ** 2)

    def potential_state(self) -> PotentialState:
        g, t = self.grid, self.time
        return PotentialState(
            ScalarField2(g, self.phi, t),
            VectorField2(g, self.ax, self.ay, t),
            t,
            VectorField2(g, self.ax_prev, self.ay_prev, t - self.dt),
            ScalarField2(g, self.phi_prev, t - self.dt),
            self.dt,
        )

    def damping_inner_distance(self, center) -> float:
        """Distance from ``center`` to the inner edge of the damping layer."""
        g = self.grid
        W = self.damping_width if self.boundary == "sponge" else 0
        return min(center[0] - (g.x0 + W * g.dx), (g.x1 - W * g.dx) - center[0],
                   center[1] - (g.y0 + W * g.dy), (g.y1 - W * g.dy) - center[1])


def _slabs(n: int, parts: int):
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _update_rows(out, X, Xp, S, sigma, st: FDTDState, rows, periodic):
    """Leapfrog update of rows ``a:b`` with damping X_tt + sigma X_t = c^2 lap X + S."""
    a, b = rows
    g = st.grid
    dt2 = st.dt * st.dt
    c2 = st.c * st.c
    if periodic:
        P = np.pad(X, 1, mode="wrap")
    else:
        P = np.pad(X, 1)
    Xs = X[a:b]
    lap = ((P[a + 2:b + 2, 1:-1] - 2 * Xs + P[a:b, 1:-1]) / g.dx**2
           + (P[a + 1:b + 1, 2:] - 2 * Xs + P[a + 1:b + 1, :-2]) / g.dy**2)
    rhs = 2 * Xs + dt2 * c2 * lap
    if S is not None:
        rhs = rhs + dt2 * S[a:b]
    if sigma is None:
        out[a:b] = rhs - Xp[a:b]
    else:
        hs = 0.5 * st.dt * sigma[a:b]
        out[a:b] = (rhs - (1 - hs) * Xp[a:b]) / (1 + hs)


def fdtd_lorenz_step(state: FDTDState) -> FDTDState:
    """Advance one leapfrog step.  Slab partitioning never changes the result."""
    st = state
    rho = jx = jy = None
    if st.source is not None:
        rho, jx, jy = st.source.terms(st.time)
        if rho is not None:
            rho = st.c * st.c * rho
    periodic = st.boundary == "periodic"
    new = [np.empty_like(st.phi) for _ in range(3)]
    jobs = [(new[0], st.phi, st.phi_prev, rho),
            (new[1], st.ax, st.ax_prev, jx),
            (new[2], st.ay, st.ay_prev, jy)]
    slabs = _slabs(st.grid.nx, max(1, st.threads))
    tasks = [(job, rows) for job in jobs for rows in slabs]
    run = lambda task: _update_rows(*task[0], st.sigma, st, task[1], periodic)
    if st.threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=st.threads) as pool:
            list(pool.map(run, tasks))
    else:
        for task in tasks:
            run(task)
    return replace(st, phi=new[0], ax=new[1], ay=new[2],
                   phi_prev=st.phi, ax_prev=st.ax, ay_prev=st.ay, step=st.step + 1)


# --- switch-on scenario ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class Frame:
    index: int
    step: int
    time: float
    state: PotentialState
    e: VectorField2
    bz: ScalarField2


@dataclass
class Series:
    frames: list
    dt: float
    c: float
    source: SourceModel
    damping_width: int
    damping_distance: float
    gauge: str = "LORENZ"
    warnings: list = field(default_factory=list)

    @property
    def grid(self) -> Grid2:
        return self.frames[0].state.grid

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.frames])

    @property
    def ramp_end(self) -> float:
        return self.source.spec.t_on + self.source.tau


def default_dt(grid: Grid2, c: float = 1.0, courant: float = CFL_MAX) -> float:
    return courant / (c * math.sqrt(1 / grid.dx**2 + 1 / grid.dy**2))


def switch_on_scenario(spec: SolenoidSpec, grid: Grid2, t_end: float,
                       dt: Optional[float] = None, cadence: int = 4, c: float = 1.0,
                       damping_width: int = 16, damping_strength: Optional[float] = None,
                       threads: Optional[int] = None) -> Series:
    """Run the Lorenz-gauge switch-on of a solenoid from rest.

    Frames are recorded every ``cadence`` steps, starting at t = 0.  If
    ``spec.ramp`` is zero the switch-on is smoothed over five steps.  When
    the outgoing front would reach the damping layer before ``t_end``, the
    series stops early and a warning is recorded.
    """
    dt = default_dt(grid, c) if dt is None else dt
    tau = spec.ramp if spec.ramp > 0 else DEFAULT_RAMP_STEPS * dt
    if grid.disk is None:
        grid = grid.with_disk(Disk(spec.center[0], spec.center[1], spec.radius))
    source = SourceModel.build(spec, grid, tau, c)
    st = FDTDState.initial(grid, dt, c=c, damping_width=damping_width,
                           damping_strength=damping_strength, source=source,
                           threads=default_threads() if threads is None else threads)
    reach = st.damping_inner_distance(spec.center)
    if reach <= source.outer_radius:
        raise ValueError("solenoid must sit inside the undamped region")
    t_hit = spec.t_on + (reach - source.outer_radius) / c
    notes = []
    if t_end > t_hit:
        notes.append(f"front reaches the damping layer at t={t_hit:.6g}; "
                     f"series truncated before t_end={t_end:.6g}")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
        t_stop = t_hit
    else:
        t_stop = t_end
    n_steps = int(math.floor(t_stop / dt + 1e-9))
    frames = []
    for n in range(n_steps + 1):
        if n % cadence == 0:
            s = st.potential_state()
            e, bz = derive_fields(s)
            frames.append(Frame(len(frames), st.step, st.time, s, e, bz))
        if n < n_steps:
            st = fdtd_lorenz_step(st)
    return Series(frames, dt, c, source, damping_width, reach, "LORENZ", notes)


def coulomb_companion(series: Series, tol: float = 1e-8) -> Series:
    """Coulomb-gauge representative of every frame of a Lorenz run."""
    frames = []
    for f in series.frames:
        s, _ = coulomb_project(f.state, tol=tol)
        e, bz = derive_fields(s)
        frames.append(Frame(f.index, f.step, f.time, s, e, bz))
    return Series(frames, series.dt, series.c, series.source, series.damping_width,
                  series.damping_distance, "COULOMB", list(series.warnings))


# --- diagnostics -----------------------------------------------------------

CHANNELS = ("A", "E", "phi", "B")


def _interp(values, grid, x, y):
    from .interferometry import _bilinear
    return _bilinear(values, grid, x, y)


def channel_history(series: Series, point, channel: str = "A"):
    """Times and magnitudes of one channel at ``point`` (bilinear)."""
    g = series.grid
    x, y = point
    ts, vs = [], []
    for f in series.frames:
        if channel == "A":
            v = math.hypot(_interp(f.state.a.vx, g, x, y), _interp(f.state.a.vy, g, x, y))
            t = f.time
        elif channel == "E":
            v = math.hypot(_interp(f.e.vx, g, x, y), _interp(f.e.vy, g, x, y))
            t = f.e.time
        elif channel == "phi":
            v = abs(_interp(f.state.phi.values, g, x, y))
            t = f.time
        elif channel == "B":
            v = abs(_interp(f.bz.values, g, x, y))
            t = f.time
        else:
            raise ValueError(f"unknown channel {channel!r}")
        ts.append(t)
        vs.append(v)
    return np.array(ts), np.array(vs)


def worldline_phase(series: Series, points, times, kappa: float = 1.0, sub: int = 8) -> float:
    """Phase kappa * integral of (A.dx - phi dt) along a spacetime polyline.

    ``points[k]`` is occupied at ``times[k]``; potentials are linear in time
    between frames and bilinear in space.  Emission and switch-on times are
    left to the caller.
    """
    pts = np.asarray(points, dtype=float)
    ts = np.asarray(times, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(ts) != len(pts) or len(pts) < 2:
        raise ValueError("need matching (n, 2) points and n times, n >= 2")
    frame_t = series.times
    if np.any(np.diff(ts) < 0) or ts[0] < frame_t[0] or ts[-1] > frame_t[-1]:
        raise ValueError("times must be non-decreasing and inside the run")
    g = series.grid

    def potentials(x, y, t):
        k = min(int(np.searchsorted(frame_t, t, side="right")) - 1, len(frame_t) - 2)
        w = (t - frame_t[k]) / (frame_t[k + 1] - frame_t[k])
        out = []
        for f in (series.frames[k], series.frames[k + 1]):
            s = f.state
            out.append(np.array([_interp(s.a.vx, g, x, y), _interp(s.a.vy, g, x, y),
                                 _interp(s.phi.values, g, x, y)]))
        return (1 - w) * out[0] + w * out[1]

    total = 0.0
    u = (np.arange(sub) + 0.5) / sub
    for (p, q), (t0, t1) in zip(zip(pts[:-1], pts[1:]), zip(ts[:-1], ts[1:])):
        for v in u:
            x, y = p + v * (q - p)
            ax, ay, phi = potentials(x, y, t0 + v * (t1 - t0))
            total += (ax * (q - p)[0] + ay * (q - p)[1] - phi * (t1 - t0)) / sub
    return kappa * total


def first_crossing(ts, vs, level: float):
    """Linearly interpolated first time ``vs`` reaches ``level`` (None if never)."""
    hit = np.flatnonzero(vs >= level)
    if len(hit) == 0:
        return None
    k = int(hit[0])
    if k == 0:
        return float(ts[0])
    v0, v1 = vs[k - 1], vs[k]
    return float(ts[k - 1] + (level - v0) / (v1 - v0) * (ts[k] - ts[k - 1]))


@dataclass
class ArrivalRecord:
    radius: float
    t_arrival: float
    threshold: float
    gauge: str
    flag: str = "CAUSAL"
    reference: float = 0.0


@dataclass
class LocalityReport:
    gauge: str
    channel: str
    records: list
    fitted_speed: float
    stderr: float
    sensitivity: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        speed = self.fitted_speed if math.isfinite(self.fitted_speed) else None
        err = self.stderr if math.isfinite(self.stderr) else None
        return {
            "gauge": self.gauge,
            "channel": self.channel,
            "probes": [{"radius": r.radius, "t_arrival": r.t_arrival, "flag": r.flag}
                       for r in self.records],
            "fitted_speed": speed,
            "stderr": err,
            "sensitivity": {f"{k:g}": v for k, v in self.sensitivity.items()},
        }


def probe_point(series: Series, radius: float, angle: float = 0.0):
    cx, cy = series.source.spec.center
    return (cx + radius * math.cos(angle), cy + radius * math.sin(angle))


def signal_locality_report(series: Series, radii: Sequence[float], threshold: float = 0.01,
                           channel: str = "A", angle: float = 0.0,
                           sensitivity: Sequence[float] = (0.005, 0.01, 0.02)) -> LocalityReport:
    """First-arrival times at probes and the front speed fitted through them.

    Arrival is the first time the channel magnitude reaches ``threshold``
    times its largest value over the run at that probe.  A probe that
    responds earlier than light could reach it from the source is flagged
    INSTANTANEOUS; the allowance covers the ramp, one frame interval and
    the two-cell smearing of the discrete front.
    """
    spec = series.source.spec
    dframe = float(np.min(np.diff(series.times))) if len(series.frames) > 1 else series.dt
    margin = series.source.tau + dframe + 2 * series.grid.h / series.c

    def arrivals(level):
        out = []
        for r in radii:
            if r >= series.damping_distance:
                raise ValueError(f"probe radius {r} lies in the damping layer")
            ts, vs = channel_history(series, probe_point(series, r, angle), channel)
            ref = float(np.max(vs))
            t = first_crossing(ts, vs, level * ref) if ref > 0 else None
            if t is None:
                raise ValueError(f"channel {channel} never exceeds threshold at r={r}")
            out.append((r, t, ref))
        return out

    recs = []
    for r, t, ref in arrivals(threshold):
        causal = spec.t_on + (r - series.source.outer_radius) / series.c
        flag = "INSTANTANEOUS" if t < causal - margin else "CAUSAL"
        recs.append(ArrivalRecord(r, t, threshold, series.gauge, flag, ref))
    speed, err = _fit_speed([r.radius for r in recs], [r.t_arrival for r in recs])
    sens = {}
    for lev in sensitivity:
        sens[lev] = [t for _, t, _ in arrivals(lev)]
    return LocalityReport(series.gauge, channel, recs, speed, err, sens)


def _fit_speed(radii, times):
    if len(radii) < 2:
        return math.nan, math.nan
    fit = stats.linregress(radii, times)
    if fit.slope <= 0:
        return math.inf, math.inf
    speed = 1.0 / fit.slope
    return float(speed), float(fit.stderr / fit.slope**2)


def undamped_mask(series: Series, buffer: int = 8, disk: bool = False) -> np.ndarray:
    """Probe-accessible nodes at least ``buffer`` cells clear of the damping layer.

    The sponge damps phi and A at different rates where its profile varies,
    so the Lorenz condition is not kept inside it; the buffer keeps that
    leak out of the diagnostics until the front has long reached the layer.
    ``disk=True`` keeps the excluded disk in the mask.
    """
    g = series.grid
    W = series.damping_width + buffer
    inner = np.zeros(g.shape, dtype=bool)
    inner[W + 1:g.nx - W - 1, W + 1:g.ny - W - 1] = True
    return (g.with_disk(None) if disk else g).probe_mask() & inner


def _vacuum_mask(series: Series, extra_cells: float = 3.0) -> np.ndarray:
    g = series.grid
    X, Y = g.coords()
    cx, cy = series.source.spec.center
    r = np.hypot(X - cx, Y - cy)
    return undamped_mask(series) & (r > series.source.outer_radius + extra_cells * g.h)


def lorenz_history(series: Series) -> np.ndarray:
    """Max-norm of the Lorenz residual per frame, outside the damping layer.

    The solenoid disk is included: the constraint holds everywhere, and at
    the end of the ramp the residual left by the source sits inside it.
    """
    from .gauge import lorenz_residual
    mask = undamped_mask(series, disk=True)
    return np.array([lorenz_residual(f.state, series.c).max_norm(mask) if f.step > 0 else 0.0
                     for f in series.frames])


def lorenz_growth(series: Series, floor: float = 1e-12) -> float:
    """Largest post-ramp Lorenz residual over its value at the end of the ramp.

    Both are offset by ``floor * max|A| / h`` so that a residual sitting at
    round-off does not turn into a ratio of noise.
    """
    hist = lorenz_history(series)
    after = hist[series.times >= series.ramp_end]
    if len(after) == 0:
        return math.nan
    peak = max(float(np.max(f.state.a.magnitude())) for f in series.frames)
    eps = floor * peak / series.grid.h
    return float((np.max(after) + eps) / (after[0] + eps))


def _channel_values(f: Frame, channel: str) -> np.ndarray:
    return {"phi": lambda: f.state.phi.values, "ax": lambda: f.state.a.vx,
            "ay": lambda: f.state.a.vy, "ex": lambda: f.e.vx, "ey": lambda: f.e.vy,
            "bz": lambda: f.bz.values}[channel]()


def wave_residual(series: Series, channel: str = "ay") -> np.ndarray:
    """Max-norm of X_tt / c^2 - lap X per interior frame, in the source-free region.

    Time derivatives use the frame spacing, so the error is
    O(dx^2 + frame_dt^2).
    """
    g = series.grid
    mask = _vacuum_mask(series)
    ts = series.times
    h = np.diff(ts)
    if not np.allclose(h, h[0], rtol=1e-9):
        raise ValueError("frames must be uniformly spaced")
    h = h[0]
    out = []
    vals = [_channel_values(f, channel) for f in series.frames]
    for n in range(1, len(vals) - 1):
        xtt = (vals[n + 1] - 2 * vals[n] + vals[n - 1]) / h**2
        res = xtt / series.c**2 - laplacian(vals[n], g.dx, g.dy)
        out.append(float(np.max(np.abs(res[mask]), initial=0.0)))
    return np.array(out)


def laplace_residual(series: Series, channel: str = "phi") -> np.ndarray:
    """Max-norm of div(grad X) per frame in the source-free region.

    This is the stride-two Laplacian that the Coulomb projection inverts,
    so an instantaneous Coulomb potential satisfies it to round-off.
    """
    g = series.grid
    mask = _vacuum_mask(series)
    out = []
    for f in series.frames:
        lap = div(grad(ScalarField2(g, _channel_values(f, channel)))).values
        out.append(float(np.max(np.abs(lap[mask]), initial=0.0)))
    return np.array(out)


def confinement_ratio(frame: Frame, radius: float, margin_cells: float = 2.0) -> float:
    """max |B_z| outside ``radius + margin`` over max |B_z| inside ``radius``."""
    g = frame.bz.grid
    X, Y = g.coords()
    d = g.disk
    r = np.hypot(X - d.cx, Y - d.cy)
    b = np.abs(frame.bz.values)
    interior = float(np.max(b[r < radius], initial=0.0))
    outside = g.probe_mask(margin=0.0) & (r > radius + margin_cells * g.h)
    if interior == 0:
        return math.inf if np.any(b[outside] > 0) else 0.0
    return float(np.max(b[outside], initial=0.0)) / interior


def max_confinement(series: Series) -> float:
    return max(confinement_ratio(f, series.source.spec.radius) for f in series.frames)


def energy_history(series: Series, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Field energy per frame with B_z averaged onto E's half level.

    Pairing E at t - dt/2 with B at t would leave an O(dt) wobble in a
    lossless run; the average keeps it second order.
    """
    out = []
    for f in series.frames:
        s = f.state
        bz = f.bz if s.a_prev is None else curl_z((s.a + s.a_prev) * 0.5)
        out.append(field_energy(f.e, bz, series.c, mask))
    return np.array(out)
