"""Grid containers, finite-difference operators and Maxwell diagnostics.

Everything lives on a uniform, node-centred 2D grid indexed ``[i, j]`` with
``i`` along x.  Fields are immutable once built: their arrays are flagged
read-only and every operator returns a new field.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

ExactVector = Callable[[np.ndarray, np.ndarray], tuple]

# nodes closer than this many cells to the edge are left out of norms
SKIRT = 2


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    radius: float


@dataclass(frozen=True)
class Grid2:
    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0
    disk: Optional[Disk] = None

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError(f"grid needs at least 8x8 nodes, got {self.nx}x{self.ny}")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid spacing must be positive")
        if self.disk is not None:
            d = self.disk
            if d.radius < 0:
                raise ValueError("excluded disk radius must be non-negative")
            inside = (
                self.x0 < d.cx - d.radius
                and d.cx + d.radius < self.x1
                and self.y0 < d.cy - d.radius
                and d.cy + d.radius < self.y1
            )
            if not inside:
                raise ValueError("excluded disk must lie strictly inside the domain")

    @classmethod
    def centered(cls, n: int, length: float, disk_radius: Optional[float] = None,
                 center=(0.0, 0.0)) -> "Grid2":
        """Square grid of ``n`` nodes spanning ``[-length/2, length/2]``."""
        h = length / (n - 1)
        disk = None if disk_radius is None else Disk(center[0], center[1], disk_radius)
        return cls(n, n, h, h, -length / 2, -length / 2, disk)

    @property
    def x1(self) -> float:
        return self.x0 + (self.nx - 1) * self.dx

    @property
    def y1(self) -> float:
        return self.y0 + (self.ny - 1) * self.dy

    @property
    def h(self) -> float:
        return max(self.dx, self.dy)

    @property
    def shape(self) -> tuple:
        return (self.nx, self.ny)

    def axes(self):
        return (self.x0 + self.dx * np.arange(self.nx),
                self.y0 + self.dy * np.arange(self.ny))

    def coords(self):
        xs, ys = self.axes()
        return np.meshgrid(xs, ys, indexing="ij")

    def with_disk(self, disk: Optional[Disk]) -> "Grid2":
        return Grid2(self.nx, self.ny, self.dx, self.dy, self.x0, self.y0, disk)

    def refined(self) -> "Grid2":
        """Same domain with the spacing halved."""
        return Grid2(2 * self.nx - 1, 2 * self.ny - 1, self.dx / 2, self.dy / 2,
                     self.x0, self.y0, self.disk)

    def disk_mask(self) -> np.ndarray:
        """True on nodes inside the excluded disk."""
        if self.disk is None:
            return np.zeros(self.shape, dtype=bool)
        X, Y = self.coords()
        return np.hypot(X - self.disk.cx, Y - self.disk.cy) <= self.disk.radius

    def probe_mask(self, skirt: int = SKIRT, margin: float = 1.0) -> np.ndarray:
        """Nodes used in norms: off the boundary skirt and clear of the disk.

        ``margin`` is in cells and keeps central-difference stencils from
        reaching into the disk.
        """
        mask = np.zeros(self.shape, dtype=bool)
        mask[skirt:self.nx - skirt, skirt:self.ny - skirt] = True
        if self.disk is not None:
            X, Y = self.coords()
            r = np.hypot(X - self.disk.cx, Y - self.disk.cy)
            mask &= r > self.disk.radius + margin * self.h * 1.01
        return mask


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScalarField2:
    grid: Grid2
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: Grid2, time: float = 0.0) -> "ScalarField2":
        return cls(grid, np.zeros(grid.shape), time)

    @classmethod
    def from_function(cls, grid: Grid2, f, time: float = 0.0) -> "ScalarField2":
        X, Y = grid.coords()
        return cls(grid, np.broadcast_to(f(X, Y), grid.shape), time)

    @classmethod
    def cell_average(cls, grid: Grid2, f, sub: int = 8, time: float = 0.0) -> "ScalarField2":
        """Mean of ``f`` over the dx-by-dy cell centred on each node (midpoint rule)."""
        X, Y = grid.coords()
        u = (np.arange(sub) + 0.5) / sub - 0.5
        acc = np.zeros(grid.shape)
        for ox in u * grid.dx:
            for oy in u * grid.dy:
                acc += f(X + ox, Y + oy)
        return cls(grid, acc / sub**2, time)

    def __add__(self, other):
        if isinstance(other, ScalarField2):
            return ScalarField2(self.grid, self.values + other.values, self.time)
        return ScalarField2(self.grid, self.values + other, self.time)

    def __sub__(self, other):
        if isinstance(other, ScalarField2):
            return ScalarField2(self.grid, self.values - other.values, self.time)
        return ScalarField2(self.grid, self.values - other, self.time)

    def __mul__(self, k: float):
        return ScalarField2(self.grid, self.values * k, self.time)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField2(self.grid, -self.values, self.time)

    def at_time(self, time: float) -> "ScalarField2":
        return ScalarField2(self.grid, self.values, time)

    def max_norm(self, mask: Optional[np.ndarray] = None) -> float:
        mask = self.grid.probe_mask() if mask is None else mask
        return float(np.max(np.abs(self.values[mask]), initial=0.0))


@dataclass(frozen=True, eq=False)
class VectorField2:
    """In-plane vector field.

    ``exact`` optionally carries the closed form the samples came from, so
    path integrals can use the analytic expression instead of interpolating.
    """
    grid: Grid2
    vx: np.ndarray
    vy: np.ndarray
    time: float = 0.0
    exact: Optional[ExactVector] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vx", _frozen(self.vx))
        object.__setattr__(self, "vy", _frozen(self.vy))
        if self.vx.shape != self.grid.shape or self.vy.shape != self.grid.shape:
            raise ValueError("vector components must match the grid shape")

    @classmethod
    def zeros(cls, grid: Grid2, time: float = 0.0) -> "VectorField2":
        zero = lambda x, y: (np.zeros_like(np.asarray(x, float)),
                             np.zeros_like(np.asarray(y, float)))
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape), time, zero)

    @classmethod
    def from_function(cls, grid: Grid2, f, time: float = 0.0,
                      keep_exact: bool = True, skip_disk: bool = False) -> "VectorField2":
        """Sample ``f(x, y) -> (vx, vy)``; optionally zero-fill the excluded disk."""
        X, Y = grid.coords()
        inside = grid.disk_mask() if skip_disk else np.zeros(grid.shape, dtype=bool)
        vx = np.zeros(grid.shape)
        vy = np.zeros(grid.shape)
        out = ~inside
        fx, fy = f(X[out], Y[out])
        vx[out] = fx
        vy[out] = fy
        return cls(grid, vx, vy, time, f if keep_exact else None)

    def _combine(self, other, op):
        if isinstance(other, VectorField2):
            ex = None
            if self.exact is not None and other.exact is not None:
                f, g = self.exact, other.exact

                def ex(x, y):
                    a, b = f(x, y), g(x, y)
                    return op(a[0], b[0]), op(a[1], b[1])
            return VectorField2(self.grid, op(self.vx, other.vx), op(self.vy, other.vy),
                                self.time, ex)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, k: float):
        ex = None
        if self.exact is not None:
            f = self.exact

            def ex(x, y):
                a = f(x, y)
                return a[0] * k, a[1] * k
        return VectorField2(self.grid, self.vx * k, self.vy * k, self.time, ex)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def at_time(self, time: float) -> "VectorField2":
        return VectorField2(self.grid, self.vx, self.vy, time, self.exact)

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.vx, self.vy)

    def max_norm(self, mask: Optional[np.ndarray] = None) -> float:
        mask = self.grid.probe_mask() if mask is None else mask
        return float(np.max(self.magnitude()[mask], initial=0.0))


@dataclass(frozen=True, eq=False)
class PotentialState:
    """A (phi, A) pair with optional previous time level.

    ``dt`` is the spacing to the previous level.  A state without previous
    levels is treated as static.
    """
    phi: ScalarField2
    a: VectorField2
    time: float = 0.0
    a_prev: Optional[VectorField2] = None
    phi_prev: Optional[ScalarField2] = None
    dt: Optional[float] = None

    def __post_init__(self):
        g = self.phi.grid
        for f in (self.a, self.a_prev, self.phi_prev):
            if f is not None and f.grid != g:
                raise ValueError("all fields of a state must share one grid")
        if self.a_prev is not None:
            if self.dt is None or self.dt <= 0:
                raise ValueError("a state with a previous level needs dt > 0")
            stamps = [self.phi.time, self.a.time]
            if not np.allclose(stamps, self.time, atol=1e-12 * max(1.0, abs(self.time))):
                raise ValueError("inconsistent time stamps in state")

    @property
    def grid(self) -> Grid2:
        return self.phi.grid

    @property
    def static(self) -> bool:
        return self.a_prev is None

    @classmethod
    def zero(cls, grid: Grid2, time: float = 0.0) -> "PotentialState":
        return cls(ScalarField2.zeros(grid, time), VectorField2.zeros(grid, time), time)

    @classmethod
    def from_static(cls, a: VectorField2, phi: Optional[ScalarField2] = None) -> "PotentialState":
        phi = ScalarField2.zeros(a.grid, a.time) if phi is None else phi
        return cls(phi, a, a.time)


# --- operators -------------------------------------------------------------

def _d(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    return np.gradient(values, h, axis=axis, edge_order=1)


def grad(f: ScalarField2) -> VectorField2:
    g = f.grid
    return VectorField2(g, _d(f.values, g.dx, 0), _d(f.values, g.dy, 1), f.time)


def div(v: VectorField2) -> ScalarField2:
    g = v.grid
    return ScalarField2(g, _d(v.vx, g.dx, 0) + _d(v.vy, g.dy, 1), v.time)


def curl_z(v: VectorField2) -> ScalarField2:
    g = v.grid
    return ScalarField2(g, _d(v.vy, g.dx, 0) - _d(v.vx, g.dy, 1), v.time)


def laplacian(values: np.ndarray, dx: float, dy: float, periodic: bool = False) -> np.ndarray:
    """Compact five-point Laplacian.  Non-periodic edges see zero outside."""
    if periodic:
        return ((np.roll(values, 1, 0) - 2 * values + np.roll(values, -1, 0)) / dx**2
                + (np.roll(values, 1, 1) - 2 * values + np.roll(values, -1, 1)) / dy**2)
    p = np.pad(values, 1)
    return ((p[2:, 1:-1] - 2 * values + p[:-2, 1:-1]) / dx**2
            + (p[1:-1, 2:] - 2 * values + p[1:-1, :-2]) / dy**2)


def derive_fields(s: PotentialState, static: Optional[bool] = None):
    """E = -grad(phi) - dA/dt and B_z = curl_z(A).

    With a previous level, dA/dt is the backward difference and E is
    stamped at the half level ``t - dt/2`` (phi averaged over both levels
    when ``phi_prev`` exists), which keeps E second order in time.
    """
    static = s.static if static is None else static
    bz = curl_z(s.a)
    if static:
        e = -grad(s.phi)
        return VectorField2(s.grid, e.vx, e.vy, s.time), bz
    if s.a_prev is None:
        raise ValueError("non-static state has no previous time level for dA/dt")
    phi = s.phi if s.phi_prev is None else (s.phi + s.phi_prev) * 0.5
    gp = grad(phi)
    t_half = s.time - 0.5 * s.dt
    ex = -gp.vx - (s.a.vx - s.a_prev.vx) / s.dt
    ey = -gp.vy - (s.a.vy - s.a_prev.vy) / s.dt
    return VectorField2(s.grid, ex, ey, t_half), bz


def field_energy(e: VectorField2, bz: ScalarField2, c: float = 1.0,
                 mask: Optional[np.ndarray] = None) -> float:
    """Discrete integral of |E|^2 + c^2 B_z^2 over ``mask`` (whole grid by default)."""
    g = e.grid
    dens = e.vx**2 + e.vy**2 + (c * bz.values) ** 2
    if mask is not None:
        dens = dens[mask]
    return float(np.sum(dens) * g.dx * g.dy)


def maxwell_residuals(series: Sequence[tuple], c: float = 1.0,
                      mask: Optional[np.ndarray] = None) -> dict:
    """Max-norms of the vacuum Maxwell residuals over a uniform time series.

    ``series`` holds ``(E, B_z)`` pairs.  E may be colocated with B (centred
    three-level differences) or stamped half a step earlier, as produced by
    :func:`derive_fields` (staggered two-level differences).
    """
    if len(series) < 3:
        raise ValueError("need at least 3 time levels")
    es = [p[0] for p in series]
    bs = [p[1] for p in series]
    tb = np.array([b.time for b in bs])
    te = np.array([e.time for e in es])
    steps = np.diff(tb)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-9, atol=0):
        raise ValueError("time levels must be uniform")
    g = bs[0].grid
    mask = g.probe_mask() if mask is None else mask
    c2 = c * c

    def mx(a):
        return float(np.max(np.abs(a[mask]), initial=0.0))

    gauss = max(mx(div(e).values) for e in es)
    faraday = ampere = 0.0
    if np.allclose(te, tb, atol=1e-9 * dt):
        for n in range(1, len(series) - 1):
            db = (bs[n + 1].values - bs[n - 1].values) / (2 * dt)
            faraday = max(faraday, mx(db + curl_z(es[n]).values))
            ax = (es[n + 1].vx - es[n - 1].vx) / (2 * dt) - c2 * _d(bs[n].values, g.dy, 1)
            ay = (es[n + 1].vy - es[n - 1].vy) / (2 * dt) + c2 * _d(bs[n].values, g.dx, 0)
            ampere = max(ampere, mx(np.hypot(ax, ay)))
    elif np.allclose(te, tb - dt / 2, atol=1e-9 * dt):
        for n in range(1, len(series)):
            db = (bs[n].values - bs[n - 1].values) / dt
            faraday = max(faraday, mx(db + curl_z(es[n]).values))
        for n in range(1, len(series) - 1):
            ax = (es[n + 1].vx - es[n].vx) / dt - c2 * _d(bs[n].values, g.dy, 1)
            ay = (es[n + 1].vy - es[n].vy) / dt + c2 * _d(bs[n].values, g.dx, 0)
            ampere = max(ampere, mx(np.hypot(ax, ay)))
    else:
        raise ValueError("E time stamps must equal B stamps or lag them by dt/2")
    # div B is structurally absent in the 2D reduction (B has only a z part)
    return {"gauss": gauss, "no_monopole": 0.0, "faraday": faraday, "ampere": ampere}
