"""Path and loop integrals of A, phases, holonomies and the two-slit pattern.

Loops are counterclockwise-positive.  Path integrals of closed-form
potentials use adaptive Gauss-Legendre quadrature; grid-sampled potentials
are interpolated bilinearly along the path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .analytic import SolenoidSpec, finite_solenoid_field, thin_solenoid_field, unwrapped_angle
from .fields import Grid2, ScalarField2, VectorField2

GL_ORDER = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class OpenPath:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        if len(v) < 2:
            raise ValueError("a path needs at least 2 vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    closed = False

    @property
    def start(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def end(self) -> np.ndarray:
        return self.vertices[-1]

    def reversed(self):
        return type(self)(self.vertices[::-1])

    def length(self) -> float:
        return float(np.sum(np.hypot(*np.diff(self.vertices, axis=0).T)))

    def check_grid(self, grid: Grid2) -> None:
        """Reject vertices inside the excluded disk or off the grid."""
        v = self.vertices
        if np.any((v[:, 0] < grid.x0) | (v[:, 0] > grid.x1)
                  | (v[:, 1] < grid.y0) | (v[:, 1] > grid.y1)):
            raise ValueError("path leaves the grid domain")
        d = grid.disk
        if d is not None and np.any(np.hypot(v[:, 0] - d.cx, v[:, 1] - d.cy) <= d.radius):
            raise ValueError("path has a vertex inside the excluded disk")

    @classmethod
    def arc(cls, center, radius: float, start: float, stop: float, n: int = 64):
        """Polyline through ``n + 1`` points of a circular arc (angles in radians)."""
        th = np.linspace(start, stop, n + 1)
        return cls(np.column_stack([center[0] + radius * np.cos(th),
                                    center[1] + radius * np.sin(th)]))


class LoopPath(OpenPath):
    closed = True

    def __post_init__(self):
        super().__post_init__()
        v = self.vertices
        if len(v) < 3:
            raise ValueError("a loop needs at least 3 vertices")
        scale = max(1.0, float(np.max(np.abs(v))))
        if not np.allclose(v[0], v[-1], rtol=0, atol=1e-12 * scale):
            raise ValueError("a loop's first vertex must equal its last")

    @classmethod
    def circle(cls, center, radius: float, n: int = 64, turns: int = 1, start: float = 0.0):
        """Polygon with ``n`` sides per turn; negative ``turns`` runs clockwise."""
        m = n * abs(turns)
        th = start + np.sign(turns) * 2 * np.pi * np.arange(m + 1) / n
        v = np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)])
        v[-1] = v[0]
        return cls(v)

    @classmethod
    def join(cls, first: OpenPath, second: OpenPath):
        """Traverse ``first`` then ``second`` backwards."""
        return cls(np.vstack([first.vertices, second.vertices[::-1][1:]]))

    def signed_area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))

    def is_simple(self) -> bool:
        """True if no two non-adjacent edges intersect."""
        v = self.vertices
        p, q = v[:-1], v[1:]
        m = len(p)
        d = q - p

        def orient(a, b, c):
            return np.sign((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
                           - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))

        P1, P2 = p[:, None, :], q[:, None, :]
        Q1, Q2 = p[None, :, :], q[None, :, :]
        o1 = orient(P1, P2, Q1)
        o2 = orient(P1, P2, Q2)
        o3 = orient(Q1, Q2, P1)
        o4 = orient(Q1, Q2, P2)
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        idx = np.arange(m)
        adjacent = (np.abs(idx[:, None] - idx[None, :]) <= 1)
        adjacent[0, m - 1] = adjacent[m - 1, 0] = True
        if np.any(hit & ~adjacent):
            return False
        # repeated vertices (a loop run twice) also count as self-intersection
        rounded = np.round(v[:-1] / max(1e-300, float(np.max(np.abs(v)))) * 1e9)
        return len(np.unique(rounded, axis=0)) == len(rounded)


Potential = Union[VectorField2, SolenoidSpec, Callable]


# --- integrand evaluation --------------------------------------------------

def _bilinear(values: np.ndarray, grid: Grid2, x, y):
    fx = (np.asarray(x) - grid.x0) / grid.dx
    fy = (np.asarray(y) - grid.y0) / grid.dy
    eps = 1e-9
    if np.any((fx < -eps) | (fx > grid.nx - 1 + eps) | (fy < -eps) | (fy > grid.ny - 1 + eps)):
        raise ValueError("path leaves the grid domain")
    i = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    j = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    tx = fx - i
    ty = fy - j
    return ((1 - tx) * (1 - ty) * values[i, j] + tx * (1 - ty) * values[i + 1, j]
            + (1 - tx) * ty * values[i, j + 1] + tx * ty * values[i + 1, j + 1])


def _resolve(a: Potential):
    """Return ``(callable, grid_or_None)``."""
    if isinstance(a, SolenoidSpec):
        return (thin_solenoid_field(a) if a.radius == 0 else finite_solenoid_field(a)), None
    if isinstance(a, VectorField2):
        if a.exact is not None:
            return a.exact, None
        g = a.grid
        return (lambda x, y: (_bilinear(a.vx, g, x, y), _bilinear(a.vy, g, x, y))), g
    if callable(a):
        return a, None
    raise TypeError(f"cannot integrate {type(a).__name__}")


def _gl(f, P, Q):
    """Gauss-Legendre integral of A.dl over straight segments P->Q, plus |A.dl|."""
    d = Q - P
    x = P[:, None, 0] + _GL_X[None, :] * d[:, None, 0]
    y = P[:, None, 1] + _GL_X[None, :] * d[:, None, 1]
    ax, ay = f(x, y)
    g = np.asarray(ax) * d[:, None, 0] + np.asarray(ay) * d[:, None, 1]
    return g @ _GL_W, np.abs(g) @ _GL_W


def _adaptive(f, P, Q, rtol: float, max_depth: int) -> float:
    total = 0.0
    coarse, _ = _gl(f, P, Q)
    for _ in range(max_depth + 1):
        M = 0.5 * (P + Q)
        left, labs = _gl(f, P, M)
        right, rabs = _gl(f, M, Q)
        fine = left + right
        scale = np.maximum(labs + rabs, 1e-300)
        ok = np.abs(fine - coarse) <= rtol * scale
        total += float(np.sum(fine[ok]))
        if ok.all():
            return total
        bad = ~ok
        P = np.concatenate([P[bad], M[bad]])
        Q = np.concatenate([M[bad], Q[bad]])
        coarse = np.concatenate([left[bad], right[bad]])
    raise QuadratureError("adaptive quadrature did not converge; path grazes a singularity")


def line_integral_A(a: Potential, path: OpenPath, rtol: float = 1e-8,
                    max_depth: int = 40) -> float:
    """Integral of A . dl along a polyline.

    Closed forms (a :class:`SolenoidSpec`, a callable, or a field carrying
    ``exact``) get composite 8-point Gauss-Legendre with bisection until
    successive refinements agree to ``rtol`` relative.  Plain grid fields
    are interpolated bilinearly, with each segment cut into pieces no longer
    than half a cell.
    """
    f, grid = _resolve(a)
    v = path.vertices
    P, Q = v[:-1].copy(), v[1:].copy()
    keep = np.any(P != Q, axis=1)
    P, Q = P[keep], Q[keep]
    if grid is None:
        return _adaptive(f, P, Q, rtol, max_depth)
    piece = 0.5 * min(grid.dx, grid.dy)
    total = 0.0
    for p, q in zip(P, Q):
        n = max(1, int(math.ceil(np.hypot(*(q - p)) / piece)))
        s = np.linspace(0.0, 1.0, n + 1)[:, None]
        pts = p + s * (q - p)
        val, _ = _gl(f, pts[:-1], pts[1:])
        total += float(np.sum(val))
    return total


def winding_number(loop: LoopPath, center) -> int:
    """Signed number of turns of ``loop`` about ``center`` (counterclockwise positive)."""
    v = np.asarray(loop.vertices)
    c = np.asarray(center, float)
    if not loop.closed:
        raise ValueError("winding number needs a closed loop")
    rel = v - c
    if np.any(np.hypot(rel[:, 0], rel[:, 1]) == 0):
        raise ValueError("loop passes through the centre")
    a, b = rel[:-1], rel[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = np.sum(a * b, axis=1)
    if np.any((cross == 0) & (dot < 0)):
        raise ValueError("loop passes through the centre")
    return int(round(unwrapped_angle(v, c) / (2 * np.pi)))


# --- phases ----------------------------------------------------------------

@dataclass(frozen=True)
class InterferometerSpec:
    """Two-path interferometer: de Broglie wavelength, slit-screen distance,
    slit separation and coupling kappa = q/hbar.  Amplitudes are equal."""
    lambda_b: float = 1.0
    l: float = 1.0
    d: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if not (self.lambda_b > 0 and self.l > 0 and self.d > 0):
            raise ValueError("lambda_b, l and d must be positive")

    @property
    def fringe_period(self) -> float:
        return self.lambda_b * self.l / self.d


@dataclass
class PhaseResult:
    delta_s_over_hbar: float
    path_integrals: list
    flux_equivalent: float
    loop_integral: Optional[float] = None

    def to_dict(self, spec: Optional[InterferometerSpec] = None) -> dict:
        out = {"paths": list(self.path_integrals),
               "delta_s_over_hbar": self.delta_s_over_hbar,
               "flux_equivalent": self.flux_equivalent}
        if spec is not None:
            out["fringe_shift"] = fringe_shift(spec, self.flux_equivalent)
        return out


def dirac_phase(spec: InterferometerSpec, a: Potential, path: OpenPath) -> complex:
    return complex(np.exp(1j * spec.kappa * line_integral_A(a, path)))


def loop_phase_diff(spec: InterferometerSpec, a: Potential, path1: OpenPath,
                    path2: OpenPath) -> PhaseResult:
    """Phase difference -kappa (int_1 A.dl - int_2 A.dl) of two paths sharing endpoints.

    The loop formed by path 1 and path 2 reversed is also integrated
    directly as a cross-check.
    """
    scale = max(1.0, float(np.max(np.abs(path1.vertices))))
    if not (np.allclose(path1.start, path2.start, rtol=0, atol=1e-9 * scale)
            and np.allclose(path1.end, path2.end, rtol=0, atol=1e-9 * scale)):
        raise ValueError("paths must share their start and end points")
    i1 = line_integral_A(a, path1)
    i2 = line_integral_A(a, path2)
    flux = i1 - i2
    loop = None
    if path1.vertices.shape != path2.vertices.shape or not np.allclose(path1.vertices,
                                                                          path2.vertices):
        loop = line_integral_A(a, LoopPath.join(path1, path2))
    return PhaseResult(-spec.kappa * flux, [i1, i2], flux, loop)


def holonomy(a: Potential, loop: LoopPath, kappa: float = 1.0) -> complex:
    """exp(i kappa loop-integral of A); kappa = 1 is the bare holonomy."""
    return complex(np.exp(1j * kappa * line_integral_A(a, loop)))


def points_in_polygon(vertices, x, y) -> np.ndarray:
    """Even-odd rule point-in-polygon test."""
    v = np.asarray(vertices, float)
    inside = np.zeros(np.shape(x), dtype=bool)
    for (x1, y1), (x2, y2) in zip(v[:-1], v[1:]):
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xi)
    return inside


def flux_via_stokes(bz: ScalarField2, loop: LoopPath) -> float:
    """Sum of B_z dA over the nodes enclosed by a simple loop, signed by orientation."""
    if not loop.is_simple():
        raise ValueError("flux_via_stokes needs a simple (non-self-intersecting) loop")
    g = bz.grid
    X, Y = g.coords()
    inside = points_in_polygon(loop.vertices, X, Y)
    sign = 1.0 if loop.signed_area() > 0 else -1.0
    return sign * float(np.sum(bz.values[inside])) * g.dx * g.dy


# --- fringes ---------------------------------------------------------------

def fringe_shift(spec: InterferometerSpec, flux: float) -> float:
    """-(lambda_b l / 2 pi d) kappa flux."""
    return -(spec.lambda_b * spec.l / (2 * np.pi * spec.d)) * spec.kappa * flux


def interference_pattern(spec: InterferometerSpec, delta_s: float, screen_xs) -> np.ndarray:
    """Equal-amplitude two-path intensity, peak 1.

    I(x) = cos^2[(2 pi x d / (lambda_b l) - delta_s) / 2].  The sign puts the
    bright fringe at ``x = (lambda_b l / 2 pi d) delta_s``, so a loop phase
    of -kappa flux reproduces :func:`fringe_shift`.  No single-slit
    envelope is modelled.
    """
    xs = np.asarray(screen_xs, float)
    theta = 2 * np.pi * xs * spec.d / (spec.lambda_b * spec.l)
    return np.cos(0.5 * (theta - delta_s)) ** 2


def central_fringe(screen_xs, intensity) -> float:
    """Screen position of the sampled local maximum nearest x = 0."""
    xs = np.asarray(screen_xs, float)
    I = np.asarray(intensity, float)
    interior = (I[1:-1] >= I[:-2]) & (I[1:-1] >= I[2:])
    peaks = np.flatnonzero(interior) + 1
    if len(peaks) == 0:
        return float(xs[int(np.argmax(I))])
    return float(xs[peaks[np.argmin(np.abs(xs[peaks]))]])


def random_loop(rng: np.random.Generator, center, winding: int, r_min: float, r_max: float,
                n: int = 24) -> LoopPath:
    """Random star-shaped polyline loop with the given winding about ``center``.

    Winding 0 loops are drawn around a point far enough away that they never
    enclose ``center``.
    """
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    c = np.asarray(center, float)
    turns = abs(winding)
    if turns == 0:
        phi = rng.uniform(0, 2 * np.pi)
        c = c + 2.5 * r_max * np.array([np.cos(phi), np.sin(phi)])
        turns = 1
    m = n * turns
    base = 2 * np.pi * turns * np.arange(m) / m
    theta = base + rng.uniform(-0.3, 0.3, m) * (2 * np.pi / m)
    r = rng.uniform(r_min, r_max, m)
    pts = c + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    if winding < 0:
        pts = pts[::-1]
    return LoopPath(np.vstack([pts, pts[:1]]))
