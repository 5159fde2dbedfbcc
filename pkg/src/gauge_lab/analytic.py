"""Closed-form solenoid potentials, gauge functions and the retarded kernel.

Conventions: counterclockwise loops are positive, c defaults to 1, and the
flux of a solenoid is the loop integral of A around it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class SolenoidSpec:
    """Solenoid along z through ``center``.

    ``radius == 0`` is the ideal thin solenoid.  ``t_on`` and ``ramp`` set the
    switch-on profile used by the time-domain solver; ``feed_dipole`` is the
    peak dipole moment of the charge separated by the driving source while
    the current ramps (zero for a purely azimuthal current).
    """
    center: tuple = (0.0, 0.0)
    radius: float = 0.0
    flux: float = 1.0
    t_on: float = 0.0
    ramp: float = 0.0
    feed_dipole: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("solenoid radius must be >= 0")
        if self.ramp < 0:
            raise ValueError("ramp duration must be >= 0")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def interior_field(self) -> float:
        if self.radius == 0:
            return math.inf
        return self.flux / (math.pi * self.radius**2)


def thin_solenoid_A(x, y, s: SolenoidSpec):
    """A = flux/(2 pi r^2) * (-(y - yc), x - xc)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx = x - s.center[0]
    ry = y - s.center[1]
    r2 = rx * rx + ry * ry
    if np.any(r2 == 0):
        raise ValueError("thin-solenoid potential is singular at the centre")
    k = s.flux / (2 * np.pi * r2)
    return -k * ry, k * rx


def finite_solenoid(x, y, s: SolenoidSpec):
    """Return ``(ax, ay, bz)`` for a solenoid of radius R with uniform interior field."""
    if s.radius <= 0:
        raise ValueError("finite_solenoid needs radius > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rx = x - s.center[0]
    ry = y - s.center[1]
    r2 = rx * rx + ry * ry
    R2 = s.radius**2
    inside = r2 < R2
    # |A| = flux r / (2 pi R^2) inside, flux / (2 pi r) outside; factor of (-ry, rx)
    k = np.where(inside, s.flux / (2 * np.pi * R2),
                 s.flux / (2 * np.pi * np.where(inside, 1.0, r2)))
    bz = np.where(inside, s.flux / (np.pi * R2), 0.0)
    return -k * ry, k * rx, bz


def thin_solenoid_field(s: SolenoidSpec):
    """Callable ``(x, y) -> (ax, ay)`` for use as an exact vector field."""
    return lambda x, y: thin_solenoid_A(x, y, s)


def finite_solenoid_field(s: SolenoidSpec):
    def f(x, y):
        ax, ay, _ = finite_solenoid(x, y, s)
        return ax, ay
    return f


# --- gauge functions -------------------------------------------------------

@dataclass(frozen=True)
class GaugeChi:
    """Analytic gauge function with closed-form gradient and time derivative.

    Kinds: ``polynomial`` (terms ``coeff * x**i * y**j * t**k``),
    ``plane_wave`` (``amplitude * sin(k.x - omega t + phase)`` with
    ``omega = c|k|``), ``polar`` (``-flux/(2 pi) * theta`` about ``center``,
    branch cut on the ray theta = pi) and ``sum`` of other gauge functions.
    """
    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def polynomial(cls, terms) -> "GaugeChi":
        """``terms`` maps ``(i, j, k)`` exponents of x, y, t to coefficients."""
        terms = {tuple(int(p) for p in key): float(c) for key, c in dict(terms).items()}
        return cls("polynomial", {"terms": terms})

    @classmethod
    def plane_wave(cls, k: Sequence[float], amplitude: float = 1.0, phase: float = 0.0,
                   c: float = 1.0) -> "GaugeChi":
        kx, ky = float(k[0]), float(k[1])
        kmag = math.hypot(kx, ky)
        if kmag == 0:
            raise ValueError("plane-wave gauge function needs a nonzero wave vector")
        return cls("plane_wave", {"k": (kx, ky), "omega": c * kmag, "c": c,
                                  "amplitude": float(amplitude), "phase": float(phase)})

    @classmethod
    def polar(cls, flux: float, center=(0.0, 0.0)) -> "GaugeChi":
        return cls("polar", {"flux": float(flux),
                             "center": (float(center[0]), float(center[1]))})

    def __add__(self, other: "GaugeChi") -> "GaugeChi":
        terms = []
        for g in (self, other):
            terms.extend(g.params["terms"] if g.kind == "sum" else [g])
        return GaugeChi("sum", {"terms": tuple(terms)})

    @property
    def single_valued(self) -> bool:
        if self.kind == "sum":
            return all(t.single_valued for t in self.params["terms"])
        return self.kind != "polar"

    @property
    def static(self) -> bool:
        if self.kind == "polynomial":
            return all(k == 0 for (_, _, k) in self.params["terms"])
        if self.kind == "sum":
            return all(t.static for t in self.params["terms"])
        return self.kind == "polar"

    # each method accepts arrays and broadcasts

    def value(self, x, y, t=0.0):
        x, y = np.asarray(x, float), np.asarray(y, float)
        p = self.params
        if self.kind == "polynomial":
            out = np.zeros(np.broadcast(x, y).shape)
            for (i, j, k), c in p["terms"].items():
                out = out + c * x**i * y**j * t**k
            return out
        if self.kind == "plane_wave":
            kx, ky = p["k"]
            return p["amplitude"] * np.sin(kx * x + ky * y - p["omega"] * t + p["phase"])
        if self.kind == "polar":
            cx, cy = p["center"]
            return -p["flux"] / (2 * np.pi) * np.arctan2(y - cy, x - cx)
        return sum(g.value(x, y, t) for g in p["terms"])

    def grad(self, x, y, t=0.0):
        x, y = np.asarray(x, float), np.asarray(y, float)
        p = self.params
        shape = np.broadcast(x, y).shape
        if self.kind == "polynomial":
            gx = np.zeros(shape)
            gy = np.zeros(shape)
            for (i, j, k), c in p["terms"].items():
                tk = t**k
                if i:
                    gx = gx + c * i * x ** (i - 1) * y**j * tk
                if j:
                    gy = gy + c * j * x**i * y ** (j - 1) * tk
            return gx, gy
        if self.kind == "plane_wave":
            kx, ky = p["k"]
            cs = p["amplitude"] * np.cos(kx * x + ky * y - p["omega"] * t + p["phase"])
            return kx * cs, ky * cs
        if self.kind == "polar":
            cx, cy = p["center"]
            rx, ry = x - cx, y - cy
            r2 = rx * rx + ry * ry
            if np.any(r2 == 0):
                raise ValueError("polar gauge gradient is singular at its centre")
            k = p["flux"] / (2 * np.pi * r2)
            return k * ry, -k * rx
        gx = np.zeros(shape)
        gy = np.zeros(shape)
        for g in p["terms"]:
            a, b = g.grad(x, y, t)
            gx = gx + a
            gy = gy + b
        return gx, gy

    def time_derivative(self, x, y, t=0.0):
        x, y = np.asarray(x, float), np.asarray(y, float)
        p = self.params
        shape = np.broadcast(x, y).shape
        if self.kind == "polynomial":
            out = np.zeros(shape)
            for (i, j, k), c in p["terms"].items():
                if k:
                    out = out + c * k * x**i * y**j * t ** (k - 1)
            return out
        if self.kind == "plane_wave":
            kx, ky = p["k"]
            return -p["omega"] * p["amplitude"] * np.cos(kx * x + ky * y - p["omega"] * t
                                                         + p["phase"])
        if self.kind == "polar":
            return np.zeros(shape)
        return sum(g.time_derivative(x, y, t) for g in p["terms"]) + np.zeros(shape)

    def gradient_field(self, t=0.0):
        """Callable ``(x, y) -> grad chi`` at fixed time."""
        return lambda x, y: self.grad(x, y, t)


def _segment_distance(p, q, c) -> float:
    d = q - p
    L2 = float(d @ d)
    s = 0.0 if L2 == 0 else min(1.0, max(0.0, float((c - p) @ d) / L2))
    return float(np.hypot(*(p + s * d - c)))


def unwrapped_angle(vertices, center) -> float:
    """Continuous change of the polar angle about ``center`` along a polyline."""
    v = np.asarray(vertices, float) - np.asarray(center, float)
    a, b = v[:-1], v[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = np.sum(a * b, axis=1)
    return float(np.sum(np.arctan2(cross, dot)))


def polar_chi_line_integral(chi: GaugeChi, vertices, eps: float = 1e-6) -> float:
    """Integral of grad(chi) along a polyline, branch-cut aware.

    Equals ``-flux/(2 pi)`` times the continuously unwrapped change of the
    polar angle, so a closed loop of winding ``w`` gives ``-flux * w``.
    Endpoint values of chi are never used.
    """
    if chi.kind != "polar":
        raise ValueError("expected a polar gauge function")
    v = np.asarray(vertices, float)
    c = np.asarray(chi.params["center"], float)
    for p, q in zip(v[:-1], v[1:]):
        if _segment_distance(p, q, c) < eps:
            raise ValueError("path passes within eps of the polar gauge centre")
    return -chi.params["flux"] / (2 * np.pi) * unwrapped_angle(v, c)


# --- retarded kernel -------------------------------------------------------

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def smoothed_delta(s, width: float):
    """Unit-area Gaussian whose full width at half maximum is ``width``."""
    sigma = width * FWHM_TO_SIGMA
    s = np.asarray(s, float)
    return np.exp(-0.5 * (s / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))


def retarded_point_kernel(r, t, width: float, c: float = 1.0):
    """-delta_w(t - r/c) / (4 pi r): a unit-strength retarded point response."""
    r = np.asarray(r, float)
    if width <= 0:
        raise ValueError("smoothing width must be positive")
    if np.any(r <= 0):
        raise ValueError("retarded kernel needs r > 0")
    return -smoothed_delta(np.asarray(t, float) - r / c, width) / (4 * np.pi * r)


def kernel_silence_time(r, width: float, c: float = 1.0):
    """Latest time before which the kernel is treated as causally silent."""
    return np.asarray(r, float) / c - 5.0 * width
