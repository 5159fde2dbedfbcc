"""Gauge transformations, gauge conditions and equivalence classification.

Narrow moves add the gradient of a single scalar; Wide moves add any
curl-free vector C with a companion scalar C0 obeying grad C0 = dC/dt.
On a domain with a hole the two differ: a curl-free C can carry a nonzero
loop integral around the hole, which no single-valued gradient can.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .analytic import GaugeChi
from .fields import (PotentialState, ScalarField2, VectorField2, curl_z, div, grad)
from .poisson import solve_poisson


class GaugeConstraintError(ValueError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def default_tolerance(grid, a_norm: float) -> float:
    """max(1e-6, 10 h^2 |A|_inf)."""
    return max(1e-6, 10.0 * grid.h**2 * a_norm)


@dataclass(frozen=True)
class GridGauge:
    """Gauge function known only on the grid, at the state's time and (optionally) one step earlier."""
    values: ScalarField2
    values_prev: Optional[ScalarField2] = None


# --- narrow ----------------------------------------------------------------

def _check_polar(chi: GaugeChi, grid):
    terms = chi.params["terms"] if chi.kind == "sum" else (chi,)
    for g in terms:
        if g.kind != "polar":
            continue
        d = grid.disk
        cx, cy = g.params["center"]
        if d is None or np.hypot(cx - d.cx, cy - d.cy) >= d.radius:
            raise ValueError("polar gauge centre must lie inside the excluded disk")


def _outside(grid, chi: GaugeChi):
    # only a multivalued gauge function is singular inside the disk
    if chi.single_valued:
        return np.ones(grid.shape, dtype=bool)
    return ~grid.disk_mask()


def _sample_grad(chi: GaugeChi, grid, t):
    X, Y = grid.coords()
    gx = np.zeros(grid.shape)
    gy = np.zeros(grid.shape)
    out = _outside(grid, chi)
    a, b = chi.grad(X[out], Y[out], t)
    gx[out] = a
    gy[out] = b
    return gx, gy


def _sample_dt(chi: GaugeChi, grid, t):
    X, Y = grid.coords()
    vals = np.zeros(grid.shape)
    out = _outside(grid, chi)
    vals[out] = chi.time_derivative(X[out], Y[out], t)
    return vals


def _shift_a(a: VectorField2, gx, gy, exact_grad) -> VectorField2:
    ex = None
    if a.exact is not None and exact_grad is not None:
        f = a.exact

        def ex(x, y):
            u, v = f(x, y)
            p, q = exact_grad(x, y)
            return u + p, v + q
    return VectorField2(a.grid, a.vx + gx, a.vy + gy, a.time, ex)


def apply_narrow(s: PotentialState, chi: Union[GaugeChi, GridGauge],
                 t: Optional[float] = None) -> PotentialState:
    """phi -> phi - dchi/dt, A -> A + grad chi.

    Analytic gauge functions are differentiated exactly (a multivalued one
    is skipped inside the excluded disk, where it is singular); grid gauge
    functions use the central-difference gradient and a backward time
    difference.
    """
    g = s.grid
    t = s.time if t is None else t
    if isinstance(chi, GridGauge):
        return _apply_grid_gauge(s, chi)
    if chi.kind in ("polar", "sum"):
        _check_polar(chi, g)
    gx, gy = _sample_grad(chi, g, t)
    a = _shift_a(s.a, gx, gy, chi.gradient_field(t))
    phi = s.phi - _sample_dt(chi, g, t)
    a_prev = phi_prev = None
    if s.a_prev is not None:
        tp = t - s.dt
        gx, gy = _sample_grad(chi, g, tp)
        a_prev = _shift_a(s.a_prev, gx, gy, chi.gradient_field(tp))
        base = s.phi_prev if s.phi_prev is not None else None
        if base is not None:
            phi_prev = base - _sample_dt(chi, g, tp)
    return PotentialState(phi, a, s.time, a_prev, phi_prev, s.dt)


def _apply_grid_gauge(s: PotentialState, chi: GridGauge) -> PotentialState:
    gc = grad(chi.values)
    a = VectorField2(s.grid, s.a.vx + gc.vx, s.a.vy + gc.vy, s.a.time)
    if s.a_prev is None:
        return PotentialState(s.phi, a, s.time)
    if chi.values_prev is None:
        raise ValueError("time-dependent state needs the gauge function at the previous level")
    # one backward difference shared by both levels keeps E unchanged exactly
    chi_t = (chi.values.values - chi.values_prev.values) / s.dt
    gp = grad(chi.values_prev)
    a_prev = VectorField2(s.grid, s.a_prev.vx + gp.vx, s.a_prev.vy + gp.vy, s.a_prev.time)
    phi = s.phi - chi_t
    phi_prev = None if s.phi_prev is None else s.phi_prev - chi_t
    return PotentialState(phi, a, s.time, a_prev, phi_prev, s.dt)


# --- wide ------------------------------------------------------------------

@dataclass(frozen=True)
class WideGaugeElement:
    """Curl-free vector C with companion scalar C0 (grad C0 = dC/dt).

    ``c_prev``/``c0_prev`` give the previous time level; without them C is
    static and C0 must be spatially constant.
    """
    c0: ScalarField2
    c: VectorField2
    c_prev: Optional[VectorField2] = None
    c0_prev: Optional[ScalarField2] = None

    def residuals(self, dt: Optional[float] = None, mask=None) -> tuple:
        g = self.c.grid
        mask = g.probe_mask() if mask is None else mask
        curl = curl_z(self.c).max_norm(mask)
        gc0 = grad(self.c0)
        if self.c_prev is None:
            compat = gc0.max_norm(mask)
        else:
            if dt is None:
                raise ValueError("dt required for a time-dependent wide element")
            ex = gc0.vx - (self.c.vx - self.c_prev.vx) / dt
            ey = gc0.vy - (self.c.vy - self.c_prev.vy) / dt
            compat = float(np.max(np.hypot(ex, ey)[mask], initial=0.0))
        return curl, compat


def apply_wide(s: PotentialState, g: WideGaugeElement,
               tol: Optional[float] = None) -> PotentialState:
    """phi -> phi - C0, A -> A + C, after checking the element's constraints."""
    tol = default_tolerance(s.grid, g.c.max_norm()) if tol is None else tol
    curl, compat = g.residuals(s.dt)
    if curl > tol:
        raise GaugeConstraintError("wide element is not curl-free", curl)
    if compat > tol:
        raise GaugeConstraintError("wide element violates grad C0 = dC/dt", compat)
    a = s.a + g.c if (s.a.exact is not None and g.c.exact is not None) else \
        VectorField2(s.grid, s.a.vx + g.c.vx, s.a.vy + g.c.vy, s.a.time)
    phi = s.phi - g.c0
    if s.a_prev is None:
        return PotentialState(phi, a, s.time)
    cp = g.c if g.c_prev is None else g.c_prev
    c0p = g.c0 if g.c0_prev is None else g.c0_prev
    a_prev = VectorField2(s.grid, s.a_prev.vx + cp.vx, s.a_prev.vy + cp.vy, s.a_prev.time)
    phi_prev = None if s.phi_prev is None else s.phi_prev - c0p
    return PotentialState(phi, a, s.time, a_prev, phi_prev, s.dt)


# --- gauge conditions ------------------------------------------------------

def coulomb_project(s: PotentialState, tol: float = 1e-8, maxiter: int = 5000,
                    precondition: bool = True):
    """Project onto div A = 0 by solving lap(chi) = -div A, chi = 0 on the two edge rows.

    Returns ``(state, chi)``.  For time-dependent states chi is solved at
    both levels and the same backward difference shifts phi at both, so the
    derived fields are untouched to round-off.  The result is exact only up
    to the truncation of the domain: the Dirichlet data is a choice.
    """
    g = s.grid

    def solve(a: VectorField2):
        # chi = 0 on the two outer rows: there grad is one-sided, and only
        # with central gradients does div(grad) equal the stride-2 Laplacian
        vals = np.zeros(g.shape)
        inner, _ = solve_poisson(-div(a).values[1:-1, 1:-1], g.dx, g.dy, tol=tol,
                                 maxiter=maxiter, precondition=precondition)
        vals[1:-1, 1:-1] = inner
        return ScalarField2(g, vals, a.time)

    chi = solve(s.a)
    chi_prev = solve(s.a_prev) if s.a_prev is not None else None
    return _apply_grid_gauge(s, GridGauge(chi, chi_prev)), chi


def lorenz_residual(s: PotentialState, c: float = 1.0,
                    static: Optional[bool] = None) -> ScalarField2:
    """div A + (1/c^2) dphi/dt, at ``t - dt/2`` for two-level states."""
    static = s.static if static is None else static
    if static:
        return div(s.a)
    if s.a_prev is None or s.phi_prev is None:
        raise ValueError("Lorenz residual needs previous levels of both phi and A")
    da = div((s.a + s.a_prev) * 0.5).values
    dphi = (s.phi.values - s.phi_prev.values) / s.dt
    return ScalarField2(s.grid, da + dphi / c**2, s.time - 0.5 * s.dt)


def residual_lorenz_chi(k: Sequence[float], amplitude: float = 1.0, phase: float = 0.0,
                        c: float = 1.0) -> GaugeChi:
    """Plane-wave gauge function with omega = c|k|; it keeps the Lorenz condition."""
    return GaugeChi.plane_wave(k, amplitude, phase, c)


# --- classification --------------------------------------------------------

class Label(str, enum.Enum):
    IDENTICAL = "IDENTICAL"
    NARROW_EQUIVALENT = "NARROW_EQUIVALENT"
    WIDE_ONLY = "WIDE_ONLY"
    INEQUIVALENT = "INEQUIVALENT"


@dataclass
class EquivalenceVerdict:
    label: Label
    curl_residual: float
    loop_integrals: list = field(default_factory=list)
    lorenz_residuals: tuple = (0.0, 0.0)
    tolerance: float = 0.0

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "curl_residual": self.curl_residual,
            "loop_integrals": [{"id": i, "winding": w, "value": v}
                               for i, w, v in self.loop_integrals],
            "lorenz_residuals": list(self.lorenz_residuals),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _lorenz_norm(s: PotentialState, mask) -> float:
    try:
        return lorenz_residual(s).max_norm(mask)
    except ValueError:
        return lorenz_residual(s, static=True).max_norm(mask)


def classify_equivalence(s1: PotentialState, s2: PotentialState, loops,
                         tol: Optional[float] = None,
                         loop_ids: Optional[Sequence[str]] = None) -> EquivalenceVerdict:
    """Place two potential configurations on the Narrow/Wide spectrum.

    D = A2 - A1.  IDENTICAL if D and phi2 - phi1 (up to a constant) vanish;
    NARROW_EQUIVALENT if D is curl-free with every loop integral zero;
    WIDE_ONLY if D is curl-free but some loop around the hole picks up a
    nonzero integral; INEQUIVALENT otherwise.
    """
    from .interferometry import line_integral_A, winding_number

    g = s1.grid
    if s2.grid != g:
        raise ValueError("states must share a grid")
    loops = list(loops)
    ids = list(loop_ids) if loop_ids is not None else [f"loop{i}" for i in range(len(loops))]
    windings = []
    for lp in loops:
        windings.append(winding_number(lp, (g.disk.cx, g.disk.cy)) if g.disk else 0)
    if g.disk is not None and not any(w != 0 for w in windings):
        raise ValueError("classification needs at least one loop enclosing the excluded disk")

    mask = g.probe_mask()
    a_norm = max(s1.a.max_norm(mask), s2.a.max_norm(mask))
    tol = default_tolerance(g, a_norm) if tol is None else tol

    d = s2.a - s1.a
    curl_res = curl_z(d).max_norm(mask)
    dphi = s2.phi.values - s1.phi.values
    dphi = dphi[mask] - np.mean(dphi[mask]) if mask.any() else dphi.ravel()
    phi_res = float(np.max(np.abs(dphi), initial=0.0))

    integrals = [(i, int(w), float(line_integral_A(d, lp))) for i, w, lp in zip(ids, windings, loops)]
    lorenz = (_lorenz_norm(s1, mask), _lorenz_norm(s2, mask))

    if d.max_norm(mask) <= tol and phi_res <= tol:
        label = Label.IDENTICAL
    elif curl_res <= tol:
        if all(abs(v) <= tol for _, _, v in integrals):
            label = Label.NARROW_EQUIVALENT
        else:
            label = Label.WIDE_ONLY
    else:
        label = Label.INEQUIVALENT
    return EquivalenceVerdict(label, curl_res, integrals, lorenz, tol)
