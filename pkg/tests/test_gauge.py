import numpy as np
import pytest
from scipy.sparse import diags, identity, kron
from scipy.sparse.linalg import spsolve

from gauge_lab.analytic import GaugeChi, SolenoidSpec, thin_solenoid_field
from gauge_lab.fields import (Grid2, PotentialState, ScalarField2, VectorField2,
                              derive_fields, div, grad)
from gauge_lab.gauge import (GaugeConstraintError, Label, WideGaugeElement, apply_narrow,
                             apply_wide, classify_equivalence, coulomb_project, lorenz_residual,
                             residual_lorenz_chi)
from gauge_lab.interferometry import LoopPath
from gauge_lab.poisson import SolverError, solve_poisson, wide_laplacian


# --- poisson ---------------------------------------------------------------

def _sparse_wide(nx, ny, dx, dy):
    # independent assembly of the stride-2 Laplacian on interior unknowns
    def d2(n, h):
        return diags([1, -2, 1], [-2, 0, 2], shape=(n, n)) / (4 * h * h)
    return kron(d2(nx, dx), identity(ny)) + kron(identity(nx), d2(ny, dy))


@pytest.mark.parametrize("shape", [(16, 16), (17, 12), (9, 30)])
def test_poisson_matches_sparse_direct_solve(shape):
    rng = np.random.default_rng(3)
    dx, dy = 0.3, 0.45
    rhs = rng.normal(size=shape)
    chi, info = solve_poisson(rhs, dx, dy, tol=1e-12)
    n, m = shape[0] - 2, shape[1] - 2
    ref = spsolve(_sparse_wide(n, m, dx, dy).tocsc(), rhs[1:-1, 1:-1].ravel()).reshape(n, m)
    np.testing.assert_allclose(chi[1:-1, 1:-1], ref, atol=1e-9 * np.max(np.abs(ref)))
    assert np.all(chi[0] == 0) and np.all(chi[:, -1] == 0)
    assert info.relative_residual <= 1e-12


def test_poisson_preconditioner_is_exact_inverse():
    rng = np.random.default_rng(4)
    rhs = rng.normal(size=(40, 33))
    _, info = solve_poisson(rhs, 0.1, 0.1, tol=1e-10)
    assert info.iterations <= 2
    chi, info2 = solve_poisson(rhs, 0.1, 0.1, tol=1e-6, precondition=False, maxiter=20000)
    assert info2.iterations > info.iterations
    np.testing.assert_allclose(wide_laplacian(chi[1:-1, 1:-1], 0.1, 0.1),
                               rhs[1:-1, 1:-1], atol=1e-4 * np.abs(rhs).max())


def test_poisson_nonconvergence_raises():
    rhs = np.random.default_rng(5).normal(size=(40, 40))
    with pytest.raises(SolverError):
        solve_poisson(rhs, 0.1, 0.1, tol=1e-12, maxiter=3, precondition=False)


def test_poisson_zero_rhs():
    chi, info = solve_poisson(np.zeros((12, 12)), 1.0, 1.0)
    assert np.all(chi == 0) and info.iterations == 0


# --- narrow / wide moves ---------------------------------------------------

def grid(n=81, disk=0.6):
    return Grid2.centered(n, 8.0, disk_radius=disk)


def thin_state(g, flux=1.3):
    a = VectorField2.from_function(g, thin_solenoid_field(SolenoidSpec(flux=flux)),
                                   skip_disk=True)
    return PotentialState.from_static(a)


def test_apply_narrow_constant_and_linear():
    g = grid()
    s = thin_state(g)
    same = apply_narrow(s, GaugeChi.polynomial({(0, 0, 0): 4.0}))
    assert np.array_equal(same.a.vx, s.a.vx) and np.array_equal(same.phi.values, s.phi.values)
    moved = apply_narrow(s, GaugeChi.polynomial({(1, 0, 0): 1.0}))
    np.testing.assert_allclose(moved.a.vx - s.a.vx, 1.0)
    np.testing.assert_allclose(moved.a.vy, s.a.vy)
    np.testing.assert_allclose(moved.phi.values, s.phi.values)


def test_polar_chi_gauges_thin_solenoid_away():
    g = grid()
    flux = 1.3
    s = apply_narrow(thin_state(g, flux), GaugeChi.polar(flux))
    assert s.a.max_norm(~g.disk_mask()) < 1e-12


def test_polar_chi_centre_must_be_inside_disk():
    g = grid()
    with pytest.raises(ValueError):
        apply_narrow(thin_state(g), GaugeChi.polar(1.0, center=(2.0, 0.0)))


def test_apply_wide_examples():
    g = grid()
    zero = PotentialState.zero(g)
    e = WideGaugeElement(ScalarField2.zeros(g), VectorField2.zeros(g))
    out = apply_wide(zero, e)
    assert out.a.max_norm() == 0 and out.phi.max_norm() == 0
    c = thin_state(g).a
    out = apply_wide(zero, WideGaugeElement(ScalarField2.zeros(g), c))
    np.testing.assert_array_equal(out.a.vx, c.vx)
    xy = VectorField2.from_function(g, lambda x, y: (y, x))
    wide = apply_wide(thin_state(g), WideGaugeElement(ScalarField2.zeros(g), xy))
    narrow = apply_narrow(thin_state(g), GaugeChi.polynomial({(1, 1, 0): 1.0}))
    assert (wide.a - narrow.a).max_norm() < 1e-10


def test_apply_wide_rejects_curl():
    g = grid()
    bad = VectorField2.from_function(g, lambda x, y: (-y, x))
    with pytest.raises(GaugeConstraintError) as err:
        apply_wide(PotentialState.zero(g), WideGaugeElement(ScalarField2.zeros(g), bad))
    assert err.value.residual == pytest.approx(2.0)


# --- coulomb ---------------------------------------------------------------

def test_coulomb_leaves_divergence_free_field():
    # discrete curl of a stream function is exactly div-free under central differences
    g = Grid2.centered(81, 8.0)
    psi = ScalarField2.from_function(g, lambda x, y: np.exp(-x**2 - 0.5 * (y - 1)**2))
    gp = grad(psi)
    s = PotentialState.from_static(VectorField2(g, gp.vy, -gp.vx))
    out, chi = coulomb_project(s)
    assert chi.max_norm() < 1e-12
    assert (out.a - s.a).max_norm() < 1e-12


def test_coulomb_thin_solenoid_nearly_untouched():
    # only the zero-filled disk carries divergence; its effect shrinks with h
    s = [coulomb_project(thin_state(grid(n)))[1].max_norm() for n in (81, 161)]
    assert s[1] < s[0] < 0.01


def test_coulomb_removes_gradient_part():
    # a Gaussian vanishes on the edge, so the Dirichlet problem recovers it exactly
    g = Grid2.centered(81, 12.0)
    X, Y = g.coords()
    w = np.exp(-(X**2 + Y**2) / 2)
    base = VectorField2.from_function(g, lambda x, y: (-y / 2, x / 2))
    grad_w = VectorField2(g, -X * w, -Y * w)
    s = PotentialState.from_static(base + grad_w)
    out, _ = coulomb_project(s)
    m = g.probe_mask()
    assert div(out.a).max_norm(m) < 1e-6
    # the discrete gradient of w is not exactly grad_w, leaving O(h^2)
    assert (out.a - base).max_norm(m) < 0.05


def test_coulomb_idempotent_and_field_preserving():
    g = Grid2.centered(65, 8.0)
    X, Y = g.coords()
    dt = 0.05
    a = VectorField2(g, np.sin(X) * np.exp(-Y**2), X * np.exp(-X**2 - Y**2), 1.0)
    a_prev = VectorField2(g, 0.9 * a.vx, 1.1 * a.vy, 1.0 - dt)
    phi = ScalarField2(g, np.exp(-(X - 1)**2 - Y**2), 1.0)
    s = PotentialState(phi, a, 1.0, a_prev, phi * 0.7, dt)
    once, _ = coulomb_project(s)
    twice, chi2 = coulomb_project(once)
    assert (twice.a - once.a).max_norm() < 1e-12
    assert chi2.max_norm() < 1e-12
    e0, b0 = derive_fields(s)
    e1, b1 = derive_fields(once)
    assert (e1 - e0).max_norm(g.probe_mask()) < 1e-9
    assert (b1 - b0).max_norm(g.probe_mask()) < 1e-9


# --- lorenz ----------------------------------------------------------------

def test_lorenz_residual_examples():
    errs = []
    for n in (81, 161):
        g = grid(n)
        X, Y = g.coords()
        errs.append(lorenz_residual(thin_state(g)).max_norm(g.probe_mask() & (np.hypot(X, Y) > 1)))
    assert errs[0] < 5e-3 and 3 <= errs[0] / errs[1] <= 5
    gg = Grid2.centered(33, 4.0)
    dt = 0.1
    t = 1.0
    a = VectorField2.from_function(gg, lambda x, y: (t + 0 * x, 0 * y), time=t)
    a_prev = VectorField2.from_function(gg, lambda x, y: (t - dt + 0 * x, 0 * y), time=t - dt)
    phi = ScalarField2.from_function(gg, lambda x, y: -x, t)
    s = PotentialState(phi, a, t, a_prev, phi, dt)
    assert lorenz_residual(s).max_norm() < 1e-12
    with pytest.raises(ValueError):
        lorenz_residual(PotentialState(phi, a, t, a_prev, None, dt))


def test_residual_chi_dispersion_and_additivity():
    chi = residual_lorenz_chi((1.0, 0.0))
    assert chi.params["omega"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        residual_lorenz_chi((0.0, 0.0))
    g = grid(41)
    X, Y = g.coords()
    dt = 0.05
    a = VectorField2(g, np.cos(Y), np.sin(X), 2.0)
    s = PotentialState(ScalarField2(g, X * Y, 2.0), a, 2.0, a * 0.9, ScalarField2(g, X, 2.0), dt)
    c1 = residual_lorenz_chi((0.3, 0.2), 0.5)
    c2 = residual_lorenz_chi((-0.1, 0.4), 1.5, phase=0.3)
    seq = apply_narrow(apply_narrow(s, c1), c2)
    once = apply_narrow(s, c1 + c2)
    assert (seq.a - once.a).max_norm() < 1e-10
    assert (seq.phi - once.phi).max_norm() < 1e-10
    assert (seq.a_prev - once.a_prev).max_norm() < 1e-10


# --- classification --------------------------------------------------------

LOOPS = [LoopPath.circle((0, 0), 2.0), LoopPath([(1, 1), (3, 1), (3, 3), (1, 3), (1, 1)])]


def test_classify_examples():
    g = grid()
    s1 = thin_state(g)
    narrow = apply_narrow(s1, GaugeChi.polynomial({(1, 1, 0): 0.2}))
    assert classify_equivalence(s1, narrow, LOOPS).label is Label.NARROW_EQUIVALENT
    wide = classify_equivalence(s1, PotentialState.zero(g), LOOPS)
    assert wide.label is Label.WIDE_ONLY
    assert wide.loop_integrals[0][2] == pytest.approx(-1.3, abs=1e-6)
    bump = VectorField2.from_function(g, lambda x, y: (0 * x, x * np.exp(-(x - 2)**2 - y**2)))
    bad = PotentialState.from_static(s1.a + bump)
    v = classify_equivalence(s1, bad, LOOPS)
    assert v.label is Label.INEQUIVALENT and v.curl_residual > 0.1
    assert classify_equivalence(s1, s1, LOOPS).label is Label.IDENTICAL


def test_classify_needs_enclosing_loop():
    g = grid()
    with pytest.raises(ValueError):
        classify_equivalence(thin_state(g), PotentialState.zero(g), LOOPS[1:])


def test_classify_symmetric_and_transitive():
    g = grid()
    base = thin_state(g)
    fam = [base,
           apply_narrow(base, GaugeChi.polynomial({(2, 0, 0): 0.1})),
           apply_narrow(base, GaugeChi.polynomial({(0, 1, 0): -0.5, (1, 1, 0): 0.05})),
           PotentialState.zero(g),
           apply_narrow(PotentialState.zero(g), GaugeChi.polynomial({(1, 0, 0): 0.3}))]
    labels = {}
    for i, a in enumerate(fam):
        for j, b in enumerate(fam):
            if i != j:
                labels[i, j] = classify_equivalence(a, b, LOOPS).label
                if (j, i) in labels:
                    assert labels[i, j] is labels[j, i]
    narrowish = {Label.NARROW_EQUIVALENT, Label.IDENTICAL}
    for i in range(5):
        for j in range(5):
            for k in range(5):
                if len({i, j, k}) == 3 and labels[i, j] in narrowish and labels[j, k] in narrowish:
                    assert labels[i, k] in narrowish
    assert labels[0, 3] is Label.WIDE_ONLY and labels[3, 4] is Label.NARROW_EQUIVALENT


def test_verdict_serialises():
    g = grid()
    v = classify_equivalence(thin_state(g), PotentialState.zero(g), LOOPS, loop_ids=["a", "b"])
    d = v.to_dict()
    assert d["label"] == "WIDE_ONLY"
    assert [x["id"] for x in d["loop_integrals"]] == ["a", "b"]
