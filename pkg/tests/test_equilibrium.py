"""Interface profile tests: grids, closed forms, the Newton solver, stress.

Frozen numbers in here come from hand derivations with the reference
constants (A = B = C = rho_c = T_c = 1, D = 0.2, E = 1) at an undercooling
of 0.01: bulk densities 1 +/- 0.1, width sqrt(50), surface tension
(2 * 0.01)^(3/2) / 3, coexistence pressure 5e-5.
"""

import io
import math

import numpy as np
import pytest
from scipy.integrate import solve_bvp

from thermocap import (
    FluidParams,
    GridConfig,
    Profile,
    bulk_conditions,
    bulk_states,
    closed_profile,
    equilibrium_stress_residual,
    interface_observables,
    interface_width,
    pressure,
    solve_full_bvp,
    stress_tensor,
    surface_tension_closed,
    surface_tension_quadrature,
)
from thermocap.eos import bulk_energy_partials
from thermocap.equilibrium import (
    NewtonReport,
    derivative_4th,
    first_integral_residual,
    profile_to_csv,
    reduced_residual,
    second_derivative_4th,
    stress_yy_profile,
    _coupled_jacobian_banded,
    _coupled_residual,
)
from thermocap.errors import CriticalIsotherm, InvalidConfig, UndecayedTail

P0 = FluidParams()
BC = bulk_conditions(P0, delta_t=0.01)


# ---------------------------------------------------------------------------
# Grid and profile invariants
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    {"n_points": 1000},          # even
    {"n_points": 49},            # odd but too small
    {"n_points": 0},
    {"half_width_in_zeta": 7.9},
    {"half_width_in_zeta": 0.0},
])
def test_grid_config_rejects_bad_values(kwargs):
    with pytest.raises(InvalidConfig):
        GridConfig(**kwargs)


def test_grid_config_boundary_values_are_accepted():
    g = GridConfig(half_width_in_zeta=8.0, n_points=51)
    assert g.n_points == 51


def test_profile_validation():
    y = np.linspace(-1.0, 1.0, 11)
    rho = np.full(11, P0.rho_c)
    s = np.full(11, -0.005)
    with pytest.raises(ValueError, match="equal length"):
        Profile(y, rho[:-1], s, BC, provenance="test")
    with pytest.raises(ValueError, match="increasing"):
        Profile(y[::-1], rho, s, BC, provenance="test")
    with pytest.raises(ValueError, match="uniform"):
        Profile(np.concatenate([y[:-1], [y[-1] + 0.5]]), rho, s, BC, provenance="test")
    with pytest.raises(ValueError, match="5 nodes"):
        Profile(y[:4], rho[:4], s[:4], BC, provenance="test")


def test_profile_arrays_are_frozen():
    prof = closed_profile(P0, BC, GridConfig(n_points=51))
    with pytest.raises(ValueError):
        prof.rho[0] = 2.0
    assert prof.mid_index == 25
    assert prof.h == pytest.approx(prof.y[1] - prof.y[0])


def test_grid_midpoint_is_exactly_zero():
    for n in (51, 101, 1001):
        prof = closed_profile(P0, BC, GridConfig(n_points=n))
        assert prof.y[prof.mid_index] == 0.0


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def test_interface_width_reference_value():
    assert interface_width(P0, BC) == pytest.approx(math.sqrt(50.0), rel=1e-15)
    # width doubles when the undercooling is quartered
    bc4 = bulk_conditions(P0, delta_t=0.0025)
    assert interface_width(P0, bc4) == pytest.approx(2 * math.sqrt(50.0), rel=1e-14)


def test_interface_width_diverges_on_the_critical_isotherm():
    with pytest.raises(CriticalIsotherm):
        interface_width(P0, bulk_conditions(P0, delta_t=0.0))


def test_closed_profile_is_the_tanh_front():
    prof = closed_profile(P0, BC)
    zeta = interface_width(P0, BC)
    liquid, vapor = bulk_states(P0, BC)
    expected = P0.rho_c + 0.5 * (liquid.rho - vapor.rho) * np.tanh(prof.y / (2 * zeta))
    np.testing.assert_allclose(prof.rho, expected, rtol=1e-14, atol=1e-16)
    assert prof.rho[prof.mid_index] == P0.rho_c
    # antisymmetry about the dividing surface, exact by construction
    np.testing.assert_allclose(prof.rho + prof.rho[::-1], 2 * P0.rho_c,
                               rtol=0, atol=1e-15)
    assert prof.provenance == "closed-form"


def test_surface_tension_closed_reference_value():
    expected = (2 * 0.01) ** 1.5 / 3.0
    assert surface_tension_closed(P0, BC) == pytest.approx(expected, rel=1e-15)


def test_surface_tension_quadrature_agrees_with_closed_form():
    for dt in (1e-4, 1e-3, 1e-2, 1e-1):
        bc = bulk_conditions(P0, delta_t=dt)
        quad = surface_tension_quadrature(P0, closed_profile(P0, bc))
        assert quad == pytest.approx(surface_tension_closed(P0, bc), rel=1e-6)


def test_quadrature_refuses_undecayed_tails():
    # 8 zeta of half-width is a legal grid but leaves a tanh tail of about
    # 7e-5 at the boundary, far beyond the 1e-6-of-the-jump budget
    short = closed_profile(P0, BC, GridConfig(half_width_in_zeta=8.0, n_points=201))
    with pytest.raises(UndecayedTail):
        surface_tension_quadrature(P0, short)


def test_interface_observables_bundle():
    prof = closed_profile(P0, BC)
    obs = interface_observables(P0, BC, prof)
    assert obs.rho_l == pytest.approx(1.1, rel=1e-15)
    assert obs.rho_v == pytest.approx(0.9, rel=1e-15)
    assert obs.zeta == pytest.approx(math.sqrt(50.0), rel=1e-15)
    assert obs.f0 == pytest.approx(2.5e-5, rel=1e-15)
    assert obs.sigma_quad == pytest.approx(obs.sigma_closed, rel=1e-6)
    assert obs.to_dict()["delta_T"] == BC.delta_t


# ---------------------------------------------------------------------------
# Finite-difference stencils
# ---------------------------------------------------------------------------

def test_stencils_are_exact_on_quartics():
    x = np.linspace(-2.0, 3.0, 41)
    h = x[1] - x[0]
    f = 0.3 * x ** 4 - x ** 3 + 2 * x ** 2 - 5 * x + 1
    df = 1.2 * x ** 3 - 3 * x ** 2 + 4 * x - 5
    d2f = 3.6 * x ** 2 - 6 * x + 4
    np.testing.assert_allclose(derivative_4th(f, h), df, rtol=1e-12, atol=1e-11)
    # the second-derivative stencil is central only: interior nodes 2..n-3
    np.testing.assert_allclose(second_derivative_4th(f, h), d2f[2:-2],
                               rtol=1e-12, atol=1e-10)


def test_stencils_converge_at_fourth_order():
    errs = []
    for n in (101, 201, 401):
        x = np.linspace(0.0, 1.0, n)
        h = x[1] - x[0]
        err1 = np.max(np.abs(derivative_4th(np.sin(3 * x), h) - 3 * np.cos(3 * x)))
        err2 = np.max(np.abs(second_derivative_4th(np.sin(3 * x), h)
                             + 9 * np.sin(3 * x[2:-2])))
        errs.append((err1, err2))
    for i in (0, 1):
        order = math.log(errs[0][i] / errs[2][i]) / math.log(4.0)
        assert order > 3.7, f"stencil {i} converges at order {order:.2f}"


# ---------------------------------------------------------------------------
# Residual certificates of the closed profile
# ---------------------------------------------------------------------------

def test_closed_profile_residuals_at_reference_grid():
    prof = closed_profile(P0, BC)
    assert np.max(np.abs(reduced_residual(P0, BC, prof))) < 1e-10
    assert np.max(np.abs(first_integral_residual(P0, BC, prof))) < 1e-11


def test_residuals_converge_at_order_four():
    norms = []
    for n in (251, 501, 1001):
        prof = closed_profile(P0, BC, GridConfig(n_points=n))
        norms.append((np.max(np.abs(reduced_residual(P0, BC, prof))),
                      np.max(np.abs(first_integral_residual(P0, BC, prof)))))
    for i in (0, 1):
        order = math.log(norms[0][i] / norms[2][i]) / math.log(4.0)
        assert order > 3.5, f"residual {i} converges at order {order:.2f}"


def test_residual_localizes_a_point_defect():
    prof = closed_profile(P0, BC)
    rho = prof.rho.copy()
    mid = prof.mid_index
    rho[mid] += 1e-6
    bent = Profile(prof.y, rho, prof.s.copy(), BC, provenance="perturbed")
    resid = np.abs(reduced_residual(P0, BC, bent))
    # residual nodes start at index 2, so the defect lands at mid - 2
    assert np.argmax(resid) == mid - 2
    assert resid.max() > 1e-5
    assert np.max(resid[: mid - 10]) < 1e-9
    assert np.max(resid[mid + 10:]) < 1e-9


def test_uniform_bulk_profile_has_zero_residual():
    liquid, _ = bulk_states(P0, BC)
    y = np.linspace(-5.0, 5.0, 101)
    flat = Profile(y, np.full(101, liquid.rho), np.full(101, liquid.s), BC,
                   provenance="uniform-bulk")
    np.testing.assert_allclose(reduced_residual(P0, BC, flat), 0.0, atol=1e-15)


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------

def test_newton_report_invariant():
    with pytest.raises(ValueError, match="residual <= tolerance"):
        NewtonReport(iterations=3, residual_norm=1.0, converged=True,
                     damping_history=(0, 0, 0), tolerance=1e-10)


def test_full_solve_converges_quickly_at_reference_undercooling():
    prof, report = solve_full_bvp(P0, BC)
    assert report.converged
    assert report.iterations <= 10
    assert report.residual_norm <= 1e-10
    assert len(report.damping_history) == report.iterations
    assert prof.provenance == "full-solver"
    # Dirichlet closure: the truncated boundary carries the exact bulk states
    liquid, vapor = bulk_states(P0, BC)
    assert prof.rho[0] == vapor.rho and prof.rho[-1] == liquid.rho
    assert prof.s[0] == vapor.s and prof.s[-1] == liquid.s


def test_full_solution_stays_near_the_tanh_front():
    prof, _ = solve_full_bvp(P0, BC)
    seed = closed_profile(P0, BC)
    # entropy-density gradient coupling shifts the profile at O(delta_t)
    assert np.max(np.abs(prof.rho - seed.rho)) < 1e-3
    assert np.max(np.abs(prof.rho - seed.rho)) > 1e-5


def test_full_solution_satisfies_momentum_balance():
    for dt, bound in ((1e-2, 1e-7), (1e-3, 1e-9), (1e-4, 1e-11)):
        bc = bulk_conditions(P0, delta_t=dt)
        prof, report = solve_full_bvp(P0, bc)
        assert report.converged
        assert equilibrium_stress_residual(P0, prof) < bound


def test_full_solve_handles_the_large_undercooling():
    # delta_t = 0.1 has a nearly singular translation mode; the solver must
    # still reach the tolerance and keep densities inside the bulk bracket
    bc = bulk_conditions(P0, delta_t=0.1)
    prof, report = solve_full_bvp(P0, bc)
    assert report.converged
    assert report.residual_norm <= 1e-10
    assert report.iterations <= 40
    liquid, vapor = bulk_states(P0, bc)
    slack = 1e-6 * (liquid.rho - vapor.rho)
    assert prof.rho.min() >= vapor.rho - slack
    assert prof.rho.max() <= liquid.rho + slack


def test_decoupled_gradient_energy_reduces_to_single_field():
    # with D = 0 the entropy equation decouples; the density equation is
    # then exactly the reduced one and the solution hugs the tanh front
    p = FluidParams(D=0.0)
    prof, report = solve_full_bvp(p, BC)
    assert report.converged and report.iterations <= 10
    seed = closed_profile(p, BC)
    assert np.max(np.abs(prof.rho - seed.rho)) < 2e-4


def test_banded_jacobian_matches_finite_differences():
    g = GridConfig(half_width_in_zeta=8.0, n_points=51)
    bc = bulk_conditions(P0, delta_t=0.05)
    seed = closed_profile(P0, bc, g)
    rho = seed.rho.copy()
    s = seed.s.copy()
    h = seed.h
    ab = _coupled_jacobian_banded(P0, bc, rho, s, h)
    q = rho.size - 2
    m = 2 * q
    dense = np.zeros((m, m))
    for j in range(m):
        for i in range(max(0, j - 3), min(m, j + 4)):
            dense[i, j] = ab[3 + i - j, j]
    # symmetry is structural: the system is the gradient of an energy
    np.testing.assert_allclose(dense, dense.T, rtol=0, atol=1e-12)

    def residual_of(vec):
        return _coupled_residual(P0, bc,
                                 np.concatenate([[rho[0]], vec[0::2], [rho[-1]]]),
                                 np.concatenate([[s[0]], vec[1::2], [s[-1]]]), h)

    x0 = np.empty(m)
    x0[0::2] = rho[1:-1]
    x0[1::2] = s[1:-1]
    base = residual_of(x0)
    step = 1e-7
    fd = np.zeros((m, m))
    for j in range(m):
        bumped = x0.copy()
        bumped[j] += step
        fd[:, j] = (residual_of(bumped) - base) / step
    np.testing.assert_allclose(dense, fd, rtol=2e-5, atol=1e-6)


def test_full_solution_matches_independent_collocation_solver():
    # cross-check against scipy's adaptive collocation on the first-order
    # system; agreement is limited by this solver's O(h^2) discretization
    liquid, vapor = bulk_states(P0, BC)
    det = P0.C * P0.E - P0.D * P0.D

    def rhs(y, u):
        rho, drho, s, ds = u
        gr, gs = bulk_energy_partials(P0, rho, s)
        f1 = gr - s * BC.T0 - BC.mu1
        f2 = gs - rho * BC.T0
        return np.vstack([drho, (P0.E * f1 - P0.D * f2) / det,
                          ds, (P0.C * f2 - P0.D * f1) / det])

    def bcs(ua, ub):
        return np.array([ua[0] - vapor.rho, ua[2] - vapor.s,
                         ub[0] - liquid.rho, ub[2] - liquid.s])

    prof, _ = solve_full_bvp(P0, BC)
    seed = closed_profile(P0, BC)
    u0 = np.vstack([seed.rho, np.gradient(seed.rho, seed.y),
                    seed.s, np.gradient(seed.s, seed.y)])
    sol = solve_bvp(rhs, bcs, seed.y, u0, tol=1e-10, max_nodes=200000)
    assert sol.status == 0
    np.testing.assert_allclose(prof.rho, sol.sol(prof.y)[0], rtol=0, atol=1e-4)
    np.testing.assert_allclose(prof.s, sol.sol(prof.y)[2], rtol=0, atol=1e-5)


# ---------------------------------------------------------------------------
# Capillary stress
# ---------------------------------------------------------------------------

def test_stress_is_minus_pressure_at_uniform_bulk():
    liquid, _ = bulk_states(P0, BC)
    zero = np.zeros(3)
    sig = stress_tensor(P0, liquid, zero, zero, 0.0, 0.0)
    np.testing.assert_allclose(
        sig, -pressure(P0, liquid.rho, liquid.s) * np.eye(3), rtol=1e-14)


def test_stress_tensor_is_symmetric_for_generic_gradients():
    rng = np.random.default_rng(3)
    liquid, _ = bulk_states(P0, BC)
    for _ in range(20):
        grad_rho = rng.normal(size=3)
        grad_s = rng.normal(size=3)
        sig = stress_tensor(P0, liquid, grad_rho, grad_s,
                            rng.normal(), rng.normal())
        np.testing.assert_allclose(sig, sig.T, rtol=0, atol=1e-12)
    with pytest.raises(ValueError, match="3-vector"):
        stress_tensor(P0, liquid, np.zeros(2), np.zeros(3), 0.0, 0.0)


def test_normal_stress_is_constant_and_equals_bulk_traction():
    # the strong form of mechanical equilibrium: sigma_yy is a first
    # integral, equal to minus the coexistence pressure everywhere
    prof, _ = solve_full_bvp(P0, BC, GridConfig(n_points=4001))
    _, sigma_yy = stress_yy_profile(P0, prof)
    liquid, _ = bulk_states(P0, BC)
    traction = -pressure(P0, liquid.rho, liquid.s)
    assert np.ptp(sigma_yy) <= 1e-8
    assert np.max(np.abs(sigma_yy - traction)) <= 1e-8


def test_stress_residual_flags_a_non_equilibrium_profile():
    prof = closed_profile(P0, BC)
    wrong = Profile(prof.y, prof.rho, np.full_like(prof.s, -0.005), BC,
                    provenance="constant-entropy")
    assert equilibrium_stress_residual(P0, wrong) > 1e-5
    assert equilibrium_stress_residual(P0, prof) < 1e-5


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def test_profile_csv_roundtrip():
    prof = closed_profile(P0, BC, GridConfig(n_points=51))
    buf = io.StringIO()
    profile_to_csv(prof, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "y,rho,s"
    assert len(lines) == 52
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",")
    np.testing.assert_array_equal(data[:, 0], prof.y)
    np.testing.assert_array_equal(data[:, 1], prof.rho)
    np.testing.assert_array_equal(data[:, 2], prof.s)
