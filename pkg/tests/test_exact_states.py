"""Solution families: Gaussian germ, Hermite amplitudes, action, quasi-energies."""

import cmath
import math

import numpy as np
import pytest
from scipy.integrate import simpson

from hartree_exact import (
    Constants,
    ModelParams,
    QuadratureError,
    ValidationError,
    action,
    apply_momentum,
    closed_form,
    coherent_constants,
    coherent_state_closed_form,
    effective_potential,
    fock_state,
    germ_solution,
    hermite_function,
    inner,
    mean_energy,
    moments,
    norm_sq,
    periodic_constants,
    quasi_energy,
    tcs_constants,
    trajectory_hamiltonian,
)
from hartree_exact.errors import GridError
from hartree_exact.exact_states import aa_phase_numeric


def lagrangian(params, freqs, consts, ts):
    """Time derivative of the action along the closed-form moment flow."""
    out = np.empty_like(np.asarray(ts, dtype=float))
    for i, t in enumerate(np.atleast_1d(ts)):
        g = closed_form(params, freqs, consts, float(t))
        out[i] = g.P**2 / params.m - trajectory_hamiltonian(params, freqs, g)
    return out


# ---------------------------------------------------------------------------
# germ of the linearised flow


def test_germ_normalisation_and_skew(params, freqs):
    a = germ_solution(params, freqs, 0.7)
    assert abs(a.C) == pytest.approx(1.0 / math.sqrt(params.m * freqs.Omega), rel=1e-14)
    assert a.B == pytest.approx(1j * params.m * freqs.Omega * a.C, rel=1e-14)
    assert a.skew_with_conjugate() == pytest.approx(2.0j, rel=1e-14)
    assert a.N_a == pytest.approx(1.0 / math.sqrt(2.0 * params.hbar), rel=1e-14)


def test_germ_satisfies_variational_system(params, freqs):
    t, h = 0.9, 1e-3

    def resid(step):
        plus = germ_solution(params, freqs, t + step)
        minus = germ_solution(params, freqs, t - step)
        mid = germ_solution(params, freqs, t)
        dB = (plus.B - minus.B) / (2.0 * step)
        dC = (plus.C - minus.C) / (2.0 * step)
        return abs(dC - mid.B / params.m) + abs(dB + params.m * freqs.Omega_sq * mid.C)

    r1, r2 = resid(h), resid(h / 2.0)
    assert r1 < 1e-5
    assert r1 / r2 == pytest.approx(4.0, rel=0.2)  # second-order stencil


# ---------------------------------------------------------------------------
# Hermite amplitudes


def test_hermite_functions_are_orthonormal():
    xi = np.linspace(-25.0, 25.0, 6001)
    h = xi[1] - xi[0]
    fns = [hermite_function(n, xi) for n in range(9)]
    for i in range(9):
        for j in range(i, 9):
            overlap = h * np.sum(fns[i] * fns[j])
            assert overlap == pytest.approx(float(i == j), abs=1e-10)


def test_hermite_recurrence_is_stable_at_large_index():
    xi = np.linspace(-20.0, 20.0, 2001)
    vals = hermite_function(50, xi)
    assert np.all(np.isfinite(vals))
    norm = (xi[1] - xi[0]) * np.sum(vals**2)
    assert norm == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("n", [1, 4, 7])
def test_hermite_parity(n):
    xi = np.linspace(0.1, 6.0, 40)
    left = hermite_function(n, -xi)
    right = hermite_function(n, xi)
    np.testing.assert_allclose(left, (-1.0) ** n * right, rtol=1e-12)


def test_hermite_rejects_negative_index():
    with pytest.raises(ValidationError):
        hermite_function(-1, np.zeros(4))


# ---------------------------------------------------------------------------
# classical action


def test_action_vanishes_at_time_zero(params, freqs):
    assert action(params, freqs, Constants(0.3, -0.2, 0.1, 0.0, 0.9), 0.0) == 0.0


def test_action_closed_form_matches_direct_quadrature(params, freqs):
    consts = periodic_constants(params, freqs, 0)
    t = 5.2
    ts = np.linspace(0.0, t, 4097)
    direct = simpson(lagrangian(params, freqs, consts, ts), x=ts)
    assert action(params, freqs, consts, t) == pytest.approx(direct, abs=1e-9)


def test_action_generic_constants_match_direct_quadrature(params, freqs):
    consts = Constants(0.4, -0.1, 0.05, 0.1, 0.8)
    t = 3.1
    ts = np.linspace(0.0, t, 8193)
    direct = simpson(lagrangian(params, freqs, consts, ts), x=ts)
    assert action(params, freqs, consts, t) == pytest.approx(direct, abs=1e-9)


@pytest.mark.parametrize("t", [0.8, 2.6])
def test_action_derivative_is_the_lagrangian(params, freqs, t):
    consts = Constants(0.2, 0.3, -0.1, 0.05, 1.1)
    h = 1e-3
    dS = (
        action(params, freqs, consts, t + h) - action(params, freqs, consts, t - h)
    ) / (2.0 * h)
    assert dS == pytest.approx(float(lagrangian(params, freqs, consts, [t])[0]), abs=1e-5)


def test_action_unreachable_tolerance_raises(params, freqs):
    # Over a horizon this long the refinement budget runs out before the
    # truncation error can drop below the requested relative accuracy.
    consts = Constants(0.2, 0.3, -0.1, 0.05, 1.1)
    with pytest.raises(QuadratureError):
        action(params, freqs, consts, 1.0e4, rtol=1e-16, atol=0.0)


# ---------------------------------------------------------------------------
# mean energy bookkeeping


def test_mean_energy_matches_grid_expectation(params, freqs, grid):
    psi = fock_state(params, freqs, 1, tcs_constants(params, freqs, 1, p0=0.3, x0=0.2), 0.6, grid)
    kinetic = inner(psi, apply_momentum(psi, params.hbar, order=2)).real / (2.0 * params.m)
    potential = grid.h * float(
        np.sum(effective_potential(params, psi, 0.6) * np.abs(psi.values) ** 2)
    )
    state = moments(psi, params.hbar, order=2).to_state(0.6)
    assert mean_energy(params, freqs, state) == pytest.approx(kinetic + potential, rel=1e-10)


# ---------------------------------------------------------------------------
# solution families on the grid


@pytest.mark.parametrize("t", [0.0, 1.3])
def test_family_members_are_orthonormal(params, freqs, grid, t):
    states = [
        fock_state(params, freqs, n, tcs_constants(params, freqs, n, p0=0.4, x0=0.3), t, grid)
        for n in range(6)
    ]
    for i in range(6):
        for j in range(i, 6):
            overlap = inner(states[i], states[j])
            assert abs(overlap) == pytest.approx(float(i == j), abs=1e-10)
            if i == j:
                assert overlap.real == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", range(6))
def test_family_width_grows_linearly_with_index(params, freqs, grid, n):
    psi = fock_state(params, freqs, n, tcs_constants(params, freqs, n), 0.9, grid)
    ms = moments(psi, params.hbar, order=2)
    expected = params.hbar * (2 * n + 1) / (2.0 * params.m * freqs.Omega)
    assert ms.sigma_xx == pytest.approx(expected, abs=1e-10)


def test_family_moments_follow_the_closed_flow(params, freqs, grid):
    n, t = 2, 1.7
    consts = tcs_constants(params, freqs, n, p0=0.5, x0=-0.2)
    psi = fock_state(params, freqs, n, consts, t, grid)
    ms = moments(psi, params.hbar, order=2)
    g = closed_form(params, freqs, consts, t)
    assert ms.x_mean == pytest.approx(g.X, abs=1e-9)
    assert ms.p_mean == pytest.approx(g.P, abs=1e-9)
    assert ms.sigma_xx == pytest.approx(g.sigma_xx, abs=1e-9)
    assert ms.sigma_px == pytest.approx(g.sigma_px, abs=1e-9)
    assert ms.sigma_pp == pytest.approx(g.sigma_pp, abs=1e-9)


@pytest.mark.parametrize("n,t", [(0, 0.0), (0, 0.8), (2, 0.8)])
def test_family_members_solve_the_equation(params, freqs, grid, n, t):
    consts = tcs_constants(params, freqs, n, p0=0.3, x0=0.1)
    h = 1e-5
    psi = fock_state(params, freqs, n, consts, t, grid)
    plus = fock_state(params, freqs, n, consts, t + h, grid)
    minus = fock_state(params, freqs, n, consts, t - h, grid)
    dpsi_dt = (plus.values - minus.values) / (2.0 * h)
    hpsi = apply_momentum(psi, params.hbar, order=2).values / (2.0 * params.m)
    hpsi = hpsi + effective_potential(params, psi, t) * psi.values
    resid = 1j * params.hbar * dpsi_dt - hpsi
    l2 = math.sqrt(grid.h * float(np.sum(np.abs(resid) ** 2)))
    assert l2 < 1e-6 * math.sqrt(norm_sq(psi))


@pytest.mark.parametrize("n", range(5))
def test_density_has_n_interior_zeros(params, freqs, grid, n):
    t = 0.6
    consts = tcs_constants(params, freqs, n)
    psi = fock_state(params, freqs, n, consts, t, grid)
    g = closed_form(params, freqs, consts, t)
    # Remove the local momentum phase; what is left is real up to one
    # constant, so interior zeros show up as sign changes.
    w = psi.values * np.exp(-1j * g.P * (grid.x - g.X) / params.hbar)
    pivot = w[np.argmax(np.abs(w))]
    u = (w * np.conj(pivot)).real
    u = u[np.abs(u) > 1e-9 * np.abs(u).max()]
    assert int(np.sum(np.diff(np.sign(u)) != 0)) == n


def test_family_requires_matching_width_constants(params, freqs, grid):
    with pytest.raises(ValidationError):
        fock_state(params, freqs, 1, tcs_constants(params, freqs, 0), 0.0, grid)
    skewed = Constants(0.0, 0.0, 0.1, 0.0, params.hbar / (2 * params.m * freqs.Omega))
    with pytest.raises(ValidationError):
        fock_state(params, freqs, 0, skewed, 0.0, grid)
    with pytest.raises(ValidationError):
        fock_state(params, freqs, -1, tcs_constants(params, freqs, 0), 0.0, grid)


def test_family_rejects_undersized_grid(params, freqs):
    from hartree_exact import Grid

    tight = Grid(-2.0, 2.0, 64)
    with pytest.raises(GridError):
        fock_state(params, freqs, 3, tcs_constants(params, freqs, 3), 0.0, tight)


def test_displaced_ground_family_constants(params, freqs):
    alpha = 0.4 - 0.7j
    p0, x0 = 0.2, -0.1
    base = tcs_constants(params, freqs, 0, p0=p0, x0=x0)
    shifted = coherent_constants(params, freqs, alpha, p0=p0, x0=x0)
    mO = params.m * freqs.Omega
    dp = alpha.real * math.sqrt(2.0 * mO * params.hbar)
    dx = -alpha.imag * math.sqrt(2.0 * params.hbar / mO)
    assert shifted.c1 - base.c1 == pytest.approx(dp / (params.m * freqs.OmegaTilde), rel=1e-12)
    assert shifted.c2 - base.c2 == pytest.approx(dx, rel=1e-12)
    assert shifted.c5 == base.c5
    assert coherent_constants(params, freqs, 0.0).as_array() == pytest.approx(
        tcs_constants(params, freqs, 0).as_array()
    )


def test_displaced_ground_state_is_a_boosted_gaussian(params, freqs, grid):
    alpha = 0.5 + 0.3j
    psi = coherent_state_closed_form(params, freqs, alpha, 0.0, grid)
    ms = moments(psi, params.hbar, order=2)
    c = coherent_constants(params, freqs, alpha)
    g = closed_form(params, freqs, c, 0.0)
    assert ms.x_mean == pytest.approx(g.X, abs=1e-10)
    assert ms.p_mean == pytest.approx(g.P, abs=1e-10)
    assert ms.sigma_xx == pytest.approx(params.hbar / (2 * params.m * freqs.Omega), abs=1e-10)
    envelope = np.abs(psi.values) ** 2
    mO = params.m * freqs.Omega
    expected = math.sqrt(mO / (math.pi * params.hbar)) * np.exp(
        -mO / params.hbar * (grid.x - g.X) ** 2
    )
    np.testing.assert_allclose(envelope, expected, atol=1e-10)


# ---------------------------------------------------------------------------
# quasi-energies and the geometric phase


def test_quasi_energy_reduces_to_harmonic_levels():
    p = ModelParams(m=1.0, k=1.0, omega=0.9, hbar=1.0, kappa=0.0)
    f = p.frequencies()
    for n in range(4):
        qe = quasi_energy(p, f, n)
        assert qe.energy == pytest.approx(p.hbar * f.omega0 * (n + 0.5), rel=1e-14)
        assert qe.aa_phase == 0.0


def test_quasi_energy_without_drive_shifts_by_width_term():
    p = ModelParams(m=1.0, k=1.0, omega=0.9, hbar=1.0, a=0.5, b=0.3, c=0.2, kappa=0.4)
    f = p.frequencies()
    for n in range(4):
        qe = quasi_energy(p, f, n)
        expected = p.hbar * (f.Omega + f.kappa_tilde * p.c / (2.0 * p.m * f.Omega)) * (n + 0.5)
        assert qe.energy == pytest.approx(expected, rel=1e-12)
        assert qe.aa_phase == 0.0


def test_quasi_energy_spacing_is_index_independent(params, freqs):
    energies = [quasi_energy(params, freqs, n).energy for n in range(6)]
    gaps = np.diff(energies)
    expected = params.hbar * (
        freqs.Omega + freqs.kappa_tilde * params.c / (2.0 * params.m * freqs.Omega)
    )
    np.testing.assert_allclose(gaps, expected, rtol=1e-12)


def test_geometric_phase_closed_form(params, freqs):
    qe = quasi_energy(params, freqs, 0)
    D = freqs.detuning(params.omega)
    expected = (
        params.drive_period
        * (params.e_charge * params.E_field * params.omega) ** 2
        / (2.0 * params.hbar * params.m * D**2)
    )
    assert qe.aa_phase == pytest.approx(expected, rel=1e-14)
    assert qe.period == pytest.approx(params.drive_period, rel=1e-15)
    assert quasi_energy(params, freqs, 3).aa_phase == qe.aa_phase  # index independent


def test_quasi_energy_rejects_negative_index(params, freqs):
    with pytest.raises(ValidationError):
        quasi_energy(params, freqs, -2)


def test_measured_geometric_phase_matches_closed_form(params, freqs, grid):
    gamma = quasi_energy(params, freqs, 0).aa_phase
    measured = aa_phase_numeric(params, freqs, 0, grid)
    diff = (measured - gamma + math.pi) % (2.0 * math.pi) - math.pi
    assert abs(diff) < 1e-6


def test_period_map_is_a_quasi_energy_phase(params, freqs, grid):
    n = 0
    qe = quasi_energy(params, freqs, n)
    consts = periodic_constants(params, freqs, n)
    psi0 = fock_state(params, freqs, n, consts, 0.0, grid)
    psiT = fock_state(params, freqs, n, consts, qe.period, grid)
    phase = cmath.exp(-1j * qe.energy * qe.period / params.hbar)
    assert float(np.max(np.abs(psiT.values - phase * psi0.values))) < 1e-8
