import math
from dataclasses import replace

import numpy as np
import pytest

from ionx.dimensionless import reference_system
from ionx.drive import Square, Step
from ionx.grid import build_scaled_grid, build_uniform_grid, system_for_grid
from ionx.solver import (ConvergenceError, Galvanostatic, Potentiostatic, SolveSettings, StateVector,
                         _model, current_profile, face_fluxes, initial_guess, link_displacement,
                         link_fluxes, membrane_exit_flux, residual, simulate, solve_equilibrium,
                         solve_steady, step_transient)


@pytest.fixture(scope="module")
def toy():
    g = build_uniform_grid(8, 8, 8, 1.0)
    s = system_for_grid(reference_system(), g)
    eq = solve_equilibrium(s, g)
    return s, g, eq


@pytest.fixture(scope="module")
def big():
    g = build_scaled_grid()
    s = system_for_grid(reference_system(), g)
    return s, g, solve_equilibrium(s, g)


def _perturbed(s, g, eq, seed=0):
    rng = np.random.default_rng(seed)
    nodes = eq.nodes.copy()
    nodes[1:-1] *= 1 + 0.05 * rng.standard_normal(nodes[1:-1].shape)
    nodes[1:-1, -1] += 0.1 * rng.standard_normal(nodes.shape[0] - 2)
    return replace(eq, nodes=nodes)


@pytest.mark.parametrize("mode", [Potentiostatic(Step(2.0)), Galvanostatic(Step(0.01))])
@pytest.mark.parametrize("a0", [0.0, 50.0])
def test_jacobian_matches_finite_differences(toy, mode, a0):
    s, g, eq = toy
    mdl = _model(s, g)
    x = _perturbed(s, g, eq).nodes.ravel()
    hist_c = np.full((2, g.N), -0.3)
    A = mdl.dense_jacobian(x, a0, mode)
    F0 = mdl.residual(x, a0, hist_c, 0.1, mode, 2.0)
    h = 1e-7
    fd = np.empty_like(A)
    for j in range(x.size):
        xp = x.copy()
        xp[j] += h
        fd[:, j] = (mdl.residual(xp, a0, hist_c, 0.1, mode, 2.0) - F0) / h
    assert np.max(np.abs(A - fd)) < 1e-5 * max(1.0, np.max(np.abs(A)))


def test_equilibrium_matches_donnan(big):
    s, g, eq = big
    c1, c2 = s.donnan_pair()
    k = g.mid_membrane()
    assert eq.c[0, k] == pytest.approx(c1, rel=1e-6)
    assert eq.c[1, k] == pytest.approx(c2, rel=1e-6)
    # Donnan potential -ln(c1/c0) relative to the grounded bath; the link flux
    # satisfies Boltzmann only to second order in the potential step per link
    assert eq.phi[k] == pytest.approx(-math.log(c1), abs=1e-4)


def test_equilibrium_has_no_flux_and_no_residual(big):
    s, g, eq = big
    assert np.max(np.abs(link_fluxes(s, g, eq))) < 1e-8
    F = residual(s, g, eq, Potentiostatic(Step(0.0)), None, math.inf)
    assert np.max(np.abs(F)) < 1e-9


def test_uniform_state_poisson_residual(toy):
    s, g, _ = toy
    nodes = np.zeros((2 * g.N + 1, 3))
    nodes[:, :2] = 1.0
    F = residual(s, g, StateVector(g, nodes), Potentiostatic(Step(0.0)), None, math.inf).reshape(-1, 3)
    poisson_centres = F[1::2, 2]
    # uniform bulk concentrations leave -X of charge in every membrane compartment
    assert np.allclose(poisson_centres, np.where(g.membrane, g.widths * s.X, 0.0), atol=1e-15)
    assert np.allclose(F[:, :2], 0.0)


def test_link_flux_formula():
    g = build_uniform_grid(1, 1, 1, 2.0)
    s = system_for_grid(reference_system(), g)
    nodes = np.zeros((7, 3))
    nodes[:, 0] = [1.0, 1.2, 1.5, 1.7, 1.9, 1.3, 1.0]
    nodes[:, 1] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.8, 1.0]
    nodes[:, 2] = [0.3, 0.2, 0.0, -0.1, -0.3, -0.1, 0.0]
    J = link_fluxes(s, g, StateVector(g, nodes))
    # link 0: face node 0 -> centre node 1, h = 1, D_S = 1, face value at node 0
    assert J[0, 0] == pytest.approx(-(1.2 - 1.0 + 1.0 * (0.2 - 0.3)))
    # link 3 (membrane right half): centre node 3 -> face node 4, D_M = 0.1, face value at node 4
    assert J[1, 3] == pytest.approx(-0.1 * (0.6 - 0.7 - 0.6 * (-0.3 + 0.1)))
    E = link_displacement(s, g, StateVector(g, nodes))
    assert E[0] == pytest.approx(0.1)


def test_mass_bookkeeping_over_a_step(toy):
    s, g, eq = toy
    dt = 0.05
    new = step_transient(s, g, eq, Potentiostatic(Step(5.0)), dt)
    J = face_fluxes(s, g, new)
    stored = (g.widths * (new.c - eq.c)).sum(axis=1) / dt
    assert np.allclose(stored, J[:, 0] - J[:, -1], atol=1e-9)


def test_current_is_uniform_along_the_system(toy):
    s, g, eq = toy
    dt = 0.05
    new = step_transient(s, g, eq, Potentiostatic(Step(5.0)), dt)
    I = current_profile(s, g, new, eq, dt)
    assert np.ptp(I) < 1e-8 * max(1.0, abs(I).max())


def test_steady_current_is_uniform(big):
    s, g, eq = big
    st = solve_steady(s, g, Potentiostatic(Step(5.0)), eq)
    z = np.array(s.z, dtype=float)
    I = z @ link_fluxes(s, g, st)
    assert np.ptp(I) < 1e-8
    J = link_fluxes(s, g, st)
    assert np.ptp(J[0]) < 1e-8 and np.ptp(J[1]) < 1e-8


def test_galvanostatic_reproduces_potentiostatic_steady_state(toy):
    s, g, eq = toy
    pot = solve_steady(s, g, Potentiostatic(Step(3.0)), eq)
    I = float(np.dot(s.z, link_fluxes(s, g, pot)[:, 0]))
    gal = solve_steady(s, g, Galvanostatic(Step(I)), eq)
    assert gal.phi_nodes[0] == pytest.approx(3.0, abs=1e-7)
    assert np.allclose(gal.nodes, pot.nodes, atol=1e-7)


def test_galvanostatic_transient_carries_the_imposed_current(toy):
    s, g, eq = toy
    res = simulate(s, g, Galvanostatic(Step(0.005)), 2.0, SolveSettings(output_times=(1.0, 2.0)), initial=eq)
    assert np.allclose(res.current, 0.005, atol=1e-9)


def test_backward_euler_is_first_order(toy):
    s, g, eq = toy
    drive = Potentiostatic(Step(5.0))
    T = 0.2

    def run(n):
        st = eq
        for _ in range(n):
            st = step_transient(s, g, st, drive, T / n)
        return st.c

    ref = run(256)
    errs = [np.max(np.abs(run(n) - ref)) for n in (4, 8, 16)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 0.85)


def test_simulate_lands_on_breakpoints(toy):
    s, g, eq = toy
    res = simulate(s, g, Potentiostatic(Square(2.0, 4.0, 0.5)), 8.0,
                   SolveSettings(output_times=(0.0, 1.0, 8.0)), initial=eq)
    assert 2.0 in res.step_taus and 4.0 in res.step_taus and 6.0 in res.step_taus
    assert list(res.taus) == [0.0, 1.0, 8.0]
    assert res.drive[1] == 2.0


def test_exit_flux_positive_for_positive_drive(toy):
    s, g, eq = toy
    st = solve_steady(s, g, Potentiostatic(Step(2.0)), eq)
    assert membrane_exit_flux(s, g, st) > 0


def test_convergence_failure_is_reported(toy):
    s, g, eq = toy
    with pytest.raises(ConvergenceError) as info:
        step_transient(s, g, eq, Potentiostatic(Step(50.0)), 10.0, SolveSettings(max_newton_iters=1))
    assert info.value.residual_norm > 0


def test_state_shape_checked(toy, big):
    s, g, _ = toy
    with pytest.raises(ValueError):
        link_fluxes(s, g, initial_guess(*big[:2]))
