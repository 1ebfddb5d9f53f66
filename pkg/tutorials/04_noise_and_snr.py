# Membrane noise, flux-noise spectrum and SNR
import numpy as np

from ionx import (Potentiostatic, Step, build_scaled_grid, membrane_exit_flux, noise_chain, reference_system,
                  solve_equilibrium, solve_steady, system_for_grid)
from ionx.config import RunConfig

g = build_scaled_grid()
s = system_for_grid(reference_system(), g)
eq = solve_equilibrium(s, g)
basis = RunConfig.resolve().scaling_basis()   # D_a = 2e-9, c_bulk = 100, eps_r = 2
print(f"Debye length of the noise parameters: {basis.lam:.4e} m")

omegas = np.concatenate([[0.0], np.logspace(-4, 3, 8)])
for v in (1.0, 3.0, 5.0, 7.0):
    st = solve_steady(s, g, Potentiostatic(Step(v)), eq)
    J = membrane_exit_flux(s, g, st)
    r = noise_chain(s, basis, eq, J, omegas, c_i0=float(st.c[0, g.mid_membrane()]))
    print(f"\nV_sig = {v:g}: J = {J:.5f}, R_M = {r.rc.R_M:.2f}, C_M = {r.rc.C_M:.3f}, theta = {r.rc.theta:.3f}")
    print("  DC impulse weight (not noise):", r.S_shot.dc_impulse_weight)
    for w, sj, snr_db in zip(omegas, r.S_J.psd, r.snr_db):
        print(f"  omega = {w:9.3g}   S_J = {sj:.4e}   SNR = {snr_db:7.2f} dB")
