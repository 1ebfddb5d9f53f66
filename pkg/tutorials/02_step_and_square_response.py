# Transient flux through the membrane for a potential step and a square wave
import numpy as np

from ionx import (Potentiostatic, SolveSettings, Square, Step, build_scaled_grid, membrane_exit_flux,
                  reference_system, simulate, solve_equilibrium, solve_steady, system_for_grid)

g = build_scaled_grid()
s = system_for_grid(reference_system(), g)
eq = solve_equilibrium(s, g)

# Step of amplitude 5 applied at tau = 0; samples on a log grid show the
# fast migration response and the slower polarisation that follows.
times = tuple(np.round(np.concatenate([[0.0], np.logspace(-3, 2, 21)]), 12))
res = simulate(s, g, Potentiostatic(Step(5.0)), 100.0, SolveSettings(output_times=times), initial=eq)
J_ss = membrane_exit_flux(s, g, solve_steady(s, g, Potentiostatic(Step(5.0)), eq))
for t, j in zip(res.taus, res.exit_flux):
    print(f"tau = {t:9.4f}   J_exit = {j:.6f}   ({j / J_ss:6.1%} of steady state)")
print(f"{len(res.step_sizes)} implicit steps")

# Larger drives give larger steady fluxes.
for v in (1.0, 3.0, 5.0, 7.0):
    st = solve_steady(s, g, Potentiostatic(Step(v)), eq)
    print(f"V_sig = {v:g}: steady exit flux {membrane_exit_flux(s, g, st):.6f}")

# Square wave, period 40, on for the first half: after the falling edge the
# flux briefly reverses while the polarised membrane relaxes.
res = simulate(s, g, Potentiostatic(Square(5.0, 40.0, 0.5)), 80.0,
               SolveSettings(output_times=tuple(np.arange(0.0, 80.01, 2.0))), initial=eq)
for t, j in zip(res.taus, res.exit_flux):
    print(f"tau = {t:5.1f}   drive = {Square(5.0, 40.0, 0.5).eval(t):3.1f}   J_exit = {j: .6f}")
