# Equilibrium of a bath / ion-exchange membrane / bath cell
#
# Everything is in scaled units: lengths in Debye lengths, concentrations in
# units of the bath concentration, potentials in RT/F.
import math

import numpy as np

from ionx import build_scaled_grid, reference_system, solve_equilibrium, system_for_grid

g = build_scaled_grid()
s = system_for_grid(reference_system(), g)
print(f"{g.N} compartments, membrane from 0 to {g.membrane_length:g}, baths of {g.left_length:g}")
print("smallest / largest width:", g.widths.min(), g.widths.max())

eq = solve_equilibrium(s, g)

# Deep inside the membrane the fixed charge X is screened by the mobile ions.
# With c1 * c2 = 1 and c1 - c2 = X = 1 the counter-ion sits at the golden ratio.
k = g.mid_membrane()
print("mid-membrane c1, c2:", eq.c[0, k], eq.c[1, k])
print("golden ratio       :", (1 + math.sqrt(5)) / 2)
print("Donnan potential   :", eq.phi[k], "vs", -math.log(eq.c[0, k]))

# Space charge only survives in the double layers at the two interfaces.
rho = eq.charge_density(s)
x = g.centers
for lo, hi in [(-100, -5), (-5, 5), (5, 45), (45, 55), (55, 150)]:
    sel = (x > lo) & (x < hi)
    print(f"max |rho| for {lo:5g} < xi < {hi:4g}: {np.abs(rho[sel]).max():.3e}")
