# Propagating the transmitted flux to an observer downstream
import numpy as np

from ionx import (ChannelParams, FluxSeries, Potentiostatic, SolveSettings, Square, build_scaled_grid,
                  line_source_waveform, reference_system, peak_time, simulate, solve_equilibrium,
                  system_for_grid)

ch = ChannelParams(D_medium=1.0, u=0.5, y_obs=10.0)
print("kernel peaks at tau =", peak_time(ch.D_medium, ch.u, ch.y_obs))

g = build_scaled_grid()
s = system_for_grid(reference_system(), g)
eq = solve_equilibrium(s, g)
times = tuple(np.round(np.arange(0.0, 80.001, 0.25), 10))

for v in (3.0, 5.0, 7.0, 9.0):
    res = simulate(s, g, Potentiostatic(Square(v, 40.0, 0.5)), 80.0, SolveSettings(output_times=times),
                   initial=eq)
    conc = line_source_waveform(FluxSeries(res.taus, res.exit_flux), ch)
    i = int(np.argmax(conc.values))
    print(f"V_sig = {v:g}: peak concentration {conc.values[i]:.5f} at tau = {conc.taus[i]:g}")

# A line transmitter is a set of point sources sharing the flux.
line = ChannelParams.line(5, 2.0, D_medium=1.0, u=0.5, y_obs=10.0)
flux = FluxSeries(np.arange(400) * 0.25, np.ones(400))
print("point vs line source after tau=99.75:",
      line_source_waveform(flux, ch).values[-1], line_source_waveform(flux, line).values[-1])
