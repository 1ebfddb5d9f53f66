"""Network-model simulator for a membrane-based ion transmitter.

Scaled Nernst-Planck-Poisson transport through a bath / ion-exchange membrane
/ bath system, drive signals, propagation through an advection-diffusion
channel, membrane noise and SNR, and a netlist export of the compartment
network.
"""

from .channel import ChannelParams, FluxSeries, greens_function, line_source_waveform, peak_time
from .dimensionless import (DimensionlessSystem, PhysicalParams, ScalingBasis, compute_debye_length,
                            nondimensionalize, reference_system, redimensionalize)
from .drive import Piecewise, Square, Step, parse_drive
from .grid import (CompartmentGrid, build_reference_grid, build_scaled_grid, build_uniform_grid,
                   network_elements, system_for_grid)
from .netlist import export_netlist, parse_netlist
from .noise import noise_chain, snr
from .solver import (ConvergenceError, Galvanostatic, Potentiostatic, SolveSettings, StateVector,
                     membrane_exit_flux, simulate, solve_equilibrium, solve_steady)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "FluxSeries", "greens_function", "line_source_waveform", "peak_time",
    "DimensionlessSystem", "PhysicalParams", "ScalingBasis", "compute_debye_length",
    "nondimensionalize", "reference_system", "redimensionalize",
    "Piecewise", "Square", "Step", "parse_drive",
    "CompartmentGrid", "build_reference_grid", "build_scaled_grid", "build_uniform_grid",
    "network_elements", "system_for_grid",
    "export_netlist", "parse_netlist", "noise_chain", "snr",
    "ConvergenceError", "Galvanostatic", "Potentiostatic", "SolveSettings", "StateVector",
    "membrane_exit_flux", "simulate", "solve_equilibrium", "solve_steady",
]
