"""Flat ``key=value`` run configuration.

A config file holds one ``key = value`` per line; ``#`` starts a comment.
Keys carry section prefixes (``system.X``, ``solver.dt_max``, ...).  Values
from later sources override earlier ones: built-in defaults, then scenario
presets, then the config file, then ``--set`` overrides.  The manifest written
next to every run is itself a valid config file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams
from .constants import VACUUM_PERMITTIVITY
from .dimensionless import DimensionlessSystem, PhysicalParams, ScalingBasis
from .drive import DriveSignal, parse_drive
from .grid import CompartmentGrid, build_reference_grid, build_scaled_grid, system_for_grid
from .solver import Galvanostatic, Potentiostatic, SolveSettings


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


def _optional_float(text):
    return None if text == "auto" else float(text)


# key -> (default text, parser, description)
SCHEMA: dict = {
    "scenario": ("custom", str, "scenario preset the run belongs to"),
    "system.X": ("1.0", float, "scaled fixed-charge concentration of the membrane"),
    "system.z": ("1,-1", _ints, "charge numbers of the mobile species"),
    "system.D_S": ("1.0,1.0", _floats, "scaled diffusion coefficients in solution"),
    "system.D_M": ("0.1,0.1", _floats, "scaled diffusion coefficients in the membrane"),
    "system.c0": ("1.0", float, "scaled bath concentration"),
    "system.epsilon": ("1.0", float, "scaled permittivity"),
    "grid": ("scaled", _choice("scaled", "reference"), "compartment grid: scaled (d=50) or reference (verbatim width list)"),
    "mode": ("potentiostatic", _choice("potentiostatic", "galvanostatic"), "drive mode"),
    "drive": ("step(5.0)", parse_drive, "drive signal: step(A) | square(A, period, duty) | piecewise(t:v, ...)"),
    "tau_end": ("100.0", float, "end of the transient run"),
    "output_dt": ("0.5", float, "spacing of the output samples"),
    "solver.newton_tol": ("1e-10", float, "Newton residual tolerance"),
    "solver.max_newton_iters": ("25", int, "Newton iterations per step"),
    "solver.dt_init": ("0.001", float, "first step (and step after a drive breakpoint)"),
    "solver.dt_min": ("1e-10", float, "smallest step before giving up"),
    "solver.dt_max": ("0.5", float, "largest step"),
    "solver.method": ("bdf1", _choice("bdf1", "bdf2"), "time discretisation"),
    "channel.D": ("1.0", float, "scaled diffusion coefficient of the channel medium"),
    "channel.u": ("0.5", float, "scaled flow speed"),
    "channel.y_obs": ("10.0", float, "observer distance from the transmitter"),
    "channel.segments": ("1", int, "number of point sources making up the line transmitter"),
    "channel.length": ("0.0", float, "length of the line transmitter"),
    "noise.D_a": ("2e-09", float, "reference diffusion coefficient [m^2/s]"),
    "noise.c_bulk": ("100.0", float, "bath concentration [mol/m^3]"),
    "noise.eps_r": ("2.0", float, "relative permittivity of the membrane"),
    "noise.temperature": ("298.15", float, "temperature [K]"),
    "noise.bandwidth": ("1.0", float, "bandwidth of the thermal-noise term"),
    "noise.V0": ("auto", _optional_float, "voltage per shot event; auto = one elementary charge"),
    "noise.dc_coefficient": ("1.0", float, "coefficient of the DC impulse term"),
    "noise.thermal_model": ("reference", _choice("reference", "standard"), "thermal-noise formula"),
    "noise.omega_min": ("1e-05", float, "lowest angular frequency"),
    "noise.omega_max": ("1000.0", float, "highest angular frequency"),
    "noise.omega_points": ("81", int, "log-spaced frequency samples"),
    "sweep.v_sig": ("1,3,5,7", _floats, "signal amplitudes of a sweep"),
    "jobs": ("1", int, "parallel worker processes for sweeps"),
}


def parse_config_text(text: str) -> dict:
    """``key = value`` lines to a dict of raw strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        out[key.strip()] = value.strip()
    return out


def read_config_file(path) -> dict:
    with open(path) as fh:
        return parse_config_text(fh.read())


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully resolved run configuration.

    ``raw`` keeps the canonical text of every key so the manifest can be
    written back out and read in again.
    """

    raw: dict

    @classmethod
    def resolve(cls, *layers: dict) -> "RunConfig":
        raw = {k: v[0] for k, v in SCHEMA.items()}
        for layer in layers:
            for key, value in layer.items():
                if key not in SCHEMA:
                    raise ConfigError(f"unknown config key {key!r}")
                raw[key] = str(value)
        cfg = cls(raw)
        for key in SCHEMA:
            try:
                cfg.get(key)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{key}: {exc}") from None
        cfg._check()
        return cfg

    def get(self, key):
        return SCHEMA[key][1](self.raw[key])

    def with_values(self, **kv) -> "RunConfig":
        """Copy with keys replaced; use ``__`` for the section dot."""
        return RunConfig.resolve(self.raw, {k.replace("__", "."): v for k, v in kv.items()})

    def _check(self):
        m = len(self.get("system.z"))
        for key in ("system.D_S", "system.D_M"):
            if len(self.get(key)) != m:
                raise ConfigError(f"{key} needs one entry per species ({m})")
        if not self.get("output_dt") > 0:
            raise ConfigError("output_dt must be positive")
        if not self.get("noise.omega_max") > self.get("noise.omega_min") > 0:
            raise ConfigError("need 0 < noise.omega_min < noise.omega_max")
        try:
            self.settings()
            self.channel()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    # -- typed views -----------------------------------------------------

    def base_system(self) -> DimensionlessSystem:
        return DimensionlessSystem(
            X=self.get("system.X"), z=self.get("system.z"), D_S=self.get("system.D_S"),
            D_M=self.get("system.D_M"), c0=self.get("system.c0"), epsilon=self.get("system.epsilon"))

    def grid(self) -> CompartmentGrid:
        return build_reference_grid() if self.get("grid") == "reference" else build_scaled_grid()

    def system_and_grid(self) -> tuple[DimensionlessSystem, CompartmentGrid]:
        g = self.grid()
        return system_for_grid(self.base_system(), g), g

    def drive_signal(self) -> DriveSignal:
        return self.get("drive")

    def mode(self, signal: DriveSignal | None = None):
        signal = self.drive_signal() if signal is None else signal
        return Potentiostatic(signal) if self.get("mode") == "potentiostatic" else Galvanostatic(signal)

    def output_times(self, tau_end: float | None = None) -> tuple:
        tau_end = self.get("tau_end") if tau_end is None else tau_end
        n = int(math.floor(tau_end / self.get("output_dt") + 1e-9))
        return tuple(float(v) for v in np.round(np.arange(n + 1) * self.get("output_dt"), 12))

    def settings(self, tau_end: float | None = None) -> SolveSettings:
        return SolveSettings(
            newton_tol=self.get("solver.newton_tol"), max_newton_iters=self.get("solver.max_newton_iters"),
            dt_init=self.get("solver.dt_init"), dt_min=self.get("solver.dt_min"),
            dt_max=self.get("solver.dt_max"), method=self.get("solver.method"),
            output_times=self.output_times(tau_end))

    def channel(self) -> ChannelParams:
        kw = dict(D_medium=self.get("channel.D"), u=self.get("channel.u"), y_obs=self.get("channel.y_obs"))
        n = self.get("channel.segments")
        if n > 1:
            return ChannelParams.line(n, self.get("channel.length"), **kw)
        return ChannelParams(**kw)

    def scaling_basis(self) -> ScalingBasis:
        """Scaling for the noise model; lambda is the Debye length of the noise parameters."""
        T = self.get("noise.temperature")
        c = self.get("noise.c_bulk")
        D_a = self.get("noise.D_a")
        s = self.base_system()
        p = PhysicalParams(
            permittivity=self.get("noise.eps_r") * VACUUM_PERMITTIVITY, temperature=T,
            bulk_concentration=c, diffusion_solution=tuple(D * D_a for D in s.D_S),
            diffusion_membrane=tuple(D * D_a for D in s.D_M), membrane_thickness=1.0,
            boundary_layer_width=1.0, fixed_charge=s.X * c, valences=s.z)
        return ScalingBasis.from_physical(p, D_a)

    def omegas(self) -> np.ndarray:
        return np.logspace(math.log10(self.get("noise.omega_min")), math.log10(self.get("noise.omega_max")),
                           self.get("noise.omega_points"))

    def manifest_text(self) -> str:
        lines = ["# effective parameters of this run; usable as --config"]
        for key in SCHEMA:
            lines.append(f"{key} = {self.raw[key]}")
        return "\n".join(lines) + "\n"
