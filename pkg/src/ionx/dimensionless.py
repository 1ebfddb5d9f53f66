"""Physical and scaled parameter sets, and the normalization map between them.

Everything downstream of this module works in scaled units: lengths in Debye
lengths, concentrations in units of the bulk concentration, diffusion
coefficients in units of ``D_a``, potentials in units of RT/F and time in
units of lambda**2 / D_a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import DEFAULT_TEMPERATURE, FARADAY, GAS_CONSTANT


class InvalidParameterError(ValueError):
    """A physical or scaled parameter is outside its admissible range."""


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional description of the membrane system (SI units).

    Attributes
    ----------
    permittivity : float
        Absolute permittivity of the medium [F/m].
    temperature : float
        Absolute temperature [K].
    bulk_concentration : float
        Concentration of the bathing electrolyte [mol/m^3].
    diffusion_solution, diffusion_membrane : tuple of float
        Per-species diffusion coefficients in solution and membrane [m^2/s].
    membrane_thickness, boundary_layer_width : float
        Membrane thickness ``d`` and width of each bath layer ``delta`` [m].
    fixed_charge : float
        Concentration of fixed (negative) groups in the membrane [mol/m^3].
    valences : tuple of int
        Charge numbers of the mobile species.
    """

    permittivity: float
    temperature: float
    bulk_concentration: float
    diffusion_solution: tuple[float, ...]
    diffusion_membrane: tuple[float, ...]
    membrane_thickness: float
    boundary_layer_width: float
    fixed_charge: float
    valences: tuple[int, ...] = (1, -1)

    def __post_init__(self):
        scalars = {
            "permittivity": self.permittivity,
            "temperature": self.temperature,
            "bulk_concentration": self.bulk_concentration,
            "membrane_thickness": self.membrane_thickness,
            "boundary_layer_width": self.boundary_layer_width,
        }
        for name, value in scalars.items():
            if not value > 0:
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")
        if self.fixed_charge < 0:
            raise InvalidParameterError("fixed_charge must be non-negative")
        n = len(self.valences)
        if len(self.diffusion_solution) != n or len(self.diffusion_membrane) != n:
            raise InvalidParameterError("one diffusion coefficient per species is required")
        if min(self.diffusion_solution) <= 0 or min(self.diffusion_membrane) <= 0:
            raise InvalidParameterError("diffusion coefficients must be positive")


@dataclass(frozen=True)
class ScalingBasis:
    """Characteristic scales used for normalization.

    ``temperature`` is carried so that the permittivity and potential scales
    can be inverted; it defaults to 298.15 K.
    """

    D_a: float
    c_bulk: float
    lam: float
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        for name in ("D_a", "c_bulk", "lam", "temperature"):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidParameterError(f"scaling basis {name} must be positive, got {value!r}")

    @classmethod
    def from_physical(cls, p: PhysicalParams, D_a: float) -> "ScalingBasis":
        """Basis with ``c_bulk`` taken from ``p`` and lambda set to its Debye length."""
        return cls(D_a=D_a, c_bulk=p.bulk_concentration, lam=compute_debye_length(p),
                   temperature=p.temperature)

    @property
    def time_scale(self) -> float:
        """Seconds per unit of scaled time."""
        return self.lam ** 2 / self.D_a

    @property
    def flux_scale(self) -> float:
        """mol m^-2 s^-1 per unit of scaled flux."""
        return self.D_a * self.c_bulk / self.lam

    @property
    def potential_scale(self) -> float:
        """Volts per unit of scaled potential (the thermal voltage)."""
        return GAS_CONSTANT * self.temperature / FARADAY

    @property
    def current_scale(self) -> float:
        """A m^-2 per unit of scaled current density."""
        return FARADAY * self.D_a * self.c_bulk / self.lam


@dataclass(frozen=True)
class DimensionlessSystem:
    """Scaled parameters of the two-ion membrane system.

    ``d`` and ``delta`` are in Debye lengths; ``D_S``/``D_M`` are the
    solution/membrane diffusion coefficients per species.
    """

    X: float = 1.0
    z: tuple[int, ...] = (1, -1)
    D_S: tuple[float, ...] = (1.0, 1.0)
    D_M: tuple[float, ...] = (0.1, 0.1)
    d: float = 50.0
    delta: float = 100.0
    c0: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        if self.X < 0:
            raise InvalidParameterError("X must be non-negative")
        if len(self.z) != len(self.D_S) or len(self.z) != len(self.D_M):
            raise InvalidParameterError("z, D_S and D_M must have one entry per species")
        for name in ("d", "delta", "c0", "epsilon"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if min(self.D_S) <= 0 or min(self.D_M) <= 0:
            raise InvalidParameterError("diffusion coefficients must be positive")

    @property
    def n_species(self) -> int:
        return len(self.z)

    def donnan_pair(self) -> tuple[float, float]:
        """Analytic membrane-interior concentrations for a 1:1 electrolyte.

        Solves ``c1 * c2 = c0**2`` and ``c1 - c2 = X``.
        """
        if tuple(self.z) != (1, -1):
            raise InvalidParameterError("Donnan pair is only defined here for z = (1, -1)")
        c1 = 0.5 * self.X + math.sqrt(0.25 * self.X ** 2 + self.c0 ** 2)
        return c1, c1 - self.X


def reference_system() -> DimensionlessSystem:
    """The reference membrane system: X=1, z=(1,-1), D_S=1, D_M=0.1, d=50, delta=100."""
    return DimensionlessSystem()


def compute_debye_length(p: PhysicalParams) -> float:
    """Debye length ``sqrt(eps' R T / (F^2 c_bulk))`` in metres."""
    for value in (p.permittivity, p.temperature, p.bulk_concentration):
        if not value > 0:
            raise InvalidParameterError("Debye length needs positive permittivity, temperature and concentration")
    return math.sqrt(p.permittivity * GAS_CONSTANT * p.temperature
                     / (FARADAY ** 2 * p.bulk_concentration))


def nondimensionalize(p: PhysicalParams, b: ScalingBasis) -> DimensionlessSystem:
    """Map physical parameters onto the scaled system defined by basis ``b``."""
    if b.lam == compute_debye_length(p) and b.c_bulk == p.bulk_concentration:
        # lambda is the Debye length of p itself: the scaled permittivity is 1 by definition
        eps = 1.0
    else:
        eps = GAS_CONSTANT * p.temperature * p.permittivity / (FARADAY ** 2 * b.c_bulk * b.lam ** 2)
    return DimensionlessSystem(
        X=p.fixed_charge / b.c_bulk,
        z=tuple(p.valences),
        D_S=tuple(D / b.D_a for D in p.diffusion_solution),
        D_M=tuple(D / b.D_a for D in p.diffusion_membrane),
        d=p.membrane_thickness / b.lam,
        delta=p.boundary_layer_width / b.lam,
        c0=p.bulk_concentration / b.c_bulk,
        epsilon=eps,
    )


def redimensionalize(s: DimensionlessSystem, b: ScalingBasis) -> PhysicalParams:
    """Inverse of :func:`nondimensionalize`."""
    permittivity = s.epsilon * FARADAY ** 2 * b.c_bulk * b.lam ** 2 / (GAS_CONSTANT * b.temperature)
    return PhysicalParams(
        permittivity=permittivity,
        temperature=b.temperature,
        bulk_concentration=s.c0 * b.c_bulk,
        diffusion_solution=tuple(D * b.D_a for D in s.D_S),
        diffusion_membrane=tuple(D * b.D_a for D in s.D_M),
        membrane_thickness=s.d * b.lam,
        boundary_layer_width=s.delta * b.lam,
        fixed_charge=s.X * b.c_bulk,
        valences=tuple(s.z),
    )


def flux_to_physical(J, b: ScalingBasis):
    """Scaled flux to mol m^-2 s^-1."""
    return J * b.flux_scale


def time_to_physical(tau, b: ScalingBasis):
    """Scaled time to seconds."""
    return tau * b.time_scale
