"""Thermal and shot noise of the membrane, flux-noise transfer and SNR.

The membrane is lumped into a parallel RC element built from the equilibrium
state.  Shot noise is a Poisson train of exponential voltage events on that
element (a Lorentzian with corner ``1/theta``); thermal noise is flat.  The
voltage PSD is mapped to a flux PSD through the linearised membrane flux and
the SNR is the squared mean flux over the flux PSD.

All frequencies are scaled angular frequencies.  The ``delta(omega)`` term of
the shot spectrum is a deterministic DC offset: it is carried separately in
:attr:`NoiseSpectrum.dc_impulse_weight` and never enters sampled values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import AVOGADRO, BOLTZMANN, FARADAY, GAS_CONSTANT
from .dimensionless import DimensionlessSystem, ScalingBasis


class DivisionDomainError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class MembraneRC:
    C_M: float
    R_M: float
    V0: float = 1.0

    def __post_init__(self):
        if not (self.C_M > 0 and self.R_M > 0 and self.V0 > 0):
            raise ValueError("membrane RC values must be positive")

    @property
    def theta(self) -> float:
        """Time constant ``R_M * C_M``."""
        return self.R_M * self.C_M


@dataclass(frozen=True)
class ShotParams:
    """Pore count and per-pore event rate; only their product (the mean flux) matters."""

    N_pores: float
    k_rate: float

    @property
    def J(self) -> float:
        return self.N_pores * self.k_rate

    @classmethod
    def from_flux(cls, J: float, N_pores: float = 1.0) -> "ShotParams":
        return cls(N_pores, J / N_pores)


@dataclass(frozen=True, eq=False)
class NoiseSpectrum:
    omegas: np.ndarray
    psd: np.ndarray
    dc_impulse_weight: float = 0.0

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        ps = np.broadcast_to(np.asarray(self.psd, dtype=float), om.shape).copy()
        if np.any(np.diff(om) < 0):
            raise ValueError("omegas must be sorted")
        if np.any(ps < 0):
            raise ValueError("PSD values must be non-negative")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "psd", ps)

    def _check(self, other):
        if not np.array_equal(self.omegas, other.omegas):
            raise ValueError("spectra are sampled on different frequency grids")

    def __add__(self, other: "NoiseSpectrum") -> "NoiseSpectrum":
        self._check(other)
        return NoiseSpectrum(self.omegas, self.psd + other.psd,
                             self.dc_impulse_weight + other.dc_impulse_weight)

    def scale(self, k: float) -> "NoiseSpectrum":
        if k < 0:
            raise ValueError("spectra can only be scaled by non-negative factors")
        return NoiseSpectrum(self.omegas, k * self.psd, k * self.dc_impulse_weight)

    __rmul__ = __mul__ = scale


def membrane_rc(s: DimensionlessSystem, eq, V0: float = 1.0, flux_tol: float = 1e-6) -> MembraneRC:
    """Lumped membrane capacitance ``eps / d`` and resistance ``d / sum(z^2 D_M c*)``.

    ``c*`` are the equilibrium concentrations at mid-membrane.
    """
    from .solver import link_fluxes

    g = eq.grid
    J = link_fluxes(s, g, eq)
    if np.max(np.abs(J)) > flux_tol:
        raise ValueError("membrane_rc needs an equilibrium state (non-zero fluxes found)")
    c_star = eq.c[:, g.mid_membrane()]
    z = np.asarray(s.z, dtype=float)
    conductance = float(np.sum(z ** 2 * np.asarray(s.D_M) * c_star))
    return MembraneRC(C_M=s.epsilon / s.d, R_M=s.d / conductance, V0=V0)


def unit_charge_voltage(C_M: float, b: ScalingBasis, area: float | None = None) -> float:
    """Scaled voltage step produced by one elementary charge on the membrane capacitance.

    ``C_M`` is per unit area, so the charge is spread over ``area`` (m^2,
    default one Debye length squared).
    """
    area = b.lam ** 2 if area is None else area
    sigma = 1.0 / (AVOGADRO * b.c_bulk * b.lam * area)
    return sigma / C_M


def thermal_psd(b: ScalingBasis, rc: MembraneRC, bandwidth: float = 1.0, model: str = "reference") -> float:
    """Flat thermal-noise level.

    ``model="reference"`` evaluates ``4 k_B R_M / (lambda R T c_bulk df)`` as
    written for the scaled network.  ``model="standard"`` evaluates the
    Johnson-Nyquist ``4 k_B T R df`` with the membrane area-specific
    resistance in SI units and converts the result to scaled potential
    (units of (RT/F)^2).
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    T = b.temperature
    if model == "reference":
        return 4.0 * BOLTZMANN * rc.R_M / (b.lam * GAS_CONSTANT * T * b.c_bulk * bandwidth)
    if model == "standard":
        R_si = rc.R_M * b.lam * GAS_CONSTANT * T / (FARADAY ** 2 * b.D_a * b.c_bulk)
        return 4.0 * BOLTZMANN * T * R_si * bandwidth * (FARADAY / (GAS_CONSTANT * T)) ** 2
    raise ValueError(f"unknown thermal model {model!r}")


def shot_voltage_psd(p: ShotParams, rc: MembraneRC, omega, dc_coefficient: float = 1.0):
    """Lorentzian shot-noise PSD and the weight of its ``delta(omega)`` term.

    Returns ``(psd, dc_impulse_weight)`` with
    ``psd = J V0 theta^2 / (2 pi (1 + omega^2 theta^2))`` and
    ``dc_impulse_weight = (J V0 dc_coefficient R_M)^2``.
    """
    th = rc.theta
    w = np.asarray(omega, dtype=float)
    psd = p.J / (2.0 * math.pi) * rc.V0 * th ** 2 / (1.0 + (w * th) ** 2)
    dc = (p.J * rc.V0 * dc_coefficient * rc.R_M) ** 2
    return (float(psd) if psd.ndim == 0 else psd), dc


def flux_transfer_factor(s: DimensionlessSystem, c_i0: float, species: int = 0) -> float:
    return (s.D_M[species] * s.z[species] * c_i0 / s.d) ** 2


def flux_psd(S_phi: NoiseSpectrum, s: DimensionlessSystem, c_i0: float, species: int = 0) -> NoiseSpectrum:
    """Map a potential PSD to the flux PSD of ``species`` (pointwise scaling)."""
    return S_phi.scale(flux_transfer_factor(s, c_i0, species))


def snr(J: float, S_J: NoiseSpectrum) -> NoiseSpectrum:
    """``J^2 / S_J(omega)`` at every sample; the DC impulse is not noise and is ignored."""
    if np.any(S_J.psd <= 0):
        raise DivisionDomainError("SNR undefined where the flux PSD is zero")
    return NoiseSpectrum(S_J.omegas, J ** 2 / S_J.psd)


@dataclass(frozen=True)
class NoiseResult:
    rc: MembraneRC
    c_i0: float
    J: float
    S_thermal: NoiseSpectrum
    S_shot: NoiseSpectrum
    S_J: NoiseSpectrum
    SNR: NoiseSpectrum

    @property
    def snr_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.SNR.psd)


def noise_chain(s: DimensionlessSystem, b: ScalingBasis, eq, J_ss: float, omegas, *,
                c_i0: float | None = None, bandwidth: float = 1.0, V0: float | None = None,
                dc_coefficient: float = 1.0, thermal_model: str = "reference",
                include_shot: bool = True, include_thermal: bool = True) -> NoiseResult:
    """Thermal + shot voltage noise -> flux noise -> SNR for a steady flux ``J_ss``.

    ``c_i0`` is the mid-membrane cation concentration of the driven steady
    state; it defaults to the equilibrium value.  ``V0`` defaults to
    :func:`unit_charge_voltage` for the basis ``b``.
    """
    omegas = np.asarray(omegas, dtype=float)
    rc = membrane_rc(s, eq)
    V0 = unit_charge_voltage(rc.C_M, b) if V0 is None else V0
    rc = MembraneRC(rc.C_M, rc.R_M, V0)
    if c_i0 is None:
        c_i0 = float(eq.c[0, eq.grid.mid_membrane()])
    zero = NoiseSpectrum(omegas, np.zeros_like(omegas))
    S_th = NoiseSpectrum(omegas, thermal_psd(b, rc, bandwidth, thermal_model)) if include_thermal else zero
    if include_shot:
        psd, dc = shot_voltage_psd(ShotParams.from_flux(J_ss), rc, omegas, dc_coefficient)
        S_sh = NoiseSpectrum(omegas, psd, dc)
    else:
        S_sh = zero
    S_J = flux_psd(S_th + S_sh, s, c_i0)
    return NoiseResult(rc, c_i0, J_ss, S_th, S_sh, S_J, snr(J_ss, S_J))
