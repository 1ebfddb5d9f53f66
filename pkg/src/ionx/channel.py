"""1-D advection-diffusion channel between the transmitter and a passive observer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import OutOfDomainError


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FluxSeries:
    taus: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "taus", np.asarray(self.taus, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.taus.shape != self.values.shape:
            raise ValueError("taus and values must have the same shape")

    def __add__(self, other):
        if not np.array_equal(self.taus, other.taus):
            raise ValueError("flux series on different time grids")
        return FluxSeries(self.taus, self.values + other.values)


@dataclass(frozen=True, eq=False)
class ConcentrationSeries:
    taus: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class ChannelParams:
    """Channel diffusion coefficient, flow speed and observer distance.

    ``segments`` lists ``(y_k, share_k)`` source positions along the line
    transmitter; shares must add up to 1.
    """

    D_medium: float = 1.0
    u: float = 0.5
    y_obs: float = 10.0
    segments: tuple = field(default=((0.0, 1.0),))

    def __post_init__(self):
        if not self.D_medium > 0:
            raise ValueError("D_medium must be positive")
        if not self.y_obs > 0:
            raise ValueError("y_obs must be positive")
        if not self.segments:
            raise ValueError("at least one source segment is required")
        if not math.isclose(sum(w for _, w in self.segments), 1.0, rel_tol=1e-9):
            raise ValueError("segment shares must sum to 1")

    @classmethod
    def line(cls, n: int, length: float, **kw) -> "ChannelParams":
        """``n`` equally weighted segments spread over ``[0, length)``."""
        ys = np.arange(n) * (length / n)
        return cls(segments=tuple((float(y), 1.0 / n) for y in ys), **kw)


def greens_function(D, u, y, tau):
    """Advected Gaussian kernel ``exp(-(y - u tau)^2 / (4 D tau)) / sqrt(4 pi D tau)``."""
    t = np.asarray(tau, dtype=float)
    if np.any(t <= 0):
        raise OutOfDomainError("greens_function needs tau > 0")
    out = np.exp(-(y - u * t) ** 2 / (4.0 * D * t)) / np.sqrt(4.0 * math.pi * D * t)
    return float(out) if out.ndim == 0 else out


def peak_time(D, u, y) -> float:
    """Time at which the kernel at distance ``y`` peaks (root of its log-derivative)."""
    # d/dtau log G = 0  ->  u^2 tau^2 + 2 D tau - y^2 = 0
    if u == 0:
        return y * y / (2.0 * D)
    return (-D + math.sqrt(D * D + u * u * y * y)) / (u * u)


def line_source_waveform(flux: FluxSeries, ch: ChannelParams, y_obs: float | None = None) -> ConcentrationSeries:
    """Concentration at the observer: causal Riemann sum of every segment's flux history.

    ``C(tau_i) = sum_k sum_{j<i} share_k J(tau_j) dtau G(y_obs - y_k, tau_i - tau_j)``.
    The ``j = i`` term, where the kernel is singular, is left out.
    """
    taus = flux.taus
    if taus.size < 2:
        raise PreconditionError("need at least two flux samples")
    steps = np.diff(taus)
    dtau = steps[0]
    if not dtau > 0 or not np.allclose(steps, dtau, rtol=1e-9, atol=0):
        raise PreconditionError("flux must be sampled on a uniform time grid")
    y_obs = ch.y_obs if y_obs is None else y_obs
    n = taus.size
    lags = dtau * np.arange(1, n)
    out = np.zeros(n)
    for y_k, share in ch.segments:
        kernel = np.zeros(n)
        kernel[1:] = greens_function(ch.D_medium, ch.u, y_obs - y_k, lags)
        out += share * dtau * np.convolve(flux.values, kernel)[:n]
    return ConcentrationSeries(taus.copy(), out)
