import math

import numpy as np
import pytest
from scipy.integrate import quad

from ionx.channel import (ChannelParams, FluxSeries, PreconditionError, greens_function,
                          line_source_waveform, peak_time)
from ionx.grid import OutOfDomainError


def gauss(D, u, y, t):
    return math.exp(-(y - u * t) ** 2 / (4 * D * t)) / math.sqrt(4 * math.pi * D * t)


def test_greens_function_values():
    assert greens_function(1.0, 0.5, 10.0, 4.0) == pytest.approx(gauss(1.0, 0.5, 10.0, 4.0), rel=1e-14)
    t = np.array([0.5, 1.0, 20.0])
    assert np.allclose(greens_function(2.0, 0.0, 3.0, t), [gauss(2.0, 0.0, 3.0, v) for v in t], rtol=1e-14)
    with pytest.raises(OutOfDomainError):
        greens_function(1.0, 0.5, 10.0, 0.0)


def test_greens_function_conserves_mass_in_space():
    mass = quad(lambda y: greens_function(1.0, 0.5, y, 3.0), -60, 60)[0]
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_peak_time():
    D, u, y = 1.0, 0.5, 10.0
    tp = peak_time(D, u, y)
    assert tp == pytest.approx((-1 + math.sqrt(26)) / 0.25)
    ts = np.linspace(tp - 0.5, tp + 0.5, 2001)
    assert abs(ts[np.argmax(greens_function(D, u, y, ts))] - tp) < 1e-3
    assert peak_time(2.0, 0.0, 4.0) == pytest.approx(4.0)


def test_impulse_response_is_the_kernel():
    dt = 0.05
    taus = np.arange(400) * dt
    flux = np.zeros_like(taus)
    flux[0] = 1.0 / dt
    out = line_source_waveform(FluxSeries(taus, flux), ChannelParams(u=0.0, y_obs=3.0))
    expected = np.array([0.0] + [gauss(1.0, 0.0, 3.0, t) for t in taus[1:]])
    assert np.max(np.abs(out.values - expected)) < 1e-10


def test_linearity():
    taus = np.arange(200) * 0.1
    a = FluxSeries(taus, np.sin(taus) ** 2)
    b = FluxSeries(taus, np.exp(-taus))
    ch = ChannelParams()
    ab = line_source_waveform(a + b, ch).values
    assert np.allclose(ab, line_source_waveform(a, ch).values + line_source_waveform(b, ch).values,
                       rtol=1e-13, atol=1e-16)


def test_causality():
    taus = np.arange(300) * 0.1
    flux = np.where(taus >= 10.0, 1.0, 0.0)
    out = line_source_waveform(FluxSeries(taus, flux), ChannelParams())
    assert np.all(out.values[taus <= 10.0] == 0.0)
    assert out.values[-1] > 0


def test_line_source_shares():
    taus = np.arange(200) * 0.1
    f = FluxSeries(taus, np.ones_like(taus))
    ch = ChannelParams.line(4, 2.0)
    direct = sum(0.25 * line_source_waveform(f, ChannelParams(), y_obs=10.0 - y).values
                 for y in (0.0, 0.5, 1.0, 1.5))
    assert np.allclose(line_source_waveform(f, ch).values, direct, rtol=1e-13)
    with pytest.raises(ValueError):
        ChannelParams(segments=((0.0, 0.5),))


def test_preconditions():
    with pytest.raises(PreconditionError):
        line_source_waveform(FluxSeries(np.array([0.0, 0.1, 0.3]), np.ones(3)), ChannelParams())
    with pytest.raises(PreconditionError):
        line_source_waveform(FluxSeries(np.array([0.0]), np.ones(1)), ChannelParams())
