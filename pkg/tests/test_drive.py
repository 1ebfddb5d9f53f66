import pytest
from hypothesis import given, strategies as st

from ionx.drive import Piecewise, Square, Step, parse_drive
from ionx.grid import OutOfDomainError


def test_step_is_zero_at_origin():
    s = Step(5.0)
    assert s.eval(0.0) == 0.0
    assert s.eval(1e-12) == 5.0
    assert s.breakpoints(10.0) == []


def test_square_wave_edges():
    sq = Square(5.0, 40.0, 0.5)
    assert sq.eval(0.0) == 0.0
    assert sq.eval(10.0) == 5.0
    assert sq.eval(20.0) == 0.0
    assert sq.eval(39.9) == 0.0
    assert sq.eval(40.0) == 5.0
    assert sq.breakpoints(100.0) == [20.0, 40.0, 60.0, 80.0]


def test_interval_value_takes_open_interval():
    sq = Square(5.0, 40.0, 0.5)
    assert sq.interval_value(0.0, 0.1) == 5.0
    assert sq.interval_value(19.9, 20.0) == 5.0
    assert sq.interval_value(20.0, 20.1) == 0.0


def test_piecewise():
    p = Piecewise(((0.0, 0.0), (10.0, 5.0), (50.0, 0.0)))
    assert p.eval(5.0) == 0.0 and p.eval(10.0) == 5.0 and p.eval(60.0) == 0.0
    assert p.breakpoints(100.0) == [10.0, 50.0]
    with pytest.raises(ValueError):
        Piecewise(((1.0, 0.0), (1.0, 2.0)))


def test_negative_time_rejected():
    with pytest.raises(OutOfDomainError):
        Step(1.0).eval(-1.0)


@pytest.mark.parametrize("text", ["step(5.0)", "square(5.0, 40.0, 0.5)", "piecewise(0.0:0.0, 10.0:5.0)"])
def test_parse_round_trip(text):
    assert str(parse_drive(text)) == text


@pytest.mark.parametrize("text", ["ramp(1)", "step()", "square(1)", "step(x)"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_drive(text)


@given(a=st.floats(-10, 10), period=st.floats(0.5, 100), duty=st.floats(0.05, 0.95),
       t=st.floats(1e-6, 1e3))
def test_square_takes_only_two_values(a, period, duty, t):
    assert Square(a, period, duty).eval(t) in (0.0, a)
