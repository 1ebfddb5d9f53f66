"""Piecewise-constant drive signals (boundary potential or applied current)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .grid import OutOfDomainError


class DriveSignal:
    """Base class.  Subclasses are right-continuous, piecewise-constant functions of time."""

    def eval(self, tau: float) -> float:
        raise NotImplementedError

    def breakpoints(self, tau_end: float) -> list[float]:
        """Discontinuity times in ``(0, tau_end)``."""
        raise NotImplementedError

    def interval_value(self, t0: float, t1: float) -> float:
        """Value held over the open interval ``(t0, t1)`` that contains no breakpoint."""
        return self.eval(0.5 * (t0 + t1))

    def _check(self, tau):
        if tau < 0:
            raise OutOfDomainError(f"drive evaluated at negative time {tau}")


@dataclass(frozen=True)
class Step(DriveSignal):
    """0 at ``tau = 0``, ``amplitude`` afterwards."""

    amplitude: float

    def eval(self, tau):
        self._check(tau)
        return 0.0 if tau == 0 else float(self.amplitude)

    def breakpoints(self, tau_end):
        return []

    def __str__(self):
        return f"step({self.amplitude!r})"


@dataclass(frozen=True)
class Square(DriveSignal):
    """``amplitude`` during the first ``duty * period`` of every period, else 0.

    The value at ``tau = 0`` itself is 0, as for :class:`Step`.
    """

    amplitude: float
    period: float
    duty: float = 0.5

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not 0 < self.duty < 1:
            raise ValueError("duty must lie in (0, 1)")

    def eval(self, tau):
        self._check(tau)
        if tau == 0:
            return 0.0
        phase = tau / self.period - math.floor(tau / self.period)
        return float(self.amplitude) if phase < self.duty else 0.0

    def breakpoints(self, tau_end):
        out = []
        n = 0
        while True:
            base = n * self.period
            for t in (base, base + self.duty * self.period):
                if 0 < t < tau_end:
                    out.append(t)
            if base >= tau_end:
                return out
            n += 1

    def __str__(self):
        return f"square({self.amplitude!r}, {self.period!r}, {self.duty!r})"


@dataclass(frozen=True)
class Piecewise(DriveSignal):
    """Value of the last breakpoint at or before ``tau``; 0 before the first one."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        times = [t for t, _ in self.points]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("piecewise breakpoints must be strictly increasing")

    def eval(self, tau):
        self._check(tau)
        value = 0.0
        for t, v in self.points:
            if t <= tau:
                value = float(v)
            else:
                break
        return value

    def breakpoints(self, tau_end):
        return [t for t, _ in self.points if 0 < t < tau_end]

    def __str__(self):
        return "piecewise(" + ", ".join(f"{t!r}:{v!r}" for t, v in self.points) + ")"


_CALL = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


def parse_drive(text: str) -> DriveSignal:
    """Parse ``step(5)``, ``square(5, 40, 0.5)`` or ``piecewise(0:0, 10:5, 50:0)``."""
    m = _CALL.match(text)
    if not m:
        raise ValueError(f"cannot parse drive {text!r}")
    name, args = m.group(1).lower(), [a.strip() for a in m.group(2).split(",") if a.strip()]
    try:
        if name == "step" and len(args) == 1:
            return Step(float(args[0]))
        if name == "square" and len(args) in (2, 3):
            return Square(*(float(a) for a in args))
        if name == "piecewise" and args:
            return Piecewise(tuple((float(t), float(v)) for t, v in (a.split(":") for a in args)))
    except ValueError as exc:
        raise ValueError(f"bad drive {text!r}: {exc}") from None
    raise ValueError(f"unknown drive {text!r}; expected step(a), square(a, period[, duty]) or piecewise(t:v, ...)")
