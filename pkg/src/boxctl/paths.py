"""Time-parametrized side lengths of a moving rectangle.

A :class:`DeformationPath` is a pair of :class:`SideLaw` objects, one per axis.
Each side law carries the length and its first two time derivatives, which
is exactly what the gauge-transformed Schrödinger equation on the unit square
consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

ScalarFn = Callable[[float], float]


def _const(value: float) -> ScalarFn:
    return lambda t: value


@dataclass(frozen=True)
class SideLaw:
    """One side length ``f(t)`` with derivatives ``fp = f'`` and ``fpp = f''``."""

    f: ScalarFn
    fp: ScalarFn
    fpp: ScalarFn

    @classmethod
    def constant(cls, length: float) -> "SideLaw":
        return cls(_const(float(length)), _const(0.0), _const(0.0))

    @classmethod
    def linear(cls, start: float, end: float, t0: float, t1: float) -> "SideLaw":
        rate = (end - start) / (t1 - t0)
        return cls(lambda t: start + rate * (t - t0), _const(rate), _const(0.0))

    @classmethod
    def smoothstep(cls, start: float, end: float, t0: float, t1: float) -> "SideLaw":
        """Quintic ramp with zero velocity and acceleration at both ends."""
        span = t1 - t0
        jump = end - start

        def s(t):
            return min(max((t - t0) / span, 0.0), 1.0)

        def f(t):
            x = s(t)
            return start + jump * x**3 * (10.0 - 15.0 * x + 6.0 * x * x)

        def fp(t):
            x = s(t)
            return jump * 30.0 * x * x * (1.0 - x) ** 2 / span

        def fpp(t):
            x = s(t)
            return jump * 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / span**2

        return cls(f, fp, fpp)

    @classmethod
    def from_samples(cls, t: Sequence[float], f: Sequence[float]) -> "SideLaw":
        """Cubic-spline side law through sampled lengths (derivatives from the spline)."""
        spline = CubicSpline(np.asarray(t, float), np.asarray(f, float), bc_type="natural")
        d1, d2 = spline.derivative(1), spline.derivative(2)
        return cls(lambda x: float(spline(x)), lambda x: float(d1(x)), lambda x: float(d2(x)))

    @classmethod
    def from_derivative_samples(cls, t, f, fp, fpp) -> "SideLaw":
        """Hermite interpolation of recorded ``f``, ``f'`` and ``f''``, held constant past the last sample.

        ``f`` interpolates (f, f'), ``f'`` interpolates (f', f''), ``f''`` is
        piecewise linear; after the last sample the side stops.
        """
        t, f, fp, fpp = (np.asarray(v, float) for v in (t, f, fp, fpp))
        h0 = CubicHermiteSpline(t, f, fp)
        h1 = CubicHermiteSpline(t, fp, fpp)
        lo, hi = float(t[0]), float(t[-1])
        return cls(
            _hold(lambda x: float(h0(x)), lo, hi),
            _hold(lambda x: float(h1(x)), lo, hi, value_outside=0.0),
            _hold(lambda x: float(np.interp(x, t, fpp)), lo, hi, value_outside=0.0),
        )


def _hold(fn: ScalarFn, lo: float, hi: float, value_outside: float | None = None) -> ScalarFn:
    """Clamp the argument to ``[lo, hi]``; optionally return a constant outside."""

    def g(t):
        if value_outside is not None and not lo <= t <= hi:
            return value_outside
        return fn(min(max(t, lo), hi))

    return g


def _richardson(g: ScalarFn, t: float, h: float) -> float:
    """Fourth-order derivative estimate from central differences with steps ``h`` and ``h/2``."""
    d1 = (g(t + h) - g(t - h)) / (2 * h)
    d2 = (g(t + h / 2) - g(t - h / 2)) / h
    return (4 * d2 - d1) / 3


@dataclass(frozen=True)
class DeformationPath:
    """Side lengths ``f1(t)``, ``f2(t)`` of the rectangle ``(0,f1) x (0,f2)`` on ``[t_start, t_end]``."""

    side1: SideLaw
    side2: SideLaw
    t_start: float
    t_end: float

    # flat accessors, mirroring the usual f1, f1', f1'', f2, f2', f2'' notation
    def f1(self, t):
        return self.side1.f(t)

    def f1p(self, t):
        return self.side1.fp(t)

    def f1pp(self, t):
        return self.side1.fpp(t)

    def f2(self, t):
        return self.side2.f(t)

    def f2p(self, t):
        return self.side2.fp(t)

    def f2pp(self, t):
        return self.side2.fpp(t)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def sides(self, t: float) -> tuple[float, float]:
        return self.side1.f(t), self.side2.f(t)

    def rect(self, t: float):
        from .spectrum import Rect

        return Rect(*self.sides(t))

    @classmethod
    def static(cls, a: float, b: float, duration: float, t_start: float = 0.0) -> "DeformationPath":
        return cls(SideLaw.constant(a), SideLaw.constant(b), t_start, t_start + duration)

    @classmethod
    def linear(cls, a0, a1, b0, b1, duration, t_start=0.0) -> "DeformationPath":
        t1 = t_start + duration
        return cls(SideLaw.linear(a0, a1, t_start, t1), SideLaw.linear(b0, b1, t_start, t1), t_start, t1)

    @classmethod
    def smoothstep(cls, a0, a1, b0, b1, duration, t_start=0.0) -> "DeformationPath":
        t1 = t_start + duration
        return cls(
            SideLaw.smoothstep(a0, a1, t_start, t1), SideLaw.smoothstep(b0, b1, t_start, t1), t_start, t1
        )

    def check(self, samples: int = 64, rtol: float = 1e-6) -> None:
        """Raise ``ValueError`` unless sides stay positive and derivatives match finite differences."""
        ts = np.linspace(self.t_start, self.t_end, samples)
        h = 1e-4 * max(self.duration, 1e-12)
        inner = ts[1:-1]
        for name, side in (("f1", self.side1), ("f2", self.side2)):
            vals = np.array([side.f(t) for t in ts])
            if np.any(vals <= 0):
                raise ValueError(f"{name} is not positive on the path interval")
            for deriv, base, label in ((side.fp, side.f, "'"), (side.fpp, side.fp, "''")):
                fd = np.array([_richardson(base, t, h) for t in inner])
                given = np.array([deriv(t) for t in inner])
                if np.any(np.abs(fd - given) > rtol * (1.0 + np.abs(given).max())):
                    raise ValueError(f"supplied {name}{label} disagrees with finite differences")

    @classmethod
    def from_spec(cls, spec: dict) -> "DeformationPath":
        """Build a path from a plain dictionary (the JSON path format of the CLI).

        ``type`` is ``static`` (``a``, ``b``, ``duration``), ``linear`` or
        ``smoothstep`` (``a0``, ``a1``, ``b0``, ``b1``, ``duration``) or
        ``samples`` (``t``, ``f1``, ``f2`` lists, spline-interpolated).
        """
        kind = spec.get("type")
        t0 = float(spec.get("t_start", 0.0))
        if kind == "static":
            return cls.static(float(spec["a"]), float(spec["b"]), float(spec["duration"]), t0)
        if kind in ("linear", "smoothstep"):
            a0, b0 = float(spec["a0"]), float(spec["b0"])
            a1, b1 = float(spec.get("a1", a0)), float(spec.get("b1", b0))
            return getattr(cls, kind)(a0, a1, b0, b1, float(spec["duration"]), t0)
        if kind == "samples":
            t = np.asarray(spec["t"], float)
            return cls(SideLaw.from_samples(t, spec["f1"]), SideLaw.from_samples(t, spec["f2"]), float(t[0]), float(t[-1]))
        raise ValueError(f"unknown path type {kind!r}; expected static, linear, smoothstep or samples")
