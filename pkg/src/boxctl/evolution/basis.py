"""Sine-basis matrices on the unit square, wave states and the symmetry breaker.

Basis functions are ``e_m(y) = sqrt(2) sin(m pi y)``, ``m = 1..N``; the 2D
basis is the tensor product, stored as an ``(n1, n2)`` coefficient matrix.
Flattened vectors use row-major order, index ``(m-1)*n2 + (n-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..spectrum import Mode, _check_mode


def quadratic_moment_matrix(N: int) -> np.ndarray:
    """``M[m,n] = 2 int_0^1 y^2 sin(m pi y) sin(n pi y) dy`` for ``m, n = 1..N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    k = np.arange(1, N + 1, dtype=float)
    mm, nn = np.meshgrid(k, k, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        off = (-1.0) ** (mm + nn) * 8 * mm * nn / (math.pi**2 * (mm**2 - nn**2) ** 2)
    out = np.where(mm == nn, 0.0, off)
    out[np.diag_indices(N)] = 1.0 / 3.0 - 1.0 / (2 * math.pi**2 * k**2)
    return out


def linear_moment_matrix(N: int) -> np.ndarray:
    """``2 int_0^1 y sin(m pi y) sin(n pi y) dy``; nonzero off the diagonal only for odd ``m - n``."""
    k = np.arange(1, N + 1, dtype=float)
    mm, nn = np.meshgrid(k, k, indexing="ij")
    odd = ((mm - nn) % 2) == 1
    with np.errstate(divide="ignore", invalid="ignore"):
        off = -8 * mm * nn / (math.pi**2 * (mm**2 - nn**2) ** 2)
    out = np.where(odd, off, 0.0)
    out[np.diag_indices(N)] = 0.5
    return out


def cosine_matrix(p: int, N: int) -> np.ndarray:
    """``2 int_0^1 cos(p pi y) sin(m pi y) sin(n pi y) dy = (delta_{p,|m-n|} - delta_{p,m+n}) / 2``."""
    k = np.arange(1, N + 1)
    mm, nn = np.meshgrid(k, k, indexing="ij")
    return 0.5 * ((np.abs(mm - nn) == p).astype(float) - (mm + nn == p).astype(float))


def gauge_matrix(alpha: float, N: int) -> np.ndarray:
    """Matrix of the multiplication by ``exp(i alpha y^2)`` in the sine basis."""
    x, w = leggauss(8 * N + 64)
    y = 0.5 * (x + 1.0)
    w = 0.5 * w
    S = math.sqrt(2.0) * np.sin(np.outer(np.arange(1, N + 1), np.pi * y))
    return (S * (w * np.exp(1j * alpha * y * y))) @ S.T


def sine_samples(N: int, y: np.ndarray) -> np.ndarray:
    """``sqrt(2) sin(m pi y)`` as an ``(len(y), N)`` array."""
    return math.sqrt(2.0) * np.sin(np.outer(np.pi * np.asarray(y), np.arange(1, N + 1)))


@dataclass
class WaveState:
    """Coefficients of ``w`` on the orthonormal tensor sine basis of the unit square."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.array(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2:
            raise ValueError("coeffs must be an (n1, n2) matrix")

    @property
    def n1(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n2(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def from_mode(cls, n1: int, n2: int, mode: Mode) -> "WaveState":
        m, n = _check_mode(mode)
        if m > n1 or n > n2:
            raise ValueError(f"mode {tuple(mode)} outside the {n1}x{n2} basis")
        c = np.zeros((n1, n2), complex)
        c[m - 1, n - 1] = 1.0
        return cls(c)

    @classmethod
    def product(cls, c1, c2) -> "WaveState":
        return cls(np.outer(np.asarray(c1, complex), np.asarray(c2, complex)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def populations(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def amplitude(self, mode: Mode) -> complex:
        return complex(self.coeffs[mode[0] - 1, mode[1] - 1])

    def population(self, mode: Mode) -> float:
        return abs(self.amplitude(mode)) ** 2

    def copy(self) -> "WaveState":
        return WaveState(self.coeffs.copy())


def _bump(t0: float, t1: float) -> Callable[[float], float]:
    """C-infinity bump on ``[t0, t1]`` with peak 1 at the midpoint, flat zero outside."""

    def env(t):
        x = 2.0 * (t - t0) / (t1 - t0) - 1.0
        if abs(x) >= 1.0:
            return 0.0
        return math.exp(1.0 - 1.0 / (1.0 - x * x))

    return env


@dataclass
class SymmetryBreaker:
    """Fixed potential ``W(y1, y2) = y1^2 y2 + sum c_pq cos(p pi y1) cos(q pi y2)``.

    The coefficients ``c_pq`` (``1 <= p, q <= degree``) are drawn from a seeded
    normal distribution and the whole potential is scaled to unit sup-norm,
    which is the operator norm of the multiplication operator. The Hamiltonian
    receives ``strength * envelope(t) * W``.
    """

    n1: int
    n2: int
    strength: float = 1.0
    seed: int = 0
    degree: int = 3
    envelope: Callable[[float], float] | None = None
    coefficients: np.ndarray = field(default=None, repr=False)
    scale: float = field(default=None, repr=False)

    def __post_init__(self):
        if self.coefficients is None:
            rng = np.random.default_rng(self.seed)
            self.coefficients = rng.normal(0.0, 0.5, size=(self.degree, self.degree))
        if self.scale is None:
            y = np.linspace(0.0, 1.0, 401)
            self.scale = 1.0 / float(np.abs(self._raw(y[:, None], y[None, :])).max())

    def _raw(self, y1, y2):
        out = y1**2 * y2
        for p in range(1, self.degree + 1):
            for q in range(1, self.degree + 1):
                out = out + self.coefficients[p - 1, q - 1] * np.cos(p * np.pi * y1) * np.cos(q * np.pi * y2)
        return out

    def function(self, y1, y2):
        """Normalized potential ``W`` at points of the unit square."""
        return self.scale * self._raw(np.asarray(y1), np.asarray(y2))

    def terms(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        """``W = sum coef * kron(A, B)`` with 1D matrices ``A`` (axis 1) and ``B`` (axis 2)."""
        out = [(self.scale, quadratic_moment_matrix(self.n1), linear_moment_matrix(self.n2))]
        for p in range(1, self.degree + 1):
            for q in range(1, self.degree + 1):
                out.append(
                    (self.scale * self.coefficients[p - 1, q - 1], cosine_matrix(p, self.n1), cosine_matrix(q, self.n2))
                )
        return out

    @cached_property
    def potential_coeffs(self) -> np.ndarray:
        """Dense matrix elements of ``W`` (without the strength factor)."""
        dim = self.n1 * self.n2
        out = np.zeros((dim, dim))
        for c, A, B in self.terms():
            out += c * np.kron(A, B)
        return out

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.potential_coeffs)

    def coupling(self, k: Mode, l: Mode) -> float:
        """Matrix element ``<e_k | W | e_l>``."""
        return float(sum(c * A[k[0] - 1, l[0] - 1] * B[k[1] - 1, l[1] - 1] for c, A, B in self.terms()))

    def at(self, t: float) -> float:
        return self.strength * (1.0 if self.envelope is None else self.envelope(t))

    def with_envelope(self, envelope, strength: float | None = None) -> "SymmetryBreaker":
        return SymmetryBreaker(
            self.n1,
            self.n2,
            self.strength if strength is None else strength,
            self.seed,
            self.degree,
            envelope,
            self.coefficients,
            self.scale,
        )

    def resized(self, n1: int, n2: int) -> "SymmetryBreaker":
        return SymmetryBreaker(
            n1, n2, self.strength, self.seed, self.degree, self.envelope, self.coefficients, self.scale
        )
