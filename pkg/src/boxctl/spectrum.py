"""Exact Dirichlet (and Neumann) spectra of rectangles.

The eigenvalues of the Laplacian on ``(0,a) x (0,b)`` are
``pi^2 (m^2/a^2 + n^2/b^2)``. Dirichlet modes use ``m, n >= 1``; the Neumann
lattice adds the zero quantum numbers. Everything in this module is a pure
function of its inputs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import bisect

from .paths import DeformationPath

TIE_TOL = 1e-12
CUTOFF_MARGIN = 0.10
CROSSING_SAMPLES = 1024
CROSSING_RTOL = 1e-10

_FIRST_INDEX = {"dirichlet": 1, "neumann": 0}


@dataclass(frozen=True)
class Rect:
    """Side lengths of the rectangle ``(0, a) x (0, b)``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0) or not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"rectangle sides must be positive and finite, got a={self.a}, b={self.b}")

    @property
    def area(self) -> float:
        return self.a * self.b


class Mode(NamedTuple):
    """Quantum numbers ``(m, n)`` of the mode ``sin(m pi x1/a) sin(n pi x2/b)``.

    Zero is accepted only so that the Neumann lattice can be tabulated;
    everything that builds an eigenfunction insists on ``m, n >= 1``.
    """

    m: int
    n: int

    @classmethod
    def parse(cls, text: str) -> "Mode":
        m, n = (int(v) for v in text.replace("(", "").replace(")", "").split(","))
        return cls(m, n)


def _check_mode(mode: Mode, first: int = 1) -> Mode:
    m, n = int(mode[0]), int(mode[1])
    if m < first or n < first:
        raise ValueError(f"quantum numbers must be >= {first}, got {tuple(mode)}")
    return Mode(m, n)


def mode_energy(rect: Rect, mode: Mode) -> float:
    """Eigenvalue ``pi^2 (m^2/a^2 + n^2/b^2)``."""
    m, n = _check_mode(mode, first=0)
    return math.pi**2 * (m * m / rect.a**2 + n * n / rect.b**2)


def _energies(a, b, m, n):
    # same operation order as mode_energy so that exact ties survive in floating point
    return np.pi**2 * (m * m / a**2 + n * n / b**2)


@dataclass
class SpectrumIndex:
    """Energy-ordered modes of one rectangle, exhaustive below ``cutoff_energy``.

    Ranks are 1-based. ``m``, ``n`` and ``energy`` are parallel arrays in rank
    order; ties are broken lexicographically in ``(m, n)`` and listed in
    ``tie_report`` as 1-based rank pairs.
    """

    rect: Rect
    cutoff_energy: float
    m: np.ndarray
    n: np.ndarray
    energy: np.ndarray
    tie_report: list[tuple[int, int]]
    boundary: str = "dirichlet"
    _lookup: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._lookup is None:
            first = _FIRST_INDEX[self.boundary]
            table = np.zeros((self.m.max() + 1 - first + 1, self.n.max() + 1 - first + 1), dtype=np.int64)
            table[self.m - first, self.n - first] = np.arange(1, len(self.m) + 1)
            self._lookup = table

    def __len__(self) -> int:
        return len(self.m)

    @property
    def entries(self) -> list[tuple[Mode, float]]:
        return [(Mode(int(m), int(n)), float(e)) for m, n, e in zip(self.m, self.n, self.energy)]

    def mode_of(self, rank: int) -> Mode:
        if not 1 <= rank <= len(self):
            raise IndexError(f"rank {rank} outside 1..{len(self)}")
        return Mode(int(self.m[rank - 1]), int(self.n[rank - 1]))

    def rank_of(self, mode: Mode) -> int:
        """1-based rank of ``mode``; ``KeyError`` if it lies above the cutoff."""
        first = _FIRST_INDEX[self.boundary]
        i, j = mode[0] - first, mode[1] - first
        if i < 0 or j < 0:
            raise ValueError(f"{tuple(mode)} is not a {self.boundary} mode")
        if i < self._lookup.shape[0] and j < self._lookup.shape[1] and self._lookup[i, j]:
            return int(self._lookup[i, j])
        raise KeyError(f"{tuple(mode)} lies above the index cutoff")

    def ranks_of(self, m: np.ndarray, n: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`rank_of`; modes above the cutoff map to 0."""
        first = _FIRST_INDEX[self.boundary]
        i, j = np.asarray(m) - first, np.asarray(n) - first
        inside = (i < self._lookup.shape[0]) & (j < self._lookup.shape[1])
        out = np.zeros(np.shape(i), dtype=np.int64)
        out[inside] = self._lookup[i[inside], j[inside]]
        return out

    def tied_ranks(self) -> set[int]:
        return {r for pair in self.tie_report for r in pair}


def weyl_count(rect: Rect, energy: float, boundary: str = "dirichlet") -> float:
    """Two-term Weyl estimate of the number of eigenvalues ``<= energy``."""
    sign = -1.0 if boundary == "dirichlet" else 1.0
    return rect.area * energy / (4 * math.pi) + sign * 2 * (rect.a + rect.b) * math.sqrt(energy) / (4 * math.pi)


def _enumerate(rect: Rect, cutoff: float, first: int):
    a, b = rect.a, rect.b
    m_max = int(math.floor(a * math.sqrt(cutoff) / math.pi))
    m = np.arange(first, max(m_max, first - 1) + 1, dtype=np.int64)
    # n_max(m) = floor(b sqrt(E/pi^2 - m^2/a^2)); +1 then filter exactly on energy
    rest = np.maximum(cutoff / math.pi**2 - (m / a) ** 2, 0.0)
    n_max = np.floor(b * np.sqrt(rest)).astype(np.int64) + 1
    counts = np.maximum(n_max - first + 1, 0)
    mm = np.repeat(m, counts)
    starts = np.cumsum(counts) - counts
    nn = np.arange(counts.sum(), dtype=np.int64) - np.repeat(starts, counts) + first
    e = _energies(a, b, mm, nn)
    keep = e <= cutoff
    return mm[keep], nn[keep], e[keep]


def build_index(
    rect: Rect,
    count_at_least: int,
    tie_tol: float = TIE_TOL,
    boundary: str = "dirichlet",
    margin: float = CUTOFF_MARGIN,
) -> SpectrumIndex:
    """Enumerate every mode below a cutoff chosen to cover ``count_at_least`` ranks."""
    if count_at_least < 1:
        raise ValueError("count_at_least must be >= 1")
    if boundary not in _FIRST_INDEX:
        raise ValueError(f"unknown boundary condition {boundary!r}")
    first = _FIRST_INDEX[boundary]

    # invert the Weyl estimate for sqrt(E), then over-enumerate by the margin
    area_c = rect.area / (4 * math.pi)
    perim_c = (-1 if boundary == "dirichlet" else 1) * 2 * (rect.a + rect.b) / (4 * math.pi)
    root = (-perim_c + math.sqrt(perim_c**2 + 4 * area_c * count_at_least)) / (2 * area_c)
    cutoff = (1.0 + margin) * max(root**2, mode_energy(rect, Mode(first + 1, first + 1)))
    while True:
        m, n, e = _enumerate(rect, cutoff, first)
        if len(e) >= count_at_least:
            break
        cutoff *= 1.5

    order = np.lexsort((n, m, e))
    m, n, e = m[order], n[order], e[order]
    gaps = np.diff(e)
    tied = np.nonzero(gaps <= tie_tol * np.abs(e[1:]))[0]
    ties = [(int(i) + 1, int(i) + 2) for i in tied]
    return SpectrumIndex(rect, float(cutoff), m, n, e, ties, boundary)


def resonance_length(k: Mode, l: Mode, b: float) -> float | None:
    """Side ``a`` at which modes ``k`` and ``l`` share an eigenvalue, or ``None``.

    Solves ``k1^2/a^2 + k2^2/b^2 = l1^2/a^2 + l2^2/b^2``.
    """
    k, l = _check_mode(k), _check_mode(l)
    if k == l:
        raise ValueError("resonance needs two distinct modes")
    num = k.m**2 - l.m**2
    den = l.n**2 - k.n**2
    if num == 0 or den == 0 or (num > 0) != (den > 0):
        return None
    return b * math.sqrt(num / den)


class Crossing(NamedTuple):
    t: float
    first: Mode
    second: Mode
    energy: float


def crossing_times(
    path: DeformationPath,
    modes: Sequence[Mode],
    t0: float | None = None,
    t1: float | None = None,
    samples: int = CROSSING_SAMPLES,
    rtol: float = CROSSING_RTOL,
) -> list[Crossing]:
    """Times in ``[t0, t1]`` where two of the tracked mode energies coincide.

    Energy differences are sampled on a uniform grid, sign changes are
    bracketed and refined by bisection. A cell whose midpoint has the
    opposite sign to both of its ends hides two crossings; that triggers a
    warning and both are resolved from the split cell.
    """
    t0 = path.t_start if t0 is None else t0
    t1 = path.t_end if t1 is None else t1
    modes = [_check_mode(md) for md in modes]
    grid = np.linspace(t0, t1, samples + 1)

    def lam(md, t):
        a, b = path.sides(t)
        return math.pi**2 * (md.m**2 / a**2 + md.n**2 / b**2)

    xtol = max(rtol * max(abs(t0), abs(t1)), 1e-300)
    found = []
    for p, q in combinations(modes, 2):
        diff = lambda t: lam(p, t) - lam(q, t)  # noqa: E731
        d = np.array([diff(t) for t in grid])
        cells = []
        for i in range(samples):
            lo, hi = grid[i], grid[i + 1]
            if d[i] == 0.0:
                if i == 0 or d[i - 1] != 0.0:
                    found.append((lo, (p, q)))
                continue
            if d[i] * d[i + 1] < 0:
                cells.append((lo, hi))
            elif d[i + 1] != 0.0:
                mid = 0.5 * (lo + hi)
                if diff(mid) * d[i] < 0:
                    warnings.warn(
                        f"two crossings of {tuple(p)}/{tuple(q)} inside one grid cell near t={mid:.6g}; "
                        "refine the crossing grid",
                        RuntimeWarning,
                        stacklevel=2,
                    )
                    cells += [(lo, mid), (mid, hi)]
        if d[-1] == 0.0 and d[-2] != 0.0:
            found.append((grid[-1], (p, q)))
        for lo, hi in cells:
            t = bisect(diff, lo, hi, xtol=xtol, rtol=max(rtol, 4 * np.finfo(float).eps))
            found.append((t, (p, q)))

    out = [Crossing(float(t), pq[0], pq[1], float(lam(pq[0], float(t)))) for t, pq in found]
    return sorted(out, key=lambda c: (c.t, c.first, c.second))
