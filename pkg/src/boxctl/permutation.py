"""Eigenstate permutation generated by one pumping cycle, and its orbit statistics.

One cycle stretches the box ``a x b`` to ``a_tilde x b`` keeping the quantum
numbers, then returns keeping the energy rank. The state of rank ``k`` ends
in rank ``sigma(k)``, the rank of the same ``(m, n)`` in the stretched box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DegenerateSpectrumError
from .spectrum import Rect, build_index

UNCERTIFIED = -1


@dataclass
class SigmaTable:
    """``sigma`` tabulated on the labels ``rank_base .. rank_base + K - 1``.

    ``sigma[i]`` is the image of label ``rank_base + i`` (in the same label
    convention), or ``UNCERTIFIED`` when the image lies beyond the enumerated
    part of the stretched spectrum. ``m``/``n`` hold the quantum numbers of
    each label in the original box.
    """

    a: float
    a_tilde: float
    b: float
    K: int
    sigma: np.ndarray
    m: np.ndarray
    n: np.ndarray
    boundary: str = "dirichlet"
    rank_base: int = 1

    @property
    def valid_to(self) -> int:
        return self.rank_base + self.K - 1

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.rank_base, self.rank_base + self.K)

    @property
    def ground(self) -> int:
        return self.rank_base

    def __call__(self, k: int) -> int:
        return int(self.sigma[k - self.rank_base])

    def apply(self, k: np.ndarray) -> np.ndarray:
        """Vectorized sigma; labels outside the table map to ``UNCERTIFIED``."""
        k = np.asarray(k)
        inside = (k >= self.rank_base) & (k <= self.valid_to)
        out = np.full(k.shape, UNCERTIFIED, dtype=np.int64)
        out[inside] = self.sigma[k[inside] - self.rank_base]
        return out


def build_sigma(
    a: float,
    a_tilde: float,
    K: int,
    b: float = 1.0,
    boundary: Literal["dirichlet", "neumann"] = "dirichlet",
    rank_base: int = 1,
    cover_images: bool = True,
) -> SigmaTable:
    """Tabulate ``sigma(k) = k_tilde(m(k), n(k))`` for the first ``K`` labels.

    ``boundary="neumann"`` includes the zero quantum numbers in the lattice and
    ``rank_base=0`` labels the ground state 0; this is the convention under
    which a = pi/2, a_tilde = a/3 has the cycle (19 44 110 39 52). With ``cover_images`` the stretched
    index is enlarged until every image is certified; otherwise images beyond
    it are stored as ``UNCERTIFIED``.
    """
    if rank_base not in (0, 1):
        raise ValueError("rank_base must be 0 or 1")
    if K < 1:
        raise ValueError("K must be >= 1")
    src = build_index(Rect(a, b), K, boundary=boundary)
    dst_count = K
    dst = build_index(Rect(a_tilde, b), dst_count, boundary=boundary)

    bad = sorted(r for r in src.tied_ranks() if r <= K)
    if bad:
        raise DegenerateSpectrumError(
            f"tied energies at ranks {bad[:6]} of the ({a}, {b}) box; choose sides with irrational ratio"
        )
    m, n = src.m[:K], src.n[:K]
    image = dst.ranks_of(m, n)
    while cover_images and np.any(image == 0):
        dst_count *= 2
        dst = build_index(Rect(a_tilde, b), dst_count, boundary=boundary)
        image = dst.ranks_of(m, n)
    bad = sorted(dst.tied_ranks() & set(image[image > 0].tolist()))
    if bad:
        raise DegenerateSpectrumError(
            f"tied energies at ranks {bad[:6]} of the ({a_tilde}, {b}) box; choose sides with irrational ratio"
        )
    sigma = np.where(image > 0, image - 1 + rank_base, UNCERTIFIED)
    return SigmaTable(float(a), float(a_tilde), float(b), K, sigma, m.copy(), n.copy(), boundary, rank_base)


@dataclass
class OrbitRecord:
    start: int
    trajectory: list[int]
    status: Literal["escaped", "periodic", "exhausted"]
    period: int | None = None

    def growth_rate(self) -> float:
        """Least-squares slope of ``ln sigma^j(k)`` against ``j`` (no pass/fail meaning)."""
        ranks = np.asarray(self.trajectory, float)
        if len(ranks) < 2 or np.any(ranks <= 0):
            return float("nan")
        j = np.arange(len(ranks))
        return float(np.polyfit(j, np.log(ranks), 1)[0])


def iterate_orbit(table: SigmaTable, start: int, max_steps: int) -> OrbitRecord:
    """Apply sigma from ``start`` until the orbit closes, escapes the table, or the budget runs out."""
    if not table.rank_base <= start <= table.valid_to:
        raise ValueError(f"start {start} outside the certified range {table.rank_base}..{table.valid_to}")
    traj = [start]
    k = start
    for _ in range(max_steps):
        k = table(k)
        if k == UNCERTIFIED or k > table.valid_to:
            if k != UNCERTIFIED:
                traj.append(k)
            return OrbitRecord(start, traj, "escaped")
        if k == start:
            return OrbitRecord(start, traj, "periodic", period=len(traj))
        traj.append(k)
    return OrbitRecord(start, traj, "exhausted")


def find_periodic_orbits(
    table: SigmaTable,
    start_max: int,
    period_max: int,
    include_ground: bool = False,
) -> list[tuple[int, ...]]:
    """Distinct cycles of period ``<= period_max`` through some start ``<= start_max``.

    Orbits that leave the certified range count as non-periodic. Each cycle
    is rotated so that its smallest element comes first. The ground state is
    always a fixed point and is skipped unless ``include_ground``.
    """
    if start_max > table.valid_to:
        raise ValueError("start_max exceeds the certified range of the table")
    first = table.ground if include_ground else table.ground + 1
    starts = np.arange(first, start_max + 1)
    period = np.zeros(starts.shape, dtype=np.int64)
    alive = np.ones(starts.shape, dtype=bool)
    x = starts.copy()
    for step in range(1, period_max + 1):
        x = table.apply(x)
        alive &= (x != UNCERTIFIED) & (x <= table.valid_to)
        closed = alive & (x == starts) & (period == 0)
        period[closed] = step
        alive &= period == 0
        if not alive.any():
            break
        x = np.where(alive, x, table.ground)

    cycles = set()
    for s, p in zip(starts[period > 0], period[period > 0]):
        cyc = [int(s)]
        for _ in range(p - 1):
            cyc.append(table(cyc[-1]))
        i = cyc.index(min(cyc))
        cycles.add(tuple(cyc[i:] + cyc[:i]))
    return sorted(cycles, key=lambda c: (len(c), c))


def table_size_for(K: int, rank_base: int = 1) -> int:
    """Table size whose labels include ``1..K`` (one extra entry for the 0-based ground state)."""
    return K + 1 - rank_base


def mean_entropy_increase(table: SigmaTable, K: int) -> float:
    """``(1/K) sum_{k=1..K} (ln sigma(k) - ln k)`` over labels 1..K."""
    if K > table.valid_to:
        raise ValueError(f"K={K} exceeds the certified range {table.valid_to}")
    k = np.arange(1, K + 1)
    s = table.apply(k)
    if np.any(s == UNCERTIFIED):
        raise ValueError("sigma is not certified on all labels 1..K; enlarge the table")
    return float(np.mean(np.log(s) - np.log(k)))


def _entropy_integrand(theta, r):
    return np.log(r * np.cos(theta) ** 2 + np.sin(theta) ** 2 / r)


def entropy_integral(a: float, a_tilde: float, tol: float = 1e-10, order: int = 64) -> float:
    """``(2/pi) int_0^{pi/2} ln((a/a~) cos^2 + (a~/a) sin^2) dtheta`` by adaptive Gauss-Legendre.

    Panels are doubled until the composite rule changes by less than ``tol``.
    """
    if a <= 0 or a_tilde <= 0:
        raise ValueError("side lengths must be positive")
    r = a / a_tilde
    x, w = leggauss(order)
    prev = None
    panels = 1
    while True:
        edges = np.linspace(0.0, math.pi / 2, panels + 1)
        mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        value = (2 / math.pi) * float(weights @ _entropy_integrand(nodes, r))
        if prev is not None and abs(value - prev) < tol:
            return value
        if panels > 4096:
            return value
        prev = value
        panels *= 2


def entropy_closed_form(a: float, a_tilde: float) -> float:
    """``2 ln((sqrt r + 1/sqrt r)/2)`` with ``r = a/a_tilde``."""
    r = a / a_tilde
    return 2.0 * math.log((math.sqrt(r) + 1.0 / math.sqrt(r)) / 2.0)
