"""Boundary functionals that decide whether a double eigenvalue of a rectangle can be split.

For modes ``k``, ``l`` sharing an eigenvalue and a boundary velocity field
``g``, the functionals are

    I_{p,q}(g) = | int_{boundary} d_nu phi_p  d_nu phi_q  <g | nu> ds |,  (p, q) in {(k,k), (l,l), (k,l)}.

The splitting condition holds when the three functionals are linearly
independent over the available deformations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.polynomial.legendre import leggauss

from .spectrum import Mode, Rect, _check_mode, mode_energy, resonance_length

QUAD_POINTS = 128
RANK_RTOL = 1e-8
TABLE_RTOL = 1e-8
ZERO_ATOL = 1e-10

Edge = Literal["left", "right", "bottom", "top"]
EDGES: tuple[Edge, ...] = ("left", "right", "bottom", "top")
_NORMALS = {"left": (-1.0, 0.0), "right": (1.0, 0.0), "bottom": (0.0, -1.0), "top": (0.0, 1.0)}


def _edge_points(rect: Rect, edge: Edge, s):
    """Boundary points for arclength ``s`` (measured along x2 on vertical edges, x1 on horizontal ones)."""
    s = np.asarray(s, float)
    if edge == "left":
        return np.zeros_like(s), s
    if edge == "right":
        return np.full_like(s, rect.a), s
    if edge == "bottom":
        return s, np.zeros_like(s)
    if edge == "top":
        return s, np.full_like(s, rect.b)
    raise ValueError(f"unknown edge {edge!r}")


def edge_length(rect: Rect, edge: Edge) -> float:
    return rect.b if edge in ("left", "right") else rect.a


def normal_derivative(mode: Mode, rect: Rect, edge: Edge, s):
    """Outward normal derivative of ``(2/sqrt(ab)) sin(m pi x1/a) sin(n pi x2/b)`` on ``edge``."""
    m, n = _check_mode(mode)
    a, b = rect.a, rect.b
    x1, x2 = _edge_points(rect, edge, s)
    amp = 2.0 / math.sqrt(a * b)
    if edge in ("left", "right"):
        grad = amp * (m * math.pi / a) * np.cos(m * math.pi * x1 / a) * np.sin(n * math.pi * x2 / b)
    else:
        grad = amp * (n * math.pi / b) * np.sin(m * math.pi * x1 / a) * np.cos(n * math.pi * x2 / b)
    return _NORMALS[edge][0 if edge in ("left", "right") else 1] * grad


@dataclass(frozen=True)
class BoundaryDeformation:
    """A velocity field on the rectangle; only its normal component on the boundary matters."""

    id: str
    field: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    formula: str = ""

    @classmethod
    def table(cls, gid: str, rect: Rect) -> "BoundaryDeformation":
        """The deformations ``g1..g5`` written in the unit-square coordinates ``y = (x1/a, x2/b)``.

        ``g1`` stretches the right edge, ``g2`` the top edge, ``g3`` tilts the
        right edge, ``g4`` bends it and ``g5`` combines tilt and bend.
        """
        a, b = rect.a, rect.b
        zero = lambda x1, x2: np.zeros_like(np.asarray(x1, float))  # noqa: E731
        profiles = {
            "g1": (lambda y: np.ones_like(y), "(x1/a, 0)"),
            "g3": (lambda y: y - 0.5, "((x2/b - 1/2) x1/a, 0)"),
            "g4": (lambda y: y * (1.0 - y), "(x2/b (1 - x2/b) x1/a, 0)"),
            "g5": (lambda y: y * y, "(x2^2/b^2 x1/a, 0)"),
        }
        if gid == "g2":
            return cls("g2", lambda x1, x2: (zero(x1, x2), np.asarray(x2, float) / b), "(0, x2/b)")
        if gid not in profiles:
            raise ValueError(f"unknown deformation {gid!r}")
        prof, text = profiles[gid]
        return cls(gid, lambda x1, x2: (prof(np.asarray(x2, float) / b) * np.asarray(x1, float) / a, zero(x1, x2)), text)


def signed_functional(k: Mode, l: Mode, rect: Rect, g: BoundaryDeformation, points: int = QUAD_POINTS) -> float:
    """``int d_nu phi_k d_nu phi_l <g | nu> ds`` by Gauss-Legendre on each edge."""
    x, w = leggauss(points)
    total = 0.0
    for edge in EDGES:
        L = edge_length(rect, edge)
        s = 0.5 * L * (x + 1.0)
        x1, x2 = _edge_points(rect, edge, s)
        v1, v2 = g.field(x1, x2)
        nu = _NORMALS[edge]
        vn = nu[0] * np.asarray(v1) + nu[1] * np.asarray(v2)
        integrand = normal_derivative(k, rect, edge, s) * normal_derivative(l, rect, edge, s) * vn
        total += 0.5 * L * float(w @ integrand)
    return total


def boundary_functional(k: Mode, l: Mode, rect: Rect, g: BoundaryDeformation, points: int = QUAD_POINTS) -> float:
    """``|int d_nu phi_k d_nu phi_l <g | nu> ds|``."""
    return abs(signed_functional(k, l, rect, g, points))


def table_closed_form(gid: str, entry: Literal["kk", "ll", "kl"], k: Mode, l: Mode, rect: Rect) -> float:
    """Closed-form table entry, including its ``b`` and ``b^2`` factors on the tilt and bend cross terms."""
    a, b = rect.a, rect.b
    p = k if entry == "kk" else l
    if entry in ("kk", "ll"):
        p1, p2 = p
        return {
            "g1": 2 * p1**2 * math.pi**2 / a**3,
            "g2": 2 * p2**2 * math.pi**2 / b**3,
            "g3": 0.0,
            "g4": p1**2 * (p2**2 * math.pi**2 + 3) / (3 * a**3 * p2**2),
            "g5": p1**2 * (2 * p2**2 * math.pi**2 - 3) / (3 * p2**2 * a**3),
        }[gid]
    (k1, k2), (l1, l2) = k, l
    if gid in ("g1", "g2"):
        return 0.0
    core = 16 * k1 * l1 * k2 * l2 / (a**3 * (k2**2 - l2**2) ** 2) if k2 != l2 else math.inf
    same = (k2 - l2) % 2 == 0
    if gid == "g3":
        return 0.0 if same else b * core
    if gid == "g4":
        return b**2 * core if same else 0.0
    return core


@dataclass
class Sah2Report:
    k: Mode
    l: Mode
    a: float
    b: float
    deformations: list[str]
    I_matrix: np.ndarray
    signed_matrix: np.ndarray
    closed_form: np.ndarray
    closed_form_errors: np.ndarray
    rank: int
    singular_values: np.ndarray
    ratio_g1: float
    ratio_g2: float
    mismatches: list[str] = field(default_factory=list)

    ROWS = ("kk", "ll", "kl")

    @property
    def rel1_holds(self) -> bool:
        return not math.isclose(self.ratio_g1, self.ratio_g2, rel_tol=1e-9)

    @property
    def ok(self) -> bool:
        return self.rank == 3 and self.rel1_holds and not self.mismatches

    def to_dict(self) -> dict:
        return {
            "k": list(self.k),
            "l": list(self.l),
            "a": self.a,
            "b": self.b,
            "deformations": self.deformations,
            "rows": list(self.ROWS),
            "I_matrix": self.I_matrix.tolist(),
            "closed_form": self.closed_form.tolist(),
            "closed_form_errors": self.closed_form_errors.tolist(),
            "rank": self.rank,
            "rank_over": self.deformations[:4],
            "singular_values": self.singular_values.tolist(),
            "ratio_g1": self.ratio_g1,
            "ratio_g2": self.ratio_g2,
            "rel1_holds": self.rel1_holds,
            "mismatches": self.mismatches,
        }


def functional_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, np.ndarray]:
    """Number of singular values above ``rtol`` times the largest."""
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0, sv
    return int(np.sum(sv > rtol * sv[0])), sv


def verify_table(k: Mode, l: Mode, b: float = 1.0, points: int = QUAD_POINTS) -> Sah2Report:
    """Evaluate all fifteen functionals at the resonant rectangle and compare with the closed forms.

    The rank is computed from the signed integrals over ``g1..g4``; the
    reported matrix holds absolute values.
    """
    k, l = _check_mode(k), _check_mode(l)
    a = resonance_length(k, l, b)
    if a is None:
        raise ValueError(f"modes {tuple(k)} and {tuple(l)} never share an eigenvalue when a varies (b={b})")
    rect = Rect(a, b)
    ids = ["g1", "g2", "g3", "g4", "g5"]
    pairs = {"kk": (k, k), "ll": (l, l), "kl": (k, l)}
    signed = np.zeros((3, 5))
    closed = np.zeros((3, 5))
    for j, gid in enumerate(ids):
        g = BoundaryDeformation.table(gid, rect)
        for i, row in enumerate(Sah2Report.ROWS):
            p, q = pairs[row]
            signed[i, j] = signed_functional(p, q, rect, g, points)
            closed[i, j] = table_closed_form(gid, row, k, l, rect)
    absval = np.abs(signed)
    err = np.abs(absval - closed)
    mismatches = []
    for i, row in enumerate(Sah2Report.ROWS):
        for j, gid in enumerate(ids):
            tol = ZERO_ATOL if closed[i, j] == 0 else TABLE_RTOL * abs(closed[i, j])
            if not err[i, j] <= tol:
                mismatches.append(f"{gid}/I_{row}: quadrature {absval[i, j]:.12g} vs closed form {closed[i, j]:.12g}")
    rank, sv = functional_rank(signed[:, :4])
    assert math.isclose(mode_energy(rect, k), mode_energy(rect, l), rel_tol=1e-12)
    return Sah2Report(
        k, l, a, b, ids, absval, signed, closed, err, rank, sv,
        ratio_g1=absval[0, 0] / absval[1, 0],
        ratio_g2=absval[0, 1] / absval[1, 1],
        mismatches=mismatches,
    )
