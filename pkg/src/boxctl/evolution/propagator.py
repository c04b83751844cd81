"""Hamiltonian assembly and unitary time stepping on the unit square.

In the gauge frame the moving-rectangle equation reads ``i w' = H(t) w`` with

    H(t) = H1(t) (x) I + I (x) H2(t) + eps(t) W,
    Hj(t) = diag(pi^2 k^2 / fj^2) + (fj'' fj / 4) M,

where ``M`` is the ``y^2`` moment matrix. Three steppers are offered:

``split`` (default)
    Exponential midpoint per axis (exact for a static rectangle), combined
    with the breaker by Strang splitting. Unitary to round-off, second order.
``split4``
    Triple-jump composition of three ``split`` substeps, fourth order.
``cn``
    Crank-Nicolson / implicit midpoint on the dense Hamiltonian.
``expm``
    Dense matrix exponential of ``H`` at the step midpoint.

The last two scale as ``(n1 n2)^3`` per step and serve as small-N oracles.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
import scipy.linalg as sla

from ..errors import PropagationError, TruncationError
from ..paths import DeformationPath
from .basis import SymmetryBreaker, WaveState, quadratic_moment_matrix

TAIL_FRACTION = 0.10
TAIL_LIMIT = 1e-6
NORM_DRIFT_LIMIT = 1e-8

# triple-jump weights: composing a symmetric second-order step gives fourth order
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1

Monitor = Callable[[float, WaveState], None]


def axis_hamiltonian(f: float, fpp: float, N: int, M: np.ndarray | None = None) -> np.ndarray:
    """``diag(pi^2 k^2 / f^2) + (f'' f / 4) M`` for one axis."""
    M = quadratic_moment_matrix(N) if M is None else M
    k = np.arange(1, N + 1)
    return np.diag((math.pi * k / f) ** 2) + (fpp * f / 4.0) * M


def assemble_hamiltonian(
    path: DeformationPath,
    t: float,
    N1: int,
    N2: int,
    breaker: SymmetryBreaker | None = None,
) -> np.ndarray:
    """Dense Hermitian ``H(t)`` on the flattened tensor basis (row-major in ``(m, n)``)."""
    H1 = axis_hamiltonian(path.f1(t), path.f1pp(t), N1)
    H2 = axis_hamiltonian(path.f2(t), path.f2pp(t), N2)
    H = np.kron(H1, np.eye(N2)) + np.kron(np.eye(N1), H2)
    if breaker is not None:
        eps = breaker.at(t)
        if eps != 0.0:
            H = H + eps * _fit(breaker, N1, N2).potential_coeffs
    return H


def _fit(breaker: SymmetryBreaker, n1: int, n2: int) -> SymmetryBreaker:
    return breaker if (breaker.n1, breaker.n2) == (n1, n2) else breaker.resized(n1, n2)


def _axis_unitary(f: float, fpp: float, M: np.ndarray, h: float) -> np.ndarray:
    N = M.shape[0]
    d = (math.pi * np.arange(1, N + 1) / f) ** 2
    c = fpp * f / 4.0
    if c == 0.0:
        return np.diag(np.exp(-1j * h * d))
    w, V = np.linalg.eigh(np.diag(d) + c * M)
    return (V * np.exp(-1j * h * w)) @ V.T


def tail_population(state: WaveState, fraction: float = TAIL_FRACTION) -> float:
    """Population carried by the top ``fraction`` of modes along either axis."""
    p = state.populations()
    k1 = max(1, math.ceil(fraction * state.n1))
    k2 = max(1, math.ceil(fraction * state.n2))
    inner = p[: state.n1 - k1, : state.n2 - k2].sum()
    return float(p.sum() - inner)


def step_count(duration: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    return max(1, math.ceil(duration / dt - 1e-9))


def propagate(
    state: WaveState,
    path: DeformationPath,
    dt: float,
    breaker: SymmetryBreaker | None = None,
    *,
    method: str = "split",
    monitor: Monitor | None = None,
    monitor_every: int = 1,
    check_tail: bool = True,
    tail_limit: float = TAIL_LIMIT,
    breakpoints=(),
) -> WaveState:
    """Advance ``state`` from ``path.t_start`` to ``path.t_end``.

    ``breakpoints`` are times where ``H`` jumps (for instance a side that
    stops); each segment between them gets its own uniform step
    ``length / ceil(length / dt)`` so no step straddles a jump. ``monitor(t, state)`` is
    called at the start, every ``monitor_every`` steps and at the end.
    Raises :class:`TruncationError` when the top 10% of modes hold more than
    ``tail_limit`` and :class:`PropagationError` when the norm drifts by more
    than ``1e-8``.
    """
    if method not in ("split", "split4", "cn", "expm"):
        raise ValueError(f"unknown method {method!r}")
    n1, n2 = state.n1, state.n2
    if breaker is not None:
        breaker = _fit(breaker, n1, n2)
    edges = sorted({path.t_start, path.t_end, *(b for b in breakpoints if path.t_start < b < path.t_end)})
    grid = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = step_count(hi - lo, dt)
        grid.extend((lo + j * (hi - lo) / n, (hi - lo) / n) for j in range(n))
    steps = len(grid)
    M1, M2 = quadratic_moment_matrix(n1), quadratic_moment_matrix(n2)
    C = state.coeffs.copy()
    norm0 = float(np.linalg.norm(C))

    if monitor is not None:
        monitor(path.t_start, WaveState(C.copy()))
    for j, (t, h) in enumerate(grid):
        if method == "split":
            C = _split_step(C, path, t, h, breaker, M1, M2)
        elif method == "split4":
            sub = t
            for w in (_W1, _W0, _W1):
                C = _split_step(C, path, sub, w * h, breaker, M1, M2)
                sub += w * h
        else:
            H = assemble_hamiltonian(path, t + 0.5 * h, n1, n2, breaker)
            C = _dense_step(C.ravel(), H, h, method).reshape(n1, n2)
        if monitor is not None and ((j + 1) % monitor_every == 0 or j + 1 == steps):
            monitor(t + h, WaveState(C.copy()))

    out = WaveState(C)
    drift = abs(out.norm() - norm0)
    if not np.isfinite(drift) or drift > NORM_DRIFT_LIMIT:
        raise PropagationError(f"norm drifted by {drift:.3e} (limit {NORM_DRIFT_LIMIT:g})")
    if check_tail:
        tail = tail_population(out)
        if tail > tail_limit * norm0**2:
            raise TruncationError(
                f"top-{TAIL_FRACTION:.0%} modes hold population {tail:.3e} > {tail_limit:g}; "
                f"increase the basis size ({n1}x{n2})"
            )
    return out


def _split_step(C, path, t, h, breaker, M1, M2):
    """Exponential midpoint per axis, Strang-split with the breaker; ``h`` may be negative."""
    tm = t + 0.5 * h
    eps = 0.0 if breaker is None else breaker.at(tm)
    if eps == 0.0:
        U1 = _axis_unitary(path.f1(tm), path.f1pp(tm), M1, h)
        U2 = _axis_unitary(path.f2(tm), path.f2pp(tm), M2, h)
        return U1 @ C @ U2.T
    U1 = _axis_unitary(path.f1(tm), path.f1pp(tm), M1, 0.5 * h)
    U2 = _axis_unitary(path.f2(tm), path.f2pp(tm), M2, 0.5 * h)
    C = U1 @ C @ U2.T
    w, Q = breaker.eig
    # real eigenvectors: act on real and imaginary parts together to avoid a complex copy of Q
    c = C.ravel()
    y = Q.T @ np.stack([c.real, c.imag], axis=1)
    y = (y[:, 0] + 1j * y[:, 1]) * np.exp(-1j * h * eps * w)
    v = Q @ np.stack([y.real, y.imag], axis=1)
    C = (v[:, 0] + 1j * v[:, 1]).reshape(C.shape)
    return U1 @ C @ U2.T


def _dense_step(c, H, h, method):
    if method == "expm":
        return sla.expm(-1j * h * H) @ c
    A = np.eye(len(c)) + 0.5j * h * H
    rhs = c - 0.5j * h * (H @ c)
    try:
        return sla.lu_solve(sla.lu_factor(A), rhs)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise PropagationError(f"implicit midpoint solve failed: {exc}") from exc
