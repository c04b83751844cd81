"""From a 1D bilinear control ``V(tau)`` to a side-length law ``f(t)``.

With ``tau(t) = int_0^t f^-2`` and ``w(t, y) = w1(tau(t), y)``, the axis
equation ``i w_t = f^-2 (-w_yy) + (f'' f / 4) y^2 w`` becomes
``i w1_tau = -w1_yy + V(tau) y^2 w1`` as soon as ``f^3 f'' / 4 = V(tau)``.
Writing ``f' = 4 U(tau) / f`` gives

    f'' = 4 (U'(tau) - 4 U^2) / f^3,      tau'' = -8 (tau')^2 U(tau),

so ``V = U' - 4 U^2`` and ``U`` solves the Riccati law ``U' = 4 U^2 + V``.
The linear law ``U' = 4 U + V`` is kept as an option (``law="linear"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import ControlSynthesisError, PropagationError
from .evolution.basis import quadratic_moment_matrix
from .paths import SideLaw

RTOL = 1e-10
ATOL = 1e-12
MAX_DOUBLINGS = 60
Law = Literal["riccati", "linear"]

# triple-jump weights (see evolution.propagator)
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


@dataclass
class ControlProfile:
    """User-supplied control ``V`` on ``[0, tau_f]`` and the initial value ``U0``."""

    V: Callable[[float], float]
    tau_f: float
    U0: float | None = None
    law: Law = "riccati"

    def __post_init__(self):
        if not self.tau_f > 0:
            raise ValueError("tau_f must be positive")
        if self.law not in ("riccati", "linear"):
            raise ValueError(f"unknown law {self.law!r}")

    @classmethod
    def from_samples(cls, tau: Sequence[float], V: Sequence[float], U0=None, law: Law = "riccati"):
        """Natural cubic spline through ``(tau, V)`` samples starting at ``tau = 0``."""
        tau = np.asarray(tau, float)
        if tau[0] != 0.0 or np.any(np.diff(tau) <= 0):
            raise ValueError("tau samples must start at 0 and increase strictly")
        spline = CubicSpline(tau, np.asarray(V, float), bc_type="natural")
        return cls(lambda s: float(spline(s)), float(tau[-1]), U0, law)

    def dU(self, U: float, tau: float) -> float:
        if self.law == "riccati":
            return 4.0 * U * U + self.V(tau)
        return 4.0 * U + self.V(tau)


@dataclass
class USolution:
    """Dense solution of the ``U`` law on ``[0, tau_f]``."""

    profile: ControlProfile
    U0: float
    sol: object
    tau_grid: np.ndarray
    U_grid: np.ndarray

    def __call__(self, tau):
        return self.sol.sol(tau)[0]

    def derivative(self, tau):
        return self.profile.dU(float(self(tau)), tau)

    @property
    def sup(self) -> float:
        return float(np.abs(self.U_grid).max())

    @property
    def min(self) -> float:
        return float(self.U_grid.min())


def _solve_U(profile: ControlProfile, U0: float, check_points: int = 2049):
    blow = lambda tau, y: abs(y[0]) - 1e12  # noqa: E731
    blow.terminal = True
    sol = solve_ivp(
        lambda tau, y: [profile.dU(y[0], tau)],
        (0.0, profile.tau_f),
        [U0],
        method="DOP853",
        rtol=RTOL,
        atol=ATOL,
        dense_output=True,
        events=blow,
    )
    if sol.status != 0 or sol.t[-1] < profile.tau_f:
        return None
    grid = np.union1d(np.linspace(0.0, profile.tau_f, check_points), sol.t)
    return sol, grid, sol.sol(grid)[0]


def _classify(profile: ControlProfile, U0: float) -> str:
    """``"neg"`` if U reaches 0, ``"blow"`` if it escapes to +infinity, else ``"ok"``."""
    # U can only escape downwards after crossing zero, so a zero event settles "neg"
    zero = lambda tau, y: y[0]  # noqa: E731
    zero.terminal = True
    top = lambda tau, y: y[0] - 1e12  # noqa: E731
    top.terminal = True
    sol = solve_ivp(
        lambda tau, y: [profile.dU(y[0], tau)], (0.0, profile.tau_f), [U0],
        method="DOP853", rtol=RTOL, atol=ATOL, events=(zero, top),
    )
    if len(sol.t_events[0]) or U0 <= 0:
        return "neg"
    return "blow" if len(sol.t_events[1]) else "ok"


def _boundary(profile, lo, hi, below: str) -> float:
    """Bisect for the switch point between ``classify == below`` (at ``lo``) and not."""
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _classify(profile, mid) == below:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-9 * hi:
            break
    return lo if below != "neg" else hi


def choose_U0(profile: ControlProfile) -> float:
    """An initial value that keeps ``U`` positive and finite on ``[0, tau_f]``.

    Linear law: ``U(tau) = e^{4 tau} (U0 + int_0^tau e^{-4s} V)``, so start from
    ``1 + max(0, -min of the integral)`` and double until positivity holds.
    Riccati law: by comparison ``U`` increases with ``U0``, so the admissible
    set is an interval between "turns negative" and "blows up"; both ends are
    found by bisection and the midpoint is returned.
    """
    if profile.law == "linear":
        tau = np.linspace(0.0, profile.tau_f, 4097)
        g = np.exp(-4 * tau) * np.array([profile.V(s) for s in tau])
        integral = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(tau))])
        U0 = 1.0 + max(0.0, -float(integral.min()))
        for _ in range(MAX_DOUBLINGS + 1):
            out = _solve_U(profile, U0)
            if out is not None and out[2].min() > 0:
                return U0
            U0 *= 2.0
        raise ControlSynthesisError(f"no positive U after {MAX_DOUBLINGS} doublings of U0")

    hi = 1.0
    for _ in range(MAX_DOUBLINGS):
        if _classify(profile, hi) == "blow":
            break
        hi *= 2.0
    else:
        raise ControlSynthesisError("U stays bounded for every tried U0; cannot bracket the blow-up")
    lo = 0.0
    if _classify(profile, lo) == "neg":
        lo = _boundary(profile, lo, hi, "neg")
    top = _boundary(profile, lo, hi, "ok") if _classify(profile, lo) == "ok" else lo
    if not top > lo:
        raise ControlSynthesisError(
            "no U0 keeps U positive and finite on [0, tau_f]; shorten tau_f or change V"
        )
    return 0.5 * (lo + top)


def integrate_U(profile: ControlProfile, law: Law | None = None) -> USolution:
    """Solve the ``U`` law from ``U(0) = U0`` (chosen by :func:`choose_U0` when absent)."""
    if law is not None and law != profile.law:
        profile = ControlProfile(profile.V, profile.tau_f, profile.U0, law)
    U0 = choose_U0(profile) if profile.U0 is None else float(profile.U0)
    out = _solve_U(profile, U0)
    if out is None:
        raise ControlSynthesisError(f"U blows up before tau_f={profile.tau_f} (U0={U0}); lower U0")
    sol, grid, U = out
    if U.min() <= 0:
        raise ControlSynthesisError(f"min U = {U.min():.3e} <= 0 on [0, tau_f]; increase U0")
    return USolution(profile, U0, sol, grid, U)


def escape_lower_bound(t, a: float, U_sup: float):
    """``tau(t) >= ln(1 + 8 ||U|| t / a^2) / (8 ||U||)``, from ``(1/tau')' = 8 U <= 8 ||U||``."""
    t = np.asarray(t, float)
    if U_sup == 0:
        return t / a**2
    return np.log1p(8.0 * U_sup * t / a**2) / (8.0 * U_sup)


@dataclass
class ShapeLaw:
    """Side length ``f(t) = 1/sqrt(tau'(t))`` that realizes a control profile on ``[0, T]``."""

    a: float
    T: float
    t_grid: np.ndarray
    tau: np.ndarray
    tau_prime: np.ndarray
    f: np.ndarray
    U: USolution = field(repr=False)
    sol: object = field(repr=False)

    def state(self, t: float):
        """``(tau, q = f^2, U)`` at time ``t``; constant continuation after ``T``."""
        tt = min(max(t, 0.0), self.T)
        tau, q, U = self.sol.sol(tt)
        return float(tau), float(q), float(U)

    def length(self, t: float) -> float:
        return math.sqrt(self.state(t)[1])

    def velocity(self, t: float) -> float:
        if t > self.T:
            return 0.0
        _, q, U = self.state(t)
        return 4.0 * U / math.sqrt(q)

    def acceleration(self, t: float) -> float:
        if t > self.T:
            return 0.0
        tau, q, U = self.state(t)
        return 4.0 * (self.U.profile.dU(U, tau) - 4.0 * U * U) / q**1.5

    def as_side(self) -> SideLaw:
        """Side law with ODE-exact derivatives, held constant after ``T``."""
        return SideLaw(self.length, self.velocity, self.acceleration)

    def tau_at(self, t: float) -> float:
        """``tau(t)``, continued by free evolution ``tau_f + (t - T) / f(T)^2`` after ``T``."""
        if t <= self.T:
            return self.state(t)[0]
        tau, q, _ = self.state(self.T)
        return tau + (t - self.T) / q

    def roundtrip_tau(self) -> np.ndarray:
        """``int_0^t f^-2`` from the emitted samples by cumulative Simpson quadrature."""
        from scipy.integrate import cumulative_simpson

        return cumulative_simpson(1.0 / self.f**2, x=self.t_grid, initial=0.0)


def synthesize_shape(profile: ControlProfile, a: float, samples: int = 2001, U: USolution | None = None) -> ShapeLaw:
    """Integrate ``tau' = 1/q``, ``q' = 8 U``, ``U_t = U'(tau)/q`` from ``tau = 0``, ``q = a^2``.

    ``q = 1/tau' = f^2``; the run stops at the terminal event ``tau = tau_f``.
    The escape bound and ``0 < tau' <= 1/a^2`` are checked on the sample grid.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    U = integrate_U(profile) if U is None else U
    prof = U.profile

    def rhs(t, y):
        tau, q, u = y
        return [1.0 / q, 8.0 * u, prof.dU(u, tau) / q]

    hit = lambda t, y: y[0] - prof.tau_f  # noqa: E731
    hit.terminal = True
    hit.direction = 1
    # tau' <= 1/a^2 and tau' >= 1/(a^2 + 8 ||U|| t) bound the arrival time
    t_max = (math.exp(8 * U.sup * prof.tau_f) - 1) * a**2 / (8 * U.sup) if U.sup > 0 else a**2 * prof.tau_f
    sol = solve_ivp(
        rhs, (0.0, 1.01 * t_max + 1.0), [0.0, a * a, U.U0], method="DOP853",
        rtol=RTOL, atol=ATOL, dense_output=True, events=hit,
    )
    if sol.status != 1 or not len(sol.t_events[0]):
        raise ControlSynthesisError(f"tau never reached tau_f={prof.tau_f}: {sol.message}")
    T = float(sol.t_events[0][0])
    t = np.linspace(0.0, T, samples)
    tau, q, _ = sol.sol(t)
    tau[-1] = prof.tau_f
    tau_p = 1.0 / q
    slack = 1e-9 / a**2
    if np.any(tau_p <= 0) or np.any(tau_p > 1.0 / a**2 + slack):
        raise ControlSynthesisError("tau' left (0, 1/a^2]; the integrator failed")
    if np.any(tau < escape_lower_bound(t, a, U.sup) - 1e-9):
        raise ControlSynthesisError("escape lower bound on tau(t) violated")
    return ShapeLaw(a, T, t, tau, tau_p, np.sqrt(q), U, sol)


# -- 1D propagation ------------------------------------------------------------------


def _unitary_1d(V: float, M: np.ndarray, h: float) -> np.ndarray:
    N = M.shape[0]
    d = (math.pi * np.arange(1, N + 1)) ** 2
    if V == 0.0:
        return np.diag(np.exp(-1j * h * d))
    w, Q = np.linalg.eigh(np.diag(d) + V * M)
    return (Q * np.exp(-1j * h * w)) @ Q.T


def propagate_1d(
    initial,
    profile: ControlProfile,
    N: int | None = None,
    dtau: float = 1e-3,
    order: int = 4,
) -> np.ndarray:
    """Solve ``i w_tau = -w_yy + V(tau) y^2 w`` on ``[0, tau_f]`` in the sine basis.

    Exponential midpoint steps (``order=2``) or their triple-jump composition
    (``order=4``); both are exactly unitary.
    """
    c = np.array(initial, dtype=complex)
    N = len(c) if N is None else N
    if len(c) < N:
        c = np.concatenate([c, np.zeros(N - len(c), complex)])
    norm0 = np.linalg.norm(c)
    if abs(norm0 - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    M = quadratic_moment_matrix(N)
    steps = max(1, math.ceil(profile.tau_f / dtau - 1e-9))
    h = profile.tau_f / steps
    weights = (1.0,) if order == 2 else (_W1, _W0, _W1)
    for j in range(steps):
        tau = j * h
        for w in weights:
            c = _unitary_1d(profile.V(tau + 0.5 * w * h), M, w * h) @ c
            tau += w * h
    if abs(np.linalg.norm(c) - norm0) > 1e-8:
        raise PropagationError("norm drift above 1e-8 in 1D propagation")
    return c


def free_phase(c: np.ndarray, duration: float, length: float) -> np.ndarray:
    """Free evolution ``i w_t = -(1/length^2) w_yy`` for ``duration``."""
    k = np.arange(1, len(c) + 1)
    return np.exp(-1j * (math.pi * k / length) ** 2 * duration) * c


def decoupled_reference(c1, c2, profile1, profile2, shape1: ShapeLaw, shape2: ShapeLaw, **kw) -> np.ndarray:
    """Tensor product of the two 1D evolutions at ``t = max(T1, T2)``.

    The axis that finishes first holds its length and evolves freely until the other one is done.
    """
    T = max(shape1.T, shape2.T)
    w1 = free_phase(propagate_1d(c1, profile1, **kw), T - shape1.T, shape1.length(shape1.T))
    w2 = free_phase(propagate_1d(c2, profile2, **kw), T - shape2.T, shape2.length(shape2.T))
    return np.outer(w1, w2)


# -- phase alignment -----------------------------------------------------------------


def phase_wait_time(energies, current, target, delta: float, t_max: float, chunk: int = 65536) -> float | None:
    """First grid time ``t <= t_max`` with ``|e^{-i lam_j t + i current_j} - e^{i target_j}| < delta`` for all ``j``.

    The grid step ``pi delta / (2 max lam)`` keeps every phase moving by less
    than the window half-width between samples.
    """
    lam = np.asarray(energies, float)
    cur = np.asarray(current, float)
    tgt = np.asarray(target, float)
    if len(set(lam.tolist())) != len(lam):
        raise ValueError("energies must be pairwise distinct")
    if not delta > 0 or t_max < 0:
        raise ValueError("need delta > 0 and t_max >= 0")
    step = math.pi * delta / (2.0 * np.abs(lam).max())
    total = int(math.floor(t_max / step)) + 1
    for start in range(0, total, chunk):
        t = step * np.arange(start, min(start + chunk, total))
        z = np.exp(1j * (cur[None, :] - np.outer(t, lam)))
        ok = np.all(np.abs(z - np.exp(1j * tgt)[None, :]) < delta, axis=1)
        if ok.any():
            return float(t[np.argmax(ok)])
    return None
