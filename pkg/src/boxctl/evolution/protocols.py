"""Rectangle protocols: adiabatic sweeps, eigenstate pumping and population splitting."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import BracketError
from ..paths import DeformationPath
from ..spectrum import Mode, Rect, _check_mode, build_index, crossing_times, mode_energy
from .basis import SymmetryBreaker, WaveState, _bump, gauge_matrix
from .propagator import assemble_hamiltonian, propagate

DEFAULT_N = 24
DEFAULT_DT = 0.005
BREAKER_GAP_FRACTION = 0.3
SLOW_SPEED = 0.02
SPLIT_TOL = 0.05


# -- gauge frame <-> physical frame -------------------------------------------------


def physical_amplitudes(state: WaveState, f1: float, f1p: float, f2: float, f2p: float) -> np.ndarray:
    """Overlaps ``<phi_{m,n}(t) | u>`` with the instantaneous rectangle modes.

    ``u = e^{i psi} h# w`` with ``psi = (f1'/4f1) x1^2 + (f2'/4f2) x2^2``;
    pulled back to the unit square the phase is ``(fj' fj / 4) yj^2``.
    """
    G1 = gauge_matrix(0.25 * f1p * f1, state.n1)
    G2 = gauge_matrix(0.25 * f2p * f2, state.n2)
    return G1 @ state.coeffs @ G2.T


def state_from_physical(amplitudes: np.ndarray, f1: float, f1p: float, f2: float, f2p: float) -> WaveState:
    """Inverse of :func:`physical_amplitudes`."""
    n1, n2 = amplitudes.shape
    G1 = gauge_matrix(0.25 * f1p * f1, n1)
    G2 = gauge_matrix(0.25 * f2p * f2, n2)
    return WaveState(G1.conj().T @ amplitudes @ G2.conj())


def gauge_to_physical(state: WaveState, rect: Rect, f1p: float = 0.0, f2p: float = 0.0, grid: int = 256):
    """Sample ``u(x) = e^{i psi(x)} w(x1/a, x2/b) / sqrt(ab)`` at cell centres of a ``grid^2`` mesh.

    Returns ``(x1, x2, u)`` with ``u[i, j] = u(x1[i], x2[j])``. The midpoint
    rule ``sum |u|^2 * (a/grid) * (b/grid)`` approximates ``||w||^2``.
    """
    from .basis import sine_samples

    a, b = rect.a, rect.b
    y = (np.arange(grid) + 0.5) / grid
    w = sine_samples(state.n1, y) @ state.coeffs @ sine_samples(state.n2, y).T
    x1, x2 = a * y, b * y
    psi = (f1p / (4 * a)) * x1[:, None] ** 2 + (f2p / (4 * b)) * x2[None, :] ** 2
    return x1, x2, np.exp(1j * psi) * w / math.sqrt(a * b)


def eigenbasis_populations(H: np.ndarray, state: WaveState) -> np.ndarray:
    """Populations on the eigenvectors of ``H``, labelled by their dominant sine mode.

    Returned as an ``(n1, n2)`` array like :meth:`WaveState.populations`. When
    ``H`` is diagonal this is exactly ``|c_{m,n}|^2``.
    """
    n1, n2 = state.n1, state.n2
    off = H - np.diag(np.diag(H))
    if not np.any(off):
        return state.populations()
    _, V = np.linalg.eigh(H)
    label = np.argmax(np.abs(V), axis=0)
    if len(set(label.tolist())) != len(label):
        raise ValueError("eigenvectors of the final Hamiltonian have no unique dominant mode")
    pops = np.abs(V.conj().T @ state.coeffs.ravel()) ** 2
    out = np.zeros(n1 * n2)
    out[label] = pops
    return out.reshape(n1, n2)


# -- adiabatic rectangular sweep ----------------------------------------------------


@dataclass
class SweepResult:
    """Outcome of a slow linear sweep ``a(tau)`` over ``tau in [0, 1]`` with ``t = tau / eps``."""

    eps: float
    mode: Mode
    amplitude: complex
    population_error: float
    leak: float
    phase_error: float
    Lambda: float
    norm_drift: float


def adiabatic_sweep(
    a0: float,
    a1: float,
    b: float,
    mode: Mode,
    eps: float,
    *,
    n: int = DEFAULT_N,
    dt: float | None = None,
) -> SweepResult:
    """Follow the instantaneous eigenmode ``mode`` along ``a: a0 -> a1`` at speed ``eps``.

    The initial datum is the physical mode, so the gauge frame starts from
    ``G(alpha)^H e_mode``. The overlap with the final physical mode is
    compared to ``1`` (population) and to ``e^{-i Lambda(1)/eps}`` (phase),
    where ``Lambda(1) = int_0^1 lambda(tau) dtau``.
    """
    mode = _check_mode(mode)
    T = 1.0 / eps
    path = DeformationPath.linear(a0, a1, b, b, T)
    dt = 0.005 if dt is None else dt
    amp0 = np.zeros((n, n), complex)
    amp0[mode.m - 1, mode.n - 1] = 1.0
    w0 = state_from_physical(amp0, a0, path.f1p(0.0), b, 0.0)
    w1 = propagate(w0, path, dt)
    amps = physical_amplitudes(w1, a1, path.f1p(T), b, 0.0)
    c = complex(amps[mode.m - 1, mode.n - 1])

    # Lambda(1) for lambda = pi^2 (m^2/a^2 + n^2/b^2) with a linear in tau
    if a1 == a0:
        Lam = mode_energy(Rect(a0, b), mode)
    else:
        Lam = math.pi**2 * (mode.m**2 / (a0 * a1) + mode.n**2 / b**2)
    ref = np.exp(-1j * Lam / eps)
    return SweepResult(
        eps=eps,
        mode=mode,
        amplitude=c,
        population_error=abs(abs(c) - 1.0),
        leak=math.sqrt(max(0.0, 1.0 - abs(c) ** 2)),
        phase_error=abs(np.angle(c / ref)),
        Lambda=Lam,
        norm_drift=abs(w1.norm() - w0.norm()),
    )


# -- pumping and splitting ----------------------------------------------------------


def gap_scale(rect: Rect, pair: tuple[Mode, Mode]) -> float:
    """Distance from the mean energy of ``pair`` to the nearest other level in ``rect``."""
    e = 0.5 * (mode_energy(rect, pair[0]) + mode_energy(rect, pair[1]))
    idx = build_index(rect, 64)
    others = [en for md, en in idx.entries if md not in pair]
    return float(min(abs(en - e) for en in others))


@dataclass
class PumpingResult:
    """Final populations of a two-phase pumping run, indexed by ``(m-1, n-1)``."""

    populations: np.ndarray
    start: Mode
    partner: Mode
    crossings: list
    breaker_strength: float
    speed: float
    duration: float
    dt: float
    seed: int
    breaker_scale: float
    norm_drift: float
    params: dict = field(default_factory=dict)

    def population(self, mode: Mode) -> float:
        return float(self.populations[mode[0] - 1, mode[1] - 1])


def _partner(a: float, a_prime: float, b: float, start: Mode) -> Mode:
    """Mode that shares ``start``'s rank at ``a'``, i.e. the rank-following destination back at ``a``."""
    there = build_index(Rect(a_prime, b), 64)
    here = build_index(Rect(a, b), 64)
    return here.mode_of(there.rank_of(start))


def default_breaker_strength(a: float, a_prime: float, b: float, start: Mode, partner: Mode) -> float:
    """``BREAKER_GAP_FRACTION`` times the gap scale at the first crossing of ``start`` and ``partner``."""
    path = DeformationPath.linear(a_prime, a, b, b, 1.0)
    cross = crossing_times(path, [start, partner])
    rect = path.rect(cross[0].t) if cross else Rect(a, b)
    return BREAKER_GAP_FRACTION * gap_scale(rect, (start, partner))


def run_pumping(
    a: float,
    a_prime: float,
    b: float,
    start: Mode,
    speed: float,
    breaker_strength: float | None = None,
    *,
    breaker_outward: bool = False,
    breaker_return: bool = True,
    breaker_scale: float = 1.0,
    n1: int = DEFAULT_N,
    n2: int = DEFAULT_N,
    dt: float = DEFAULT_DT,
    seed: int = 0,
    method: str = "split4",
    monitor=None,
) -> PumpingResult:
    """Two smoothstep sweeps ``a -> a'`` then ``a' -> a`` at mean speed ``|a - a'| / duration``.

    The breaker (strength times ``breaker_scale``) rides a C-infinity bump over
    each phase where it is enabled. With the default settings the quantum
    numbers are kept outward and the rank is kept on the way back, so the
    state is steered from ``start`` to the mode that shares its rank at ``a'``.
    """
    start = _check_mode(start)
    if start == (1, 1):
        raise ValueError("the ground state never takes part in a crossing; choose start != (1, 1)")
    if speed <= 0:
        raise ValueError("speed must be positive")
    partner = _partner(a, a_prime, b, start)
    duration = abs(a - a_prime) / speed
    out_path = DeformationPath.smoothstep(a, a_prime, b, b, duration)
    back_path = DeformationPath.smoothstep(a_prime, a, b, b, duration, t_start=duration)

    crossings = crossing_times(out_path, [start, partner])
    if not crossings or partner == start:
        warnings.warn(
            f"no crossing of {tuple(start)} between a={a} and a'={a_prime}; pumping is a no-op",
            RuntimeWarning,
            stacklevel=2,
        )
    if breaker_strength is None:
        breaker_strength = default_breaker_strength(a, a_prime, b, start, partner) if partner != start else 0.0
    base = SymmetryBreaker(n1, n2, strength=breaker_strength, seed=seed)

    state = WaveState.from_mode(n1, n2, start)
    norm0 = state.norm()
    for path, enabled in ((out_path, breaker_outward), (back_path, breaker_return)):
        br = None
        if enabled and breaker_scale * breaker_strength != 0.0:
            br = base.with_envelope(_bump(path.t_start, path.t_end), breaker_scale * breaker_strength)
        state = propagate(state, path, dt, br, method=method, monitor=monitor, monitor_every=max(1, int(1.0 / dt)))

    H = assemble_hamiltonian(back_path, back_path.t_end, n1, n2, None)
    return PumpingResult(
        populations=eigenbasis_populations(H, state),
        start=start,
        partner=partner,
        crossings=crossings,
        breaker_strength=float(breaker_strength),
        speed=float(speed),
        duration=float(duration),
        dt=float(dt),
        seed=seed,
        breaker_scale=float(breaker_scale),
        norm_drift=abs(state.norm() - norm0),
        params=dict(a=a, a_prime=a_prime, b=b, n1=n1, n2=n2),
    )


@dataclass
class SplitResult:
    """Interpolation parameter ``s`` and the populations it produces."""

    s: float
    population_partner: float
    population_start: float
    target: float
    iterations: int
    result: PumpingResult | None


def find_split_speed(
    a: float,
    a_prime: float,
    b: float,
    start: Mode,
    target_alpha: float,
    tol: float = SPLIT_TOL,
    *,
    speed: float,
    breaker_strength: float | None = None,
    max_iter: int = 40,
    **kw,
) -> SplitResult:
    """Bisect the breaker scale ``s`` of the return sweep so the partner holds ``target_alpha^2``.

    ``s = 0`` is the breaker-off return (population stays on ``start``) and
    ``s = 1`` the full breaker-on return (population moves to the partner).
    Endpoints within ``tol`` of the target are returned without bisection.
    """
    if not 0.0 <= target_alpha <= 1.0:
        raise ValueError("target_alpha must lie in [0, 1]")
    target = target_alpha**2

    def probe(s):
        r = run_pumping(a, a_prime, b, start, speed, breaker_strength, breaker_scale=s, **kw)
        return r, r.population(r.partner)

    r1, p1 = probe(1.0)
    if abs(p1 - target) <= tol:
        return SplitResult(1.0, p1, r1.population(start), target, 0, r1)
    r0, p0 = probe(0.0)
    if abs(p0 - target) <= tol:
        return SplitResult(0.0, p0, r0.population(start), target, 0, r0)
    if not (p0 - target) * (p1 - target) < 0:
        raise BracketError(
            f"breaker-off/on protocols give partner populations {p0:.4f}/{p1:.4f}, "
            f"which do not bracket {target:.4f}; the reference speed is outside the tunneling regime"
        )
    lo, hi, plo = 0.0, 1.0, p0
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        r, p = probe(mid)
        if abs(p - target) <= tol:
            return SplitResult(mid, p, r.population(start), target, it, r)
        if (p - target) * (plo - target) > 0:
            lo, plo = mid, p
        else:
            hi = mid
    raise BracketError(f"bisection did not reach tolerance {tol} in {max_iter} steps")
