"""Concurrence, sudden-death detection and revival counting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dynamics import Trajectory, rk4_propagator, rk4_step
from .qmatrix import PAULI, dagger, herm_eigvals, psd_sqrt, tensor
from .xstate import XState, XTrajectory, kinetic_matrix

__all__ = [
    "EmptyTrace",
    "f_function",
    "g_function",
    "concurrence_x",
    "wootters_lambdas",
    "concurrence_general",
    "concurrence",
    "signed_concurrence",
    "off_x_magnitude",
    "ConcurrenceTrace",
    "EsdReport",
    "trace_from_xstates",
    "trace_from_trajectory",
    "trace_from_kinetic",
    "detect_esd",
    "local_maxima",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 1e-6
X_FORM_TOL = 1e-14
_YY = tensor(PAULI["y"], PAULI["y"])
_OFF_X = np.array([[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]], dtype=bool)


class EmptyTrace(ValueError):
    pass


def f_function(x: XState):
    """``|z| - sqrt(a d)``."""
    return np.abs(x.z) - np.sqrt(np.clip(np.asarray(x.a) * np.asarray(x.d), 0.0, None))


def g_function(x: XState):
    """``|w| - sqrt(b c)``."""
    return np.abs(x.w) - np.sqrt(np.clip(np.asarray(x.b) * np.asarray(x.c), 0.0, None))


def concurrence_x(x: XState):
    """Concurrence of an X state, ``2 max(0, F, G)`` clipped to [0, 1]."""
    value = 2.0 * np.maximum(np.maximum(f_function(x), g_function(x)), 0.0)
    value = np.clip(value, 0.0, 1.0)
    return float(value) if np.ndim(value) == 0 else value


def wootters_lambdas(rho) -> np.ndarray:
    """Descending square roots of the eigenvalues of ``rho (Y x Y) rho* (Y x Y)``.

    Computed on the Hermitian matrix ``sqrt(rho) rho_tilde sqrt(rho)``.
    """
    rho = np.asarray(rho, dtype=complex)
    root = psd_sqrt(rho)
    tilde = _YY @ np.conj(rho) @ _YY
    r = root @ tilde @ root
    r = 0.5 * (r + dagger(r))
    mu = herm_eigvals(r, check=False)
    return np.sqrt(np.clip(mu, 0.0, None))


def _wootters_signed(rho):
    lam = wootters_lambdas(rho)
    return lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]


def concurrence_general(rho):
    """Wootters concurrence of any two-qubit density matrix (or stack of them)."""
    value = np.clip(_wootters_signed(rho), 0.0, 1.0)
    return float(value) if np.ndim(value) == 0 else value


def off_x_magnitude(rho):
    """Largest modulus among the entries outside the X pattern."""
    rho = np.asarray(rho)
    return np.max(np.abs(rho[..., _OFF_X]), axis=-1)


def signed_concurrence(rho):
    """Unclipped concurrence: negative values measure the margin of separability.

    ``2 max(F, G)`` for X-form matrices, ``l1 - l2 - l3 - l4`` otherwise.
    """
    rho = np.asarray(rho, dtype=complex)
    stack = rho.reshape((-1, 4, 4))
    out = np.empty(len(stack))
    is_x = off_x_magnitude(stack) < X_FORM_TOL
    if np.any(is_x):
        x = XState.from_matrix(stack[is_x])
        out[is_x] = 2.0 * np.maximum(f_function(x), g_function(x))
    if np.any(~is_x):
        out[~is_x] = _wootters_signed(stack[~is_x])
    return float(out[0]) if rho.ndim == 2 else out.reshape(rho.shape[:-2])


def concurrence(rho):
    """Concurrence with the X-state shortcut where the off-X entries vanish."""
    value = np.clip(signed_concurrence(rho), 0.0, 1.0)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class ConcurrenceTrace:
    """Concurrence sampled on a uniform grid.

    ``F`` and ``G`` are taken from the X entries of each state.  When
    ``x_form`` is true they determine the concurrence exactly.  ``signed`` is
    the unclipped concurrence (see :func:`signed_concurrence`); it tells a
    genuine death from a tangential zero.  ``evaluator``, if given, returns the
    concurrence at any time inside the grid and is used to refine zero
    crossings.
    """

    times: np.ndarray
    concurrence: np.ndarray
    F: np.ndarray
    G: np.ndarray
    epsilon: float = DEFAULT_EPSILON
    x_form: bool = True
    evaluator: Optional[Callable[[float], float]] = field(default=None, repr=False, compare=False)
    signed: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.times)

    @property
    def signed_values(self) -> np.ndarray:
        if self.signed is not None:
            return self.signed
        if self.x_form:
            return 2.0 * np.maximum(self.F, self.G)
        return self.concurrence

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


@dataclass(frozen=True)
class EsdReport:
    """Outcome of sudden-death analysis on one trace.

    ``t_esd`` is the last death time, ``0`` for a trace that is never
    entangled, and ``inf`` when the trace is still entangled at ``horizon``.
    ``revival_count`` counts sudden births: transitions from zero to positive
    concurrence, including the first one of an initially separable state.
    """

    t_esd: float
    revival_count: int
    death_birth_times: tuple[float, ...]
    events: tuple[tuple[float, str], ...]
    positive_at_horizon: bool
    horizon: float
    initially_entangled: bool

    @property
    def never_entangled(self) -> bool:
        return not self.initially_entangled and not self.events

    @property
    def deaths(self) -> tuple[float, ...]:
        return tuple(t for t, kind in self.events if kind == "death")

    @property
    def births(self) -> tuple[float, ...]:
        return tuple(t for t, kind in self.events if kind == "birth")


def trace_from_xstates(times, states: XState, epsilon: float = DEFAULT_EPSILON,
                       evaluator=None) -> ConcurrenceTrace:
    f = np.asarray(f_function(states), dtype=float)
    g = np.asarray(g_function(states), dtype=float)
    conc = np.clip(2.0 * np.maximum(np.maximum(f, g), 0.0), 0.0, 1.0)
    return ConcurrenceTrace(np.asarray(times, dtype=float), conc, f, g, epsilon, True, evaluator)


def trace_from_kinetic(traj: XTrajectory, epsilon: float = DEFAULT_EPSILON) -> ConcurrenceTrace:
    """Trace of a kinetic trajectory; crossings are refined with sub-steps of the same RK4 map."""
    m = kinetic_matrix(traj.gamma, traj.omega_c)
    ys = traj.states.to_real()
    times, dt = traj.times, traj.dt

    def evaluate(t: float) -> float:
        i = min(int(math.floor(t / dt)), len(times) - 1)
        tau = t - times[i]
        y = ys[i] if tau <= 0 else rk4_propagator(m, tau) @ ys[i]
        return concurrence_x(XState.from_real(y))

    return trace_from_xstates(times, traj.states, epsilon, evaluate)


def trace_from_trajectory(traj: Trajectory, epsilon: float = DEFAULT_EPSILON) -> ConcurrenceTrace:
    states = traj.states
    xpart = XState.from_matrix(states)
    f = np.asarray(f_function(xpart), dtype=float)
    g = np.asarray(g_function(xpart), dtype=float)
    signed = signed_concurrence(states)
    conc = np.clip(signed, 0.0, 1.0)
    x_form = bool(np.all(off_x_magnitude(states) < X_FORM_TOL))
    evaluator = None
    if traj.rhs is not None:
        rhs, times, dt = traj.rhs, traj.times, traj.dt

        def evaluator(t: float) -> float:
            i = min(int(math.floor(t / dt)), len(times) - 1)
            tau = t - times[i]
            rho = states[i] if tau <= 0 else rk4_step(rhs, states[i], tau)
            return concurrence(rho)

    return ConcurrenceTrace(traj.times, conc, f, g, epsilon, x_form, evaluator, signed)


def _interpolator(trace: ConcurrenceTrace) -> Callable[[float], float]:
    """Local cubic through the four samples around ``t``."""
    times = trace.times
    # for X traces the signed quantity 2 max(F, G) is smoother than the clipped concurrence
    values = trace.signed_values
    n = len(times)

    def evaluate(t: float) -> float:
        if n < 4:
            return float(np.interp(t, times, values))
        i = int(np.searchsorted(times, t, side="right")) - 1
        lo = min(max(i - 1, 0), n - 4)
        sl = slice(lo, lo + 4)
        coef = np.polyfit(times[sl] - times[lo], values[sl], 3)
        return float(np.clip(np.polyval(coef, t - times[lo]), 0.0, 1.0))

    return evaluate


def _refine(func, t_lo, t_hi, lo_alive, eps, tol):
    # keep the invariant alive(t_lo) == lo_alive, alive(t_hi) != lo_alive
    while t_hi - t_lo > tol:
        mid = 0.5 * (t_lo + t_hi)
        if (func(mid) > eps) == lo_alive:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)


def detect_esd(trace: ConcurrenceTrace, *, evaluator=None, refine: bool = True) -> EsdReport:
    """Locate entanglement deaths and births along a concurrence trace.

    Sign changes of ``concurrence - epsilon`` between grid samples are refined
    by bisection to ``dt / 1024`` using ``evaluator`` (or the trace's own
    evaluator, or a local cubic through the samples).

    A zero interval in which the signed concurrence never falls below
    ``-epsilon`` is a tangential node (the state touches the separable set
    without entering it); it is dropped together with the rebirth that ends it.
    """
    n = len(trace.times)
    if n == 0:
        raise EmptyTrace("concurrence trace has no samples")
    eps = trace.epsilon
    times = np.asarray(trace.times, dtype=float)
    alive = np.asarray(trace.concurrence) > eps
    signed = np.asarray(trace.signed_values, dtype=float)
    horizon = float(times[-1])
    func = evaluator or trace.evaluator or _interpolator(trace)
    tol = (trace.dt if n > 1 else 0.0) / 1024.0

    # (time, kind, index of the first sample after the crossing)
    events: list[tuple[float, str, int]] = []
    for i in np.flatnonzero(alive[1:] != alive[:-1]):
        lo_alive = bool(alive[i])
        if refine:
            t = _refine(func, times[i], times[i + 1], lo_alive, eps, tol)
        else:
            t = 0.5 * (times[i] + times[i + 1])
        events.append((float(t), "death" if lo_alive else "birth", int(i) + 1))

    kept: list[tuple[float, str, int]] = []
    for ev in events:
        if ev[1] == "birth" and kept and kept[-1][1] == "death":
            if signed[kept[-1][2]:ev[2]].min() > -eps:
                kept.pop()
                continue
        kept.append(ev)
    positive_at_horizon = bool(alive[-1])
    if kept and kept[-1][1] == "death" and signed[kept[-1][2]:].min() > -eps:
        kept.pop()
        positive_at_horizon = True

    initially = bool(alive[0])
    births = sum(1 for ev in kept if ev[1] == "birth")
    if not initially and not kept:
        t_esd = 0.0
        positive_at_horizon = False
    elif positive_at_horizon:
        t_esd = math.inf
    else:
        t_esd = kept[-1][0]
    return EsdReport(
        t_esd=t_esd,
        revival_count=births,
        death_birth_times=tuple(ev[0] for ev in kept),
        events=tuple((ev[0], ev[1]) for ev in kept),
        positive_at_horizon=positive_at_horizon,
        horizon=horizon,
        initially_entangled=initially,
    )


def local_maxima(trace: ConcurrenceTrace, *, floor: Optional[float] = None) -> np.ndarray:
    """Times of interior local maxima of the concurrence, refined by a parabola through three samples."""
    c = np.asarray(trace.concurrence, dtype=float)
    floor = trace.epsilon if floor is None else floor
    idx = np.flatnonzero((c[1:-1] > c[:-2]) & (c[1:-1] >= c[2:]) & (c[1:-1] > floor)) + 1
    dt = trace.dt
    out = []
    for i in idx:
        y0, y1, y2 = c[i - 1], c[i], c[i + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        out.append(trace.times[i] + shift * dt)
    return np.asarray(out)
