"""Master-equation generators for two driven, coupled qubits and their RK4 integration.

Three models are provided, each as a linear :class:`Generator` acting on 4x4
density matrices:

* ``rotating-frame``: drive + flip-flop coupling in the rotating frame with one
  amplitude-damping channel per qubit.
* ``secular``: the time-averaged equation in the drive's interaction picture,
  valid for Rabi frequencies well above the decay rates.
* ``thermal-undriven``: no drive, finite-temperature reservoirs.

Rates and frequencies are in units of a reference decay rate, times in its
inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .qmatrix import IDENTITY4, PAULI, dagger, embed_pauli, herm_eigvals, tensor

__all__ = [
    "NegativeRate",
    "SecularPreconditionViolated",
    "NonPositiveLarmor",
    "InvariantViolated",
    "StepTooLarge",
    "SystemParams",
    "Generator",
    "Trajectory",
    "build_h_rf",
    "dissipator",
    "rotating_frame_generator",
    "secular_generator",
    "thermal_generator",
    "rhs_rotating_frame",
    "rhs_secular",
    "rhs_thermal_undriven",
    "nbar_from_temperature",
    "default_dt",
    "rk4_step",
    "integrate",
    "interaction_transform",
    "check_density_matrix",
]

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-9
POSITIVITY_TOL = 1e-7
STABILITY_BOUND = 0.1


class NegativeRate(ValueError):
    pass


class SecularPreconditionViolated(ValueError):
    pass


class NonPositiveLarmor(ValueError):
    pass


class StepTooLarge(ValueError):
    pass


class InvariantViolated(ArithmeticError):
    """A density-matrix invariant broke during integration."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t = {time:.6g}")
        self.time = time


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the two-qubit system."""

    gamma1: float = 1.0
    gamma2: float = 1.0
    rabi1: float = 0.0
    rabi2: float = 0.0
    detuning1: float = 0.0
    detuning2: float = 0.0
    omega_xx: float = 0.0
    omega_yy: float = 0.0
    nbar1: float = 0.0
    nbar2: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2"):
            if not getattr(self, name) >= 0.0:
                raise NegativeRate(f"{name} must be >= 0, got {getattr(self, name)!r}")
        for name in ("nbar1", "nbar2"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    @property
    def omega_c(self) -> float:
        """Effective flip-flop coupling ``omega_xx + omega_yy``."""
        return self.omega_xx + self.omega_yy

    @classmethod
    def symmetric(cls, gamma=1.0, rabi=0.0, omega_c=0.0, nbar=0.0, detuning=0.0) -> "SystemParams":
        """Identical qubits; the whole coupling is placed on ``omega_xx``."""
        return cls(gamma, gamma, rabi, rabi, detuning, detuning, omega_c, 0.0, nbar, nbar)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def _left(a):
    return np.kron(a, IDENTITY4)


def _right(b):
    return np.kron(IDENTITY4, np.asarray(b).T)


def _sandwich(a, b):
    # row-major vec: vec(A rho B) = (A kron B^T) vec(rho)
    return np.kron(a, np.asarray(b).T)


@dataclass(frozen=True)
class Generator:
    """Linear map ``rho -> d rho / dt`` stored as a 16x16 superoperator on row-major vec(rho)."""

    superop: np.ndarray
    model: str = "custom"

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        flat = rho.reshape(rho.shape[:-2] + (16,))
        return (flat @ self.superop.T).reshape(rho.shape)

    def __add__(self, other: "Generator") -> "Generator":
        return Generator(self.superop + other.superop, self.model)

    def norm(self) -> float:
        return float(np.linalg.norm(self.superop, 2))

    @classmethod
    def hamiltonian(cls, h: np.ndarray, model: str = "custom") -> "Generator":
        return cls(-1j * (_left(h) - _right(h)), model)


def build_h_rf(params: SystemParams) -> np.ndarray:
    """Rotating-frame Hamiltonian: local detuning and drive terms plus flip-flop coupling."""
    h = np.zeros((4, 4), dtype=complex)
    for j, delta, rabi in ((1, params.detuning1, params.rabi1), (2, params.detuning2, params.rabi2)):
        h += 0.5 * delta * embed_pauli("z", j) + 0.5 * rabi * embed_pauli("x", j)
    xx = tensor(PAULI["x"], PAULI["x"])
    yy = tensor(PAULI["y"], PAULI["y"])
    h += 0.5 * params.omega_c * (xx + yy)
    return h


def dissipator(op: np.ndarray, rate: float) -> Generator:
    """Lindblad dissipator ``rate/2 (2 L rho L^+ - L^+ L rho - rho L^+ L)``."""
    if not rate >= 0.0:
        raise NegativeRate(f"rate must be >= 0, got {rate!r}")
    op = np.asarray(op, dtype=complex)
    opd = dagger(op)
    ldl = opd @ op
    sup = 0.5 * rate * (2.0 * _sandwich(op, opd) - _left(ldl) - _right(ldl))
    return Generator(sup, "dissipator")


def rotating_frame_generator(params: SystemParams) -> Generator:
    gen = Generator.hamiltonian(build_h_rf(params), "rotating-frame")
    for j, gamma in ((1, params.gamma1), (2, params.gamma2)):
        gen = gen + dissipator(embed_pauli("minus", j), gamma)
    return Generator(gen.superop, "rotating-frame")


def _check_secular(params: SystemParams) -> None:
    if params.gamma1 != params.gamma2:
        raise SecularPreconditionViolated(
            f"secular model needs gamma1 == gamma2, got {params.gamma1!r} and {params.gamma2!r}")
    if params.rabi1 != params.rabi2:
        raise SecularPreconditionViolated(
            f"secular model needs rabi1 == rabi2, got {params.rabi1!r} and {params.rabi2!r}")
    if params.detuning1 != 0.0 or params.detuning2 != 0.0:
        raise SecularPreconditionViolated("secular model needs resonant driving (zero detunings)")


def secular_generator(params: SystemParams) -> Generator:
    """Drive-averaged generator in the interaction picture of the Rabi drive.

    Coherent part ``-(i w_c / 4)[2 XX + YY + ZZ, rho]``; per qubit a
    ``G/8 (s+ rho s+ + s- rho s- + sz rho sz - rho)`` term plus balanced
    raising/lowering dissipators of strength ``3G/16``.
    """
    _check_secular(params)
    gamma = params.gamma1
    coupling = 0.25 * params.omega_c * (
        2.0 * tensor(PAULI["x"], PAULI["x"])
        + tensor(PAULI["y"], PAULI["y"])
        + tensor(PAULI["z"], PAULI["z"])
    )
    sup = Generator.hamiltonian(coupling).superop.copy()
    ident = np.eye(16, dtype=complex)
    for j in (1, 2):
        sp, sm, sz = embed_pauli("plus", j), embed_pauli("minus", j), embed_pauli("z", j)
        sup += gamma / 8.0 * (_sandwich(sp, sp) + _sandwich(sm, sm) + _sandwich(sz, sz) - ident)
        pm, mp = sp @ sm, sm @ sp
        sup += 3.0 * gamma / 16.0 * (
            2.0 * _sandwich(sm, sp) + 2.0 * _sandwich(sp, sm)
            - _left(pm) - _left(mp) - _right(pm) - _right(mp)
        )
    return Generator(sup, "secular")


def thermal_generator(params: SystemParams) -> Generator:
    """Undriven evolution with thermal reservoirs of occupation ``nbar1``, ``nbar2``.

    Rabi terms in ``params`` are ignored.
    """
    h = build_h_rf(params.replace(rabi1=0.0, rabi2=0.0))
    gen = Generator.hamiltonian(h)
    for j, gamma, nbar in ((1, params.gamma1, params.nbar1), (2, params.gamma2, params.nbar2)):
        gen = gen + dissipator(embed_pauli("minus", j), gamma * (nbar + 1.0))
        gen = gen + dissipator(embed_pauli("plus", j), gamma * nbar)
    return Generator(gen.superop, "thermal-undriven")


def rhs_rotating_frame(params: SystemParams, rho: np.ndarray) -> np.ndarray:
    return rotating_frame_generator(params)(rho)


def rhs_secular(params: SystemParams, rho: np.ndarray) -> np.ndarray:
    return secular_generator(params)(rho)


def rhs_thermal_undriven(params: SystemParams, rho: np.ndarray) -> np.ndarray:
    return thermal_generator(params)(rho)


def nbar_from_temperature(larmor: float, temperature: float) -> float:
    """Bose-Einstein occupation at frequency ``larmor`` (natural units, hbar = k_B = 1)."""
    if not larmor > 0.0:
        raise NonPositiveLarmor(f"larmor frequency must be > 0, got {larmor!r}")
    if temperature < 0.0:
        raise ValueError(f"temperature must be >= 0, got {temperature!r}")
    if temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(larmor / temperature)


def default_dt(params: SystemParams | None = None, *, gamma=1.0, rabi=0.0, omega_c=0.0) -> float:
    """``min(1e-3/gamma, 0.01/rabi, 0.01/omega_c)``, ignoring zero scales."""
    if params is not None:
        gamma = max(params.gamma1, params.gamma2)
        rabi = max(abs(params.rabi1), abs(params.rabi2))
        omega_c = abs(params.omega_c)
    candidates = [1e-3 / gamma if gamma > 0 else 1e-3]
    if rabi > 0:
        candidates.append(0.01 / rabi)
    if omega_c > 0:
        candidates.append(0.01 / omega_c)
    return min(candidates)


@dataclass(frozen=True)
class Trajectory:
    """Density matrices sampled on a uniform time grid."""

    times: np.ndarray
    states: np.ndarray
    dt: float
    model: str = "custom"
    rhs: Callable | None = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return zip(self.times, self.states)

    def __getitem__(self, i):
        return self.times[i], self.states[i]


def rk4_step(rhs: Callable, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(matrix: np.ndarray, h: float) -> np.ndarray:
    """One classic RK4 step of ``y' = M y`` written as a matrix: sum_{k<=4} (hM)^k / k!."""
    hm = h * np.asarray(matrix)
    out = np.eye(hm.shape[0], dtype=hm.dtype)
    term = out
    for k in range(1, 5):
        term = term @ hm / k
        out = out + term
    return out


def propagate_linear(matrix: np.ndarray, y0: np.ndarray, h: float, n_steps: int, block: int = 64) -> np.ndarray:
    """All ``n_steps + 1`` RK4 iterates of a linear autonomous system.

    Iterates are produced ``block`` at a time from precomputed propagator powers.
    """
    step = rk4_propagator(matrix, h)
    dim = step.shape[0]
    block = max(1, min(block, n_steps))
    powers = np.empty((block, dim, dim), dtype=step.dtype)
    powers[0] = step
    for j in range(1, block):
        powers[j] = step @ powers[j - 1]
    y0 = np.asarray(y0)
    out = np.empty((n_steps + 1,) + y0.shape, dtype=np.result_type(step, y0))
    out[0] = y0
    start = 0
    while start < n_steps:
        m = min(block, n_steps - start)
        out[start + 1:start + m + 1] = powers[:m] @ out[start]
        start += m
    return out


def _n_steps(t_max: float, dt: float) -> int:
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    if not t_max >= dt:
        raise ValueError(f"t_max must be >= dt, got t_max={t_max!r}, dt={dt!r}")
    return int(math.floor(t_max / dt + 1e-9))


def check_density_matrix(states: np.ndarray, times=None, *, trace_ref: float = 1.0) -> dict[str, float]:
    """Validate trace, Hermiticity and positivity of one or many density matrices.

    Returns the worst observed drifts; raises :class:`InvariantViolated` (carrying
    the first offending time) if a tolerance is exceeded.
    """
    states = np.asarray(states, dtype=complex)
    stack = states.reshape((-1, 4, 4))
    if times is None:
        times = np.zeros(len(stack))
    times = np.broadcast_to(np.asarray(times, dtype=float).reshape(-1), (len(stack),))
    trace_err = np.abs(np.trace(stack, axis1=-2, axis2=-1) - trace_ref)
    herm_err = np.max(np.abs(stack - dagger(stack)), axis=(-2, -1))
    if not np.all(np.isfinite(stack)):
        bad = int(np.argmax(~np.all(np.isfinite(stack), axis=(-2, -1))))
        raise InvariantViolated("non-finite density matrix entry", float(times[bad]))
    for err, tol, what in ((trace_err, TRACE_TOL, "trace drift"), (herm_err, HERMITIAN_TOL, "Hermiticity drift")):
        if np.any(err >= tol):
            bad = int(np.argmax(err >= tol))
            raise InvariantViolated(f"{what} {err[bad]:.3e} exceeds {tol:g}", float(times[bad]))
    min_eig = herm_eigvals(0.5 * (stack + dagger(stack)), check=False)[:, -1]
    if np.any(min_eig <= -POSITIVITY_TOL):
        bad = int(np.argmax(min_eig <= -POSITIVITY_TOL))
        raise InvariantViolated(f"eigenvalue {min_eig[bad]:.3e} below {-POSITIVITY_TOL:g}", float(times[bad]))
    return {
        "trace_drift": float(trace_err.max()),
        "hermiticity_drift": float(herm_err.max()),
        "min_eigenvalue": float(min_eig.min()),
    }


def integrate(rhs: Callable, rho0: np.ndarray, t_max: float, dt: float, *,
              model: str | None = None, check: bool = True) -> Trajectory:
    """Classic fixed-step RK4 integration of ``d rho / dt = rhs(rho)``.

    Parameters
    ----------
    rhs : callable
        Maps a 4x4 density matrix to its time derivative.  A :class:`Generator`
        takes a fast path (the RK4 step of a linear system is a fixed matrix).
    rho0 : ndarray, shape (4, 4)
        Initial state.
    t_max, dt : float
        Horizon and step; samples are taken at ``k * dt`` for ``k * dt <= t_max``.
    check : bool
        Validate every sample (trace, Hermiticity, positivity).

    Raises
    ------
    StepTooLarge
        ``dt * ||generator|| >= 0.1`` for a :class:`Generator`.
    InvariantViolated
        A sample breaks a density-matrix invariant.
    """
    n = _n_steps(t_max, dt)
    rho0 = np.asarray(rho0, dtype=complex)
    if check:
        check_density_matrix(rho0)
    times = dt * np.arange(n + 1)
    if isinstance(rhs, Generator):
        if dt * rhs.norm() >= STABILITY_BOUND:
            raise StepTooLarge(
                f"dt * ||generator|| = {dt * rhs.norm():.3g} must stay below {STABILITY_BOUND}")
        states = propagate_linear(rhs.superop, rho0.reshape(16), dt, n).reshape(n + 1, 4, 4)
        name = model or rhs.model
    else:
        states = np.empty((n + 1, 4, 4), dtype=complex)
        states[0] = rho0
        for k in range(n):
            states[k + 1] = rk4_step(rhs, states[k], dt)
        name = model or "custom"
    if check:
        check_density_matrix(states, times, trace_ref=float(np.trace(rho0).real))
    return Trajectory(times, states, dt, name, rhs)


def _local_rotation(theta: float) -> np.ndarray:
    # exp(i theta sigma_x / 2)
    return math.cos(theta / 2.0) * PAULI["i"] + 1j * math.sin(theta / 2.0) * PAULI["x"]


def interaction_transform(rho_rf: np.ndarray, t: float, rabi: float) -> np.ndarray:
    """Map a rotating-frame state into the interaction picture of the Rabi drive."""
    u1 = _local_rotation(rabi * t)
    u = np.kron(u1, u1)
    return u @ np.asarray(rho_rf, dtype=complex) @ dagger(u)
