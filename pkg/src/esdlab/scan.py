"""Parameter sweeps of the sudden-death time over (family parameter, coupling) grids."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dynamics import (
    STABILITY_BOUND,
    SecularPreconditionViolated,
    SystemParams,
    check_density_matrix,
    default_dt,
    integrate,
    rotating_frame_generator,
    secular_generator,
    thermal_generator,
)
from .entanglement import (
    DEFAULT_EPSILON,
    EsdReport,
    concurrence,
    concurrence_x,
    detect_esd,
    trace_from_kinetic,
    trace_from_trajectory,
    trace_from_xstates,
)
from .xstate import FAMILIES, closed_form, evolve_kinetic, family_from_name, kinetic_matrix, make_initial

__all__ = [
    "MODELS",
    "Status",
    "ScanConfig",
    "CellResult",
    "ScanResult",
    "ModelComparison",
    "canonical_model",
    "cell_params",
    "concurrence_trace",
    "evaluate_cell",
    "run_scan",
    "compare_models",
    "bisect_parameter",
    "thread_count",
    "effective_dt",
]

MODELS = ("kinetic", "closed-form", "secular", "rotating-frame", "thermal-undriven")
_ALIASES = {"kinetic-numeric": "kinetic", "secular-full": "secular", "closed_form": "closed-form",
            "rotating_frame": "rotating-frame", "thermal_undriven": "thermal-undriven", "thermal": "thermal-undriven"}
SECULAR_MIN_RABI_RATIO = 10.0


class Status(str, Enum):
    OK = "OK"
    NEVER_ENTANGLED = "NEVER_ENTANGLED"
    POSITIVE_AT_HORIZON = "POSITIVE_AT_HORIZON"
    NUMERIC_FAILURE = "NUMERIC_FAILURE"


def canonical_model(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in MODELS:
        raise ValueError(f"unknown model {name!r}; expected one of {', '.join(MODELS)}")
    return key


def thread_count() -> int:
    """Worker count from ``ESDLAB_THREADS`` (unset or 0 means one per CPU)."""
    raw = os.environ.get("ESDLAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ESDLAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"ESDLAB_THREADS must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


@dataclass(frozen=True)
class ScanConfig:
    family: str
    param_min: float
    param_max: float
    param_steps: int
    omega_c_min: float = 0.0
    omega_c_max: float = 20.0
    omega_c_steps: int = 101
    model: str = "kinetic"
    t_max: float = 10.0
    dt: float = 1e-3
    gamma: float = 1.0
    rabi: float = 25.0
    nbar: float = 0.0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "model", canonical_model(self.model))
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {sorted(FAMILIES)}")
        lo, hi = FAMILIES[self.family].bounds
        if not (lo <= self.param_min <= self.param_max <= hi):
            raise ValueError(f"param range [{self.param_min}, {self.param_max}] outside [{lo}, {hi}] for {self.family}")
        for name in ("param_steps", "omega_c_steps"):
            if int(getattr(self, name)) < 2:
                raise ValueError(f"{name} must be >= 2, got {getattr(self, name)!r}")
        if not self.omega_c_min <= self.omega_c_max:
            raise ValueError("omega_c_min must not exceed omega_c_max")
        if not self.t_max > 0 or not self.dt > 0:
            raise ValueError("t_max and dt must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    @property
    def params(self) -> np.ndarray:
        return np.linspace(self.param_min, self.param_max, int(self.param_steps))

    @property
    def omegas(self) -> np.ndarray:
        return np.linspace(self.omega_c_min, self.omega_c_max, int(self.omega_c_steps))


@dataclass(frozen=True)
class CellResult:
    t_esd: float
    revivals: int
    status: Status
    message: str = ""

    @classmethod
    def from_report(cls, report: EsdReport) -> "CellResult":
        if report.never_entangled:
            status = Status.NEVER_ENTANGLED
        elif report.positive_at_horizon:
            status = Status.POSITIVE_AT_HORIZON
        else:
            status = Status.OK
        return cls(report.t_esd, report.revival_count, status)


@dataclass(frozen=True)
class ScanResult:
    """Row-major grid: rows follow the family parameter, columns the coupling."""

    config: ScanConfig
    t_esd: np.ndarray
    revivals: np.ndarray
    status: np.ndarray
    messages: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.t_esd.shape

    def cell(self, i: int, j: int) -> CellResult:
        return CellResult(float(self.t_esd[i, j]), int(self.revivals[i, j]), Status(self.status[i, j]),
                          self.messages.get((i, j), ""))

    def rows(self):
        """``(param, omega_c, CellResult)`` in param-major order."""
        for i, p in enumerate(self.config.params):
            for j, w in enumerate(self.config.omegas):
                yield float(p), float(w), self.cell(i, j)


def cell_params(model: str, omega_c: float, *, gamma: float = 1.0, rabi: float = 25.0,
                nbar: float = 0.0) -> SystemParams:
    model = canonical_model(model)
    drive = rabi if model == "rotating-frame" else 0.0
    occupation = nbar if model == "thermal-undriven" else 0.0
    return SystemParams.symmetric(gamma=gamma, rabi=drive, omega_c=omega_c, nbar=occupation)


def effective_dt(norm: float, params: SystemParams, dt: float) -> float:
    """The requested step when it is stable, otherwise the automatic one.

    Keeping the requested step whenever possible gives every cell of a
    row the same time grid, hence the same refinement resolution.
    """
    if dt * norm < STABILITY_BOUND:
        return dt
    return min(dt, default_dt(params))


def concurrence_trace(family: str, param: float, omega_c: float, model: str = "kinetic", *,
                      t_max: float = 10.0, dt: float = 1e-3, gamma: float = 1.0, rabi: float = 25.0,
                      nbar: float = 0.0, epsilon: float = DEFAULT_EPSILON):
    """Evolve one family member under ``model`` and return ``(trace, states)``.

    ``states`` is an :class:`~esdlab.xstate.XState` for the X-restricted
    models and a stack of 4x4 matrices otherwise.
    """
    model = canonical_model(model)
    spec = family_from_name(family, param)
    params = cell_params(model, omega_c, gamma=gamma, rabi=rabi, nbar=nbar)
    if model == "kinetic":
        step = effective_dt(float(np.linalg.norm(kinetic_matrix(gamma, omega_c), 2)), params, dt)
        traj = evolve_kinetic(spec, gamma, omega_c, t_max, step)
        return trace_from_kinetic(traj, epsilon), traj.states
    if model == "closed-form":
        step = dt
        n = int(math.floor(t_max / step + 1e-9))
        times = step * np.arange(n + 1)
        states = closed_form(spec, gamma, omega_c, times)

        def evaluate(t):
            return concurrence_x(closed_form(spec, gamma, omega_c, t))

        return trace_from_xstates(times, states, epsilon, evaluate), states
    generator = {
        "secular": secular_generator,
        "rotating-frame": rotating_frame_generator,
        "thermal-undriven": thermal_generator,
    }[model](params)
    step = effective_dt(generator.norm(), params, dt)
    traj = integrate(generator, make_initial(spec).to_matrix(), t_max, step)
    return trace_from_trajectory(traj, epsilon), traj.states


def evaluate_cell(family: str, param: float, omega_c: float, model: str = "kinetic", **kwargs) -> CellResult:
    """Sudden-death time and birth count of one grid cell; failures become a status, not an exception."""
    try:
        trace, _ = concurrence_trace(family, param, omega_c, model, **kwargs)
        return CellResult.from_report(detect_esd(trace))
    except (ArithmeticError, ValueError) as exc:
        return CellResult(math.nan, 0, Status.NUMERIC_FAILURE, f"{type(exc).__name__}: {exc}")


def run_scan(config: ScanConfig, workers: int | None = None) -> ScanResult:
    """Evaluate every grid cell; cells are independent, so any execution order gives the same grid."""
    params, omegas = config.params, config.omegas
    shape = (len(params), len(omegas))
    t_esd = np.full(shape, np.nan)
    revivals = np.zeros(shape, dtype=int)
    status = np.empty(shape, dtype=object)
    messages = {}
    kwargs = dict(t_max=config.t_max, dt=config.dt, gamma=config.gamma, rabi=config.rabi,
                  nbar=config.nbar, epsilon=config.epsilon)

    def work(ij):
        i, j = ij
        return ij, evaluate_cell(config.family, float(params[i]), float(omegas[j]), config.model, **kwargs)

    cells = [(i, j) for i in range(shape[0]) for j in range(shape[1])]
    n_workers = thread_count() if workers is None else max(1, workers)
    if n_workers == 1:
        results = map(work, cells)
    else:
        pool = ThreadPoolExecutor(max_workers=n_workers)
        results = pool.map(work, cells)
    try:
        for (i, j), cell in results:
            t_esd[i, j] = cell.t_esd
            revivals[i, j] = cell.revivals
            status[i, j] = cell.status.value
            if cell.message:
                messages[(i, j)] = cell.message
    finally:
        if n_workers != 1:
            pool.shutdown()
    return ScanResult(config, t_esd, revivals, status, messages)


@dataclass(frozen=True)
class ModelComparison:
    times: np.ndarray
    rotating: np.ndarray
    secular: np.ndarray
    drift: dict = field(default_factory=dict)

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.rotating - self.secular)

    @property
    def sup_norm(self) -> float:
        return float(self.deviation.max())


def compare_models(spec, params: SystemParams, t_max: float, dt: float | None = None) -> ModelComparison:
    """Concurrence from the full rotating-frame equation against the secular closed form.

    The secular description needs resonant, equal driving with the Rabi
    frequency at least ten times the decay rate.
    """
    secular_generator(params)  # symmetric / resonant preconditions
    gamma = params.gamma1
    if params.rabi1 < SECULAR_MIN_RABI_RATIO * gamma:
        raise SecularPreconditionViolated(
            f"rabi = {params.rabi1!r} is not >> gamma = {gamma!r} (need at least {SECULAR_MIN_RABI_RATIO:g}x)")
    step = default_dt(params) if dt is None else dt
    traj = integrate(rotating_frame_generator(params), make_initial(spec).to_matrix(), t_max, step)
    rotating = concurrence(traj.states)
    secular = concurrence_x(closed_form(spec, gamma, params.omega_c, traj.times))
    drift = check_density_matrix(traj.states, traj.times)
    return ModelComparison(traj.times, np.asarray(rotating), np.asarray(secular), drift)


def bisect_parameter(predicate, lo: float, hi: float, tol: float = 1e-3) -> float:
    """Boundary between ``predicate(lo)`` and ``not predicate(lo)`` on ``[lo, hi]``.

    ``predicate`` must differ at the two ends.
    """
    at_lo = bool(predicate(lo))
    if bool(predicate(hi)) == at_lo:
        raise ValueError("predicate takes the same value at both ends of the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bool(predicate(mid)) == at_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


