"""X-shaped two-qubit states: representation, kinetic equations and closed-form solutions.

An X state has non-zero entries only on the diagonal and anti-diagonal::

    | a  0  0  w |
    | 0  b  z  0 |
    | 0  z* c  0 |
    | w* 0  0  d |

in the basis |11>, |10>, |01>, |00>.  Under the secular master equation this
shape is preserved and the six entries obey a closed linear system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import ClassVar, Union

import numpy as np

from .dynamics import InvariantViolated, STABILITY_BOUND, StepTooLarge, _n_steps, propagate_linear

__all__ = [
    "ParameterOutOfRange",
    "XState",
    "XTrajectory",
    "Werner",
    "YE",
    "EgGe",
    "EeGg",
    "FamilySpec",
    "FAMILIES",
    "family_from_name",
    "make_initial",
    "random_xstate",
    "kinetic_rhs",
    "kinetic_matrix",
    "evolve_kinetic",
    "even_hyperbolic",
    "werner_solution",
    "ye_solution",
    "egge_solution",
    "eegg_solution",
    "closed_form",
]

POPULATION_TOL = 1e-9


class ParameterOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class XState:
    """Entries of an X-form density matrix; fields may be scalars or equal-shape arrays."""

    a: float
    b: float
    c: float
    d: float
    z: complex
    w: complex

    def to_matrix(self) -> np.ndarray:
        a, b, c, d, z, w = np.broadcast_arrays(*(np.asarray(v) for v in self.astuple()))
        rho = np.zeros(a.shape + (4, 4), dtype=complex)
        rho[..., 0, 0] = a
        rho[..., 1, 1] = b
        rho[..., 2, 2] = c
        rho[..., 3, 3] = d
        rho[..., 1, 2] = z
        rho[..., 2, 1] = np.conj(z)
        rho[..., 0, 3] = w
        rho[..., 3, 0] = np.conj(w)
        return rho

    @classmethod
    def from_matrix(cls, rho) -> "XState":
        """Read the X entries of ``rho``; anything off the X pattern is ignored."""
        rho = np.asarray(rho, dtype=complex)
        return cls(
            rho[..., 0, 0].real, rho[..., 1, 1].real, rho[..., 2, 2].real, rho[..., 3, 3].real,
            rho[..., 1, 2], rho[..., 0, 3],
        )

    def astuple(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    def to_real(self) -> np.ndarray:
        """Stack as ``[a, b, c, d, Re z, Im z, Re w, Im w]`` along the last axis."""
        z = np.asarray(self.z)
        w = np.asarray(self.w)
        parts = [self.a, self.b, self.c, self.d, z.real, z.imag, w.real, w.imag]
        return np.stack(np.broadcast_arrays(*(np.asarray(p, dtype=float) for p in parts)), axis=-1)

    @classmethod
    def from_real(cls, v) -> "XState":
        v = np.asarray(v, dtype=float)
        return cls(v[..., 0], v[..., 1], v[..., 2], v[..., 3], v[..., 4] + 1j * v[..., 5], v[..., 6] + 1j * v[..., 7])

    def __getitem__(self, idx) -> "XState":
        return XState(*(np.asarray(v)[idx] for v in self.astuple()))

    def __len__(self):
        return len(np.asarray(self.a))

    @property
    def population(self):
        return self.a + self.b + self.c + self.d

    def invariant_errors(self) -> dict[str, float]:
        """Worst violation of normalisation, non-negativity and the two positivity bounds."""
        a, b, c, d = (np.asarray(v, dtype=float) for v in (self.a, self.b, self.c, self.d))
        return {
            "population": float(np.max(np.abs(a + b + c + d - 1.0))),
            "negative": float(np.max(-np.minimum.reduce([a, b, c, d]))),
            "outer": float(np.max(np.abs(self.w) ** 2 - a * d)),
            "inner": float(np.max(np.abs(self.z) ** 2 - b * c)),
        }

    def is_valid(self, tol: float = POPULATION_TOL) -> bool:
        err = self.invariant_errors()
        return err["population"] <= tol and max(err["negative"], err["outer"], err["inner"]) <= tol


@dataclass(frozen=True)
class XTrajectory:
    times: np.ndarray
    states: XState
    dt: float
    gamma: float
    omega_c: float

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        for i, t in enumerate(self.times):
            yield t, self.states[i]


# --- initial-state families ------------------------------------------------


@dataclass(frozen=True)
class _Family:
    kind: ClassVar[str] = ""
    param_name: ClassVar[str] = ""
    bounds: ClassVar[tuple[float, float]] = (0.0, 1.0)
    description: ClassVar[str] = ""

    def __post_init__(self):
        lo, hi = self.bounds
        value = self.param
        if not (lo <= value <= hi):
            raise ParameterOutOfRange(f"{self.kind}: {self.param_name} must lie in [{lo:g}, {hi:g}], got {value!r}")

    @property
    def param(self) -> float:
        return getattr(self, self.param_name)


@dataclass(frozen=True)
class Werner(_Family):
    f: float
    kind: ClassVar[str] = "werner"
    param_name: ClassVar[str] = "f"
    bounds: ClassVar[tuple[float, float]] = (0.25, 1.0)
    description: ClassVar[str] = "singlet mixed with white noise; f is the singlet fidelity"


@dataclass(frozen=True)
class YE(_Family):
    alpha: float
    kind: ClassVar[str] = "ye"
    param_name: ClassVar[str] = "alpha"
    description: ClassVar[str] = "Yu-Eberly state; alpha/3 on |11>, (1-alpha)/3 on |00>, |Psi+> block of weight 2/3"


@dataclass(frozen=True)
class EgGe(_Family):
    p: float
    kind: ClassVar[str] = "egge"
    param_name: ClassVar[str] = "p"
    description: ClassVar[str] = "one excitation: (1-p)|10><10| + p|01><01|"


@dataclass(frozen=True)
class EeGg(_Family):
    s: float
    kind: ClassVar[str] = "eegg"
    param_name: ClassVar[str] = "s"
    description: ClassVar[str] = "zero or two excitations: s|11><11| + (1-s)|00><00|"


FamilySpec = Union[Werner, YE, EgGe, EeGg]
FAMILIES: dict[str, type] = {cls.kind: cls for cls in (Werner, YE, EgGe, EeGg)}


def family_from_name(kind: str, param: float) -> FamilySpec:
    try:
        cls = FAMILIES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown family {kind!r}; expected one of {sorted(FAMILIES)}") from None
    return cls(float(param))


def make_initial(spec: FamilySpec) -> XState:
    """Initial X state of a family member."""
    if isinstance(spec, Werner):
        f = spec.f
        return XState((1 - f) / 3, (1 + 2 * f) / 6, (1 + 2 * f) / 6, (1 - f) / 3, (1 - 4 * f) / 6 + 0j, 0j)
    if isinstance(spec, YE):
        al = spec.alpha
        # doubly excited population alpha/3 (sudden death for alpha > 1/3 under pure damping)
        return XState(al / 3, 1 / 3, 1 / 3, (1 - al) / 3, 1 / 3 + 0j, 0j)
    if isinstance(spec, EgGe):
        return XState(0.0, 1 - spec.p, spec.p, 0.0, 0j, 0j)
    if isinstance(spec, EeGg):
        return XState(spec.s, 0.0, 0.0, 1 - spec.s, 0j, 0j)
    raise TypeError(f"not a family spec: {spec!r}")


def random_xstate(rng: np.random.Generator, size=None) -> XState:
    """Uniformly weighted populations with coherences anywhere inside the positivity disc."""
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    pops = rng.dirichlet(np.ones(4), size=shape if shape else None)
    a, b, c, d = np.moveaxis(np.asarray(pops), -1, 0)
    rw, rz = rng.uniform(size=(2,) + shape)
    pw, pz = rng.uniform(0.0, 2 * np.pi, size=(2,) + shape)
    w = rw * np.sqrt(a * d) * np.exp(1j * pw)
    z = rz * np.sqrt(b * c) * np.exp(1j * pz)
    return XState(a, b, c, d, z, w)


# --- kinetic equations -----------------------------------------------------


def kinetic_rhs(x: XState, gamma: float, omega_c: float) -> XState:
    """Time derivative of the X entries under the secular master equation.

    The single-excitation block couples through ``3 omega_c / 4`` (both in
    ``b, c`` and in ``z``); the |11>,|00> block through ``omega_c / 4``.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma!r}")
    a, b, c, d, z, w = x.astuple()
    g, k = gamma, omega_c
    two_im_w = 1j * (w - np.conj(w))  # = -2 Im w
    two_im_z = 1j * (z - np.conj(z))
    da = 3 / 8 * g * (b + c - 2 * a) + k / 4 * two_im_w
    db = 3 / 8 * g * (a - 2 * b + d) + 3 * k / 4 * two_im_z
    dc = 3 / 8 * g * (a - 2 * c + d) - 3 * k / 4 * two_im_z
    dd = 3 / 8 * g * (b + c - 2 * d) - k / 4 * two_im_w
    dz = g / 8 * (w + np.conj(w) - 10 * z) + 3j * k / 4 * (b - c)
    dw = g / 8 * (z + np.conj(z) - 10 * w) + 1j * k / 4 * (a - d)
    return XState(np.real(da), np.real(db), np.real(dc), np.real(dd), dz, dw)


def kinetic_matrix(gamma: float, omega_c: float, rhs=kinetic_rhs) -> np.ndarray:
    """8x8 real matrix of ``rhs`` acting on ``XState.to_real`` coordinates."""
    basis = np.eye(8)
    cols = [rhs(XState.from_real(e), gamma, omega_c).to_real() for e in basis]
    return np.array(cols).T


def _as_state(state_or_spec) -> XState:
    if isinstance(state_or_spec, XState):
        return state_or_spec
    return make_initial(state_or_spec)


def evolve_kinetic(state_or_spec, gamma: float, omega_c: float, t_max: float,
                   dt: float | None = None, *, rhs=kinetic_rhs, check: bool = True) -> XTrajectory:
    """RK4 integration of the kinetic equations on the 8 real X coordinates.

    ``dt`` defaults to ``min(1e-3/gamma, 0.01/omega_c)``.
    """
    x0 = _as_state(state_or_spec)
    if dt is None:
        dt = min(1e-3 / gamma if gamma > 0 else 1e-3, 0.01 / abs(omega_c) if omega_c else 1.0)
    n = _n_steps(t_max, dt)
    m = kinetic_matrix(gamma, omega_c, rhs)
    norm = float(np.linalg.norm(m, 2))
    if dt * norm >= STABILITY_BOUND:
        raise StepTooLarge(f"dt * ||kinetic matrix|| = {dt * norm:.3g} must stay below {STABILITY_BOUND}")
    ys = propagate_linear(m, x0.to_real(), dt, n)
    times = dt * np.arange(n + 1)
    states = XState.from_real(ys)
    if check:
        drift = np.abs(states.population - float(x0.population))
        if np.any(drift >= 1e-10):
            bad = int(np.argmax(drift >= 1e-10))
            raise InvariantViolated(f"population drift {drift[bad]:.3e}", float(times[bad]))
        _check_positive(states, times)
    return XTrajectory(times, states, dt, gamma, omega_c)


def _check_positive(states: XState, times) -> None:
    a, b, c, d = (np.asarray(v) for v in (states.a, states.b, states.c, states.d))
    bad = (np.minimum.reduce([a, b, c, d]) < -POPULATION_TOL) \
        | (np.abs(states.w) ** 2 > a * d + POPULATION_TOL) \
        | (np.abs(states.z) ** 2 > b * c + POPULATION_TOL)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise InvariantViolated("X state lost positivity", float(times[i]))


# --- closed forms ----------------------------------------------------------


def even_hyperbolic(kappa_sq: float, x):
    """``(cosh(k x), sinh(k x) / k)`` with ``k = sqrt(kappa_sq)``, real for either sign of ``kappa_sq``.

    Both outputs are even in ``k``, so no square-root branch is ever chosen.
    """
    x = np.asarray(x, dtype=float)
    if kappa_sq > 0.0:
        k = math.sqrt(kappa_sq)
        return np.cosh(k * x), np.sinh(k * x) / k
    if kappa_sq < 0.0:
        k = math.sqrt(-kappa_sq)
        return np.cos(k * x), np.sin(k * x) / k
    return np.ones_like(x), x.copy()


def _eta(gamma, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    return np.exp(-0.5 * gamma * t)


def _mode(kappa_sq, gamma, t):
    cosh_, sinh_ = even_hyperbolic(kappa_sq, np.asarray(t, dtype=float) / 4.0)
    return cosh_ + gamma * sinh_, sinh_


def werner_solution(f: float, gamma: float, t) -> XState:
    Werner(f)
    eta = _eta(gamma, t)
    r = 4 * f - 1
    pop_ad = (3 - r * eta**3) / 12
    pop_bc = (3 + r * eta**3) / 12
    # coherences carry the singlet sign: z(0) = (1 - 4f)/6
    z = -r / 12 * eta**2 * (1 + eta) + 0j
    w = -r / 12 * eta**2 * (1 - eta) + 0j
    return XState(pop_ad, pop_bc, pop_bc.copy(), pop_ad.copy(), z, w)


def ye_solution(alpha: float, gamma: float, omega_c: float, t) -> XState:
    YE(alpha)
    eta = _eta(gamma, t)
    mode, sinh_ = _mode(gamma**2 - 4 * omega_c**2, gamma, t)
    u = 2 * alpha - 1
    a = (3 - eta**3 + 2 * u * mode * eta**2) / 12
    d = (3 - eta**3 - 2 * u * mode * eta**2) / 12
    bc = (3 + eta**3) / 12
    z = eta**2 * (1 + eta) / 6 + 0j
    w = (1j * u * omega_c * sinh_ + 0.5 * (1 - eta)) * eta**2 / 3
    return XState(a, bc, bc.copy(), d, z, w)


def egge_solution(p: float, gamma: float, omega_c: float, t) -> XState:
    EgGe(p)
    eta = _eta(gamma, t)
    mode, sinh_ = _mode(gamma**2 - 36 * omega_c**2, gamma, t)
    u = 1 - 2 * p  # b(0) - c(0)
    ad = (1 - eta**3) / 4
    b = (1 + eta**3 + 2 * u * mode * eta**2) / 4
    c = (1 + eta**3 - 2 * u * mode * eta**2) / 4
    z = 3j * omega_c * u * sinh_ * eta**2
    return XState(ad, b, c, ad.copy(), z, np.zeros_like(z))


def eegg_solution(s: float, gamma: float, omega_c: float, t) -> XState:
    EeGg(s)
    eta = _eta(gamma, t)
    # the |11>,|00> block rotates at omega_c/4, hence gamma^2 - 4 omega_c^2 here
    mode, sinh_ = _mode(gamma**2 - 4 * omega_c**2, gamma, t)
    u = 2 * s - 1  # a(0) - d(0)
    bc = (1 - eta**3) / 4
    a = (1 + eta**3 + 2 * u * mode * eta**2) / 4
    d = (1 + eta**3 - 2 * u * mode * eta**2) / 4
    w = 1j * u * omega_c * sinh_ * eta**2
    return XState(a, bc, bc.copy(), d, np.zeros_like(w), w)


def closed_form(spec: FamilySpec, gamma: float, omega_c: float, t) -> XState:
    """Dispatch to the family's analytic solution."""
    if isinstance(spec, Werner):
        return werner_solution(spec.f, gamma, t)
    if isinstance(spec, YE):
        return ye_solution(spec.alpha, gamma, omega_c, t)
    if isinstance(spec, EgGe):
        return egge_solution(spec.p, gamma, omega_c, t)
    if isinstance(spec, EeGg):
        return eegg_solution(spec.s, gamma, omega_c, t)
    raise TypeError(f"not a family spec: {spec!r}")
