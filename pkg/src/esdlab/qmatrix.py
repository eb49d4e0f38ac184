"""Dense 2x2 / 4x4 complex matrix helpers for two-qubit problems.

Basis order for two qubits is |11>, |10>, |01>, |00>, with the first label
belonging to qubit 1 and "1" meaning the excited state.  Every function
accepts stacks of matrices with arbitrary leading dimensions.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "NotHermitian",
    "NotPositive",
    "PAULI",
    "IDENTITY2",
    "IDENTITY4",
    "tensor",
    "embed_pauli",
    "dagger",
    "commutator",
    "hermiticity_error",
    "jacobi_eigh",
    "herm_eigvals",
    "psd_sqrt",
]

HERMITIAN_TOL = 1e-10
POSITIVE_TOL = 1e-9
_OFFDIAG_TOL = 1e-14
_MAX_SWEEPS = 60


class NotHermitian(ValueError):
    """Input matrix deviates from its adjoint beyond tolerance."""


class NotPositive(ValueError):
    """Input matrix has an eigenvalue below the positivity tolerance."""


IDENTITY2 = np.eye(2, dtype=complex)
IDENTITY4 = np.eye(4, dtype=complex)

# single-qubit operators in the (|1>, |0>) basis; sigma^+ |0> = |1>
PAULI = {
    "i": IDENTITY2,
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
}
for _m in PAULI.values():
    _m.setflags(write=False)


def tensor(a, b) -> np.ndarray:
    """Kronecker product with ``a`` acting on qubit 1 (the slow index)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.kron(a, b)


def embed_pauli(axis: str, qubit: int) -> np.ndarray:
    """Single-qubit operator ``axis`` on ``qubit`` (1 or 2), identity on the other.

    ``axis`` is one of ``x, y, z, plus, minus``.
    """
    if axis not in PAULI or axis == "i":
        raise ValueError(f"unknown axis {axis!r}")
    if qubit == 1:
        return tensor(PAULI[axis], IDENTITY2)
    if qubit == 2:
        return tensor(IDENTITY2, PAULI[axis])
    raise ValueError(f"qubit must be 1 or 2, got {qubit!r}")


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_error(m: np.ndarray) -> np.ndarray:
    """Largest entry of ``|M - M^dagger|`` per matrix."""
    return np.max(np.abs(m - dagger(m)), axis=(-2, -1))


def _check_hermitian(m: np.ndarray) -> None:
    err = hermiticity_error(m)
    if np.any(err > HERMITIAN_TOL):
        raise NotHermitian(f"max |M - M^dagger| = {float(np.max(err)):.3e} exceeds {HERMITIAN_TOL:g}")


def jacobi_eigh(m, *, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of Hermitian matrices by cyclic complex Jacobi rotations.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Hermitian matrix or stack of matrices.
    check : bool
        Raise :class:`NotHermitian` if ``m`` is not Hermitian within 1e-10.

    Returns
    -------
    values : ndarray, shape (..., n)
        Real eigenvalues in descending order.
    vectors : ndarray, shape (..., n, n)
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = np.array(m, dtype=complex)
    if a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if check:
        _check_hermitian(a)
    n = a.shape[-1]
    batch = a.shape[:-2]
    # work with the batch on the trailing axis so a[i, j] is one contiguous vector
    a = np.moveaxis(0.5 * (a + dagger(a)), (-2, -1), (0, 1)).reshape(n, n, -1).copy()
    v = np.zeros_like(a)
    for i in range(n):
        v[i, i] = 1.0
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(0, 1))))
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(sum(2.0 * np.abs(a[p, q]) ** 2 for p, q in pairs))
        if np.all(off < _OFFDIAG_TOL * scale):
            break
        for p, q in pairs:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > 1e-300
            safe = np.where(active, mag, 1.0)
            phase = np.where(active, apq / safe, 1.0)
            tau = (a[q, q].real - a[p, p].real) / (2.0 * safe)
            sgn = np.where(tau >= 0.0, 1.0, -1.0)
            t = np.where(active, sgn / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # rotation G = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on (p, q); A <- G^dagger A G
            gpq = s * phase
            gqp = -np.conj(gpq)
            colp = a[:, p].copy()
            a[:, p] = colp * c + a[:, q] * gqp
            a[:, q] = colp * gpq + a[:, q] * c
            rowp = a[p, :].copy()
            a[p, :] = rowp * c + a[q, :] * np.conj(gqp)
            a[q, :] = rowp * np.conj(gpq) + a[q, :] * c
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp = v[:, p].copy()
            v[:, p] = vp * c + v[:, q] * gqp
            v[:, q] = vp * gpq + v[:, q] * c
    else:  # pragma: no cover - 4x4 converges in a handful of sweeps
        raise RuntimeError("Jacobi iteration did not converge")

    a = np.moveaxis(a.reshape((n, n) + batch), (0, 1), (-2, -1))
    v = np.moveaxis(v.reshape((n, n) + batch), (0, 1), (-2, -1))
    w = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def herm_eigvals(m, *, check: bool = True) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix (or stack), descending."""
    return jacobi_eigh(m, check=check)[0]


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-9, 0)`` are clamped to zero; anything more negative
    raises :class:`NotPositive`.
    """
    w, v = jacobi_eigh(m)
    if np.any(w < -POSITIVE_TOL):
        raise NotPositive(f"min eigenvalue {float(np.min(w)):.3e} below {-POSITIVE_TOL:g}")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root[..., None, :]) @ dagger(v)
