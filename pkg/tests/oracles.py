"""Reference constructions that share no code with the package.

Everything is built from explicit 4x4 matrices, superoperators use
column-stacking (the package uses row-major), propagation uses the matrix
exponential, and concurrence uses the textbook non-Hermitian route.
"""
import numpy as np
from scipy.linalg import expm

# single qubit basis (|1>, |0>)
EXC = np.array([1.0, 0.0])
GND = np.array([0.0, 1.0])
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
LOWER = np.outer(GND, EXC).astype(complex)  # |0><1|
RAISE = LOWER.conj().T


def on(op, qubit):
    return np.kron(op, I2) if qubit == 1 else np.kron(I2, op)


def ket(label):
    """Two-qubit ket from a string like '10' (qubit 1 first, '1' = excited)."""
    single = {"1": EXC, "0": GND}
    return np.kron(single[label[0]], single[label[1]]).astype(complex)


SINGLET = (ket("10") - ket("01")) / np.sqrt(2)


def werner_matrix(f):
    p = np.outer(SINGLET, SINGLET.conj())
    return f * p + (1 - f) / 3 * (np.eye(4) - p)


def commutator_map(h):
    return lambda rho: -1j * (h @ rho - rho @ h)


def lindblad_map(op, rate):
    opd = op.conj().T

    def apply(rho):
        return rate * (op @ rho @ opd - 0.5 * (opd @ op @ rho + rho @ opd @ op))

    return apply


def sum_maps(*maps):
    return lambda rho: sum(m(rho) for m in maps)


def superop(mapping):
    """Column-stacking matrix of a linear map on 4x4 matrices."""
    cols = []
    for k in range(16):
        e = np.zeros(16, dtype=complex)
        e[k] = 1.0
        cols.append(mapping(e.reshape(4, 4, order="F")).reshape(16, order="F"))
    return np.array(cols).T


def h_rotating(rabi1=0.0, rabi2=0.0, det1=0.0, det2=0.0, omega_c=0.0):
    """Drive and detuning per qubit plus the flip-flop coupling (only the sum of the XX and YY strengths survives)."""
    h = 0.5 * det1 * on(SZ, 1) + 0.5 * det2 * on(SZ, 2)
    h = h + 0.5 * rabi1 * on(SX, 1) + 0.5 * rabi2 * on(SX, 2)
    return h + 0.5 * omega_c * (np.kron(SX, SX) + np.kron(SY, SY))


def rotating_map(gamma1, gamma2, rabi1=0.0, rabi2=0.0, det1=0.0, det2=0.0, omega_c=0.0):
    h = h_rotating(rabi1=rabi1, rabi2=rabi2, det1=det1, det2=det2, omega_c=omega_c)
    return sum_maps(commutator_map(h), lindblad_map(on(LOWER, 1), gamma1), lindblad_map(on(LOWER, 2), gamma2))


def thermal_map(gamma, omega_c, nbar1, nbar2):
    h = h_rotating(omega_c=omega_c)
    maps = [commutator_map(h)]
    for q, n in ((1, nbar1), (2, nbar2)):
        maps.append(lindblad_map(on(LOWER, q), gamma * (n + 1)))
        maps.append(lindblad_map(on(RAISE, q), gamma * n))
    return sum_maps(*maps)


def secular_by_averaging(gamma, omega_c, samples=64):
    """Average the drive-interaction-picture generator over one drive period.

    ``U(t) = exp(-i t sigma_x / 2)`` on each qubit (unit Rabi frequency); the
    trapezoid rule on ``samples`` equispaced points is exact for the
    trigonometric polynomials involved.
    """
    total = np.zeros((16, 16), dtype=complex)
    for k in range(samples):
        theta = 2 * np.pi * k / samples
        u1 = np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * SX
        u = np.kron(u1, u1)
        ud = u.conj().T
        h = ud @ h_rotating(omega_c=omega_c) @ u
        maps = [commutator_map(h)]
        for q in (1, 2):
            maps.append(lindblad_map(ud @ on(LOWER, q) @ u, gamma))
        total += superop(sum_maps(*maps))
    return total / samples


def propagate(sup, rho0, times):
    v0 = np.asarray(rho0, dtype=complex).reshape(16, order="F")
    return np.array([(expm(sup * t) @ v0).reshape(4, 4, order="F") for t in np.atleast_1d(times)])


def wootters(rho):
    """Concurrence from the eigenvalues of the non-Hermitian product rho (yy) rho* (yy)."""
    yy = np.kron(SY, SY)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.abs(np.sort(np.linalg.eigvals(r).real)[::-1]))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary2(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def x_entries(rho):
    """(a, b, c, d, z, w) read off a 4x4 matrix in the |11>,|10>,|01>,|00> basis."""
    return rho[0, 0].real, rho[1, 1].real, rho[2, 2].real, rho[3, 3].real, rho[1, 2], rho[0, 3]
