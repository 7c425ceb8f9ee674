"""Shared models and random generators for the test suite."""
import numpy as np

from qincompat.model import GeneratorSet, NoiseSpec, StatisticalModel, lift_local_generators, pure_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

QUTRIT_H1 = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]])
QUTRIT_H2 = np.diag([1.0, -1.0, 0.0]).astype(complex)
QUTRIT_PROBE = np.array([1, -1, 0]) / np.sqrt(2)


def qubit_gens():
    return GeneratorSet((SY, SZ))


def bloch_state(r):
    return (I2 + r[0] * SX + r[1] * SY + r[2] * SZ) / 2


def qutrit_model(lam=1.0, theta=None):
    noise = NoiseSpec() if lam == 1.0 else NoiseSpec.global_(lam)
    return StatisticalModel(pure_state(QUTRIT_PROBE), GeneratorSet((QUTRIT_H1, QUTRIT_H2)), noise,
                            theta)


def three_qubit_probe():
    k0, k1 = np.array([1, 0]), np.array([0, 1])
    phi_p = np.array([1, 1j]) / np.sqrt(2)
    phi_m = np.array([1, -1j]) / np.sqrt(2)

    def triple(v):
        return np.kron(np.kron(v, v), v)

    psi_z = (triple(k0) + triple(k1)) / np.sqrt(2)
    psi_y = (triple(phi_p) + triple(phi_m)) / np.sqrt(2)
    psi = psi_z + psi_y
    return psi / np.linalg.norm(psi)


def three_qubit_model(lam):
    return StatisticalModel(pure_state(three_qubit_probe()), lift_local_generators(qubit_gens(), 3),
                            NoiseSpec.local(lam, 3))


def random_hermitian(D, rng, traceless=False):
    M = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    H = (M + M.conj().T) / 2
    if traceless:
        H -= np.trace(H) / D * np.eye(D)
    return H


def random_psd(n, rng, rank=None):
    M = rng.normal(size=(n, rank or n))
    return M @ M.T


def random_pure(D, rng):
    v = rng.normal(size=D) + 1j * rng.normal(size=D)
    return v / np.linalg.norm(v)


def random_state(D, rng, rank=None):
    M = rng.normal(size=(D, rank or D)) + 1j * rng.normal(size=(D, rank or D))
    rho = M @ M.conj().T
    return rho / np.trace(rho).real


def random_unitary(D, rng):
    Q, R = np.linalg.qr(rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_qubit_model(rng):
    """Probe purity in [0.5, 1], theta in [-1, 1]^2, global noise in [-1/3, 1] without 0."""
    purity = rng.uniform(0.5, 1.0)
    n = rng.normal(size=3)
    r = np.sqrt(2 * purity - 1) * n / np.linalg.norm(n)
    lam = 0.0
    while abs(lam) < 1e-3:
        lam = rng.uniform(-1 / 3, 1)
    theta = rng.uniform(-1, 1, size=2)
    gens = GeneratorSet((random_hermitian(2, rng, True), random_hermitian(2, rng, True)))
    return StatisticalModel(bloch_state(r), gens, NoiseSpec.global_(lam), theta), purity, lam


def random_model(D, d, rng, mixed=True):
    """Random generators, a full-rank or pure probe and mild global noise."""
    gens = GeneratorSet(tuple(random_hermitian(D, rng, True) for _ in range(d)))
    probe = random_state(D, rng) if mixed else pure_state(random_pure(D, rng))
    lam = rng.uniform(0.3, 0.9)
    return StatisticalModel(probe, gens, NoiseSpec.global_(lam), rng.uniform(-1, 1, size=d))
