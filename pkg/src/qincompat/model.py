"""Parametrized statistical models: unitary encodings under depolarizing noise.

A model is a probe state, a set of traceless generators ``H_j``, a noise
channel and a working point ``theta``. Encoding produces

    rho_theta = Lambda(U_theta rho U_theta^dagger),  U_theta = exp(i sum_j theta_j H_j)

together with the exact parameter derivatives, obtained from the effective
generators rather than from finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matcore, numerics
from .errors import DegenerateModel, InvalidInput

NOISE_KINDS = ("none", "global-depolarizing", "local-depolarizing")


def density_matrix(rho) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return its Hermitian part."""
    rho = matcore.hermitian(rho, "density matrix")
    cfg = numerics.get()
    w = np.linalg.eigvalsh(rho)
    if w[0] < -cfg.psd_clamp * max(1.0, w[-1]):
        raise InvalidInput(f"density matrix is not positive semidefinite (lambda_min={w[0]:.3g})")
    if abs(np.trace(rho).real - 1) > cfg.trace_tol:
        raise InvalidInput(f"density matrix has trace {np.trace(rho).real:.12g}, expected 1")
    return rho.astype(complex)


def pure_state(psi) -> np.ndarray:
    """Projector onto the normalized vector ``psi``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if not np.isfinite(norm) or norm == 0:
        raise InvalidInput("state vector must be finite and nonzero")
    psi = psi / norm
    return np.outer(psi, psi.conj())


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def depolarizing_range(D: int) -> tuple[float, float]:
    """Admissible interval of the depolarizing parameter on dimension ``D``."""
    return -1.0 / (D * D - 1), 1.0


@dataclass(frozen=True)
class GeneratorSet:
    """Traceless Hermitian generators on a common Hilbert space."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(matcore.hermitian(H, f"generator {j}").astype(complex)
                     for j, H in enumerate(self.matrices))
        if not mats:
            raise InvalidInput("at least one generator is required")
        D = mats[0].shape[0]
        tol = numerics.get().trace_tol
        for j, H in enumerate(mats):
            if H.shape != (D, D):
                raise InvalidInput(f"generator {j} has shape {H.shape}, expected {(D, D)}")
            if abs(np.trace(H)) > tol:
                raise InvalidInput(f"generator {j} is not traceless (Tr = {np.trace(H):.3g})")
        if len(mats) > D * D - 1:
            raise InvalidInput(f"{len(mats)} parameters exceed D^2 - 1 = {D * D - 1}")
        object.__setattr__(self, "matrices", mats)

    @property
    def d(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, j):
        return self.matrices[j]


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    lam: float = 1.0
    site_dims: tuple = ()

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidInput(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not np.isfinite(self.lam):
            raise InvalidInput("noise parameter must be finite")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "site_dims", tuple(int(k) for k in self.site_dims))
        if self.kind == "local-depolarizing":
            if not self.site_dims or any(k != 2 for k in self.site_dims):
                raise InvalidInput("local depolarizing noise is only defined on qubit sites")
            lo, hi = depolarizing_range(2)
            if not lo <= self.lam <= hi:
                raise InvalidInput(f"lambda={self.lam} outside the qubit range [{lo:.6g}, {hi}]")

    @classmethod
    def global_(cls, lam):
        return cls("global-depolarizing", lam)

    @classmethod
    def local(cls, lam, n_qubits):
        return cls("local-depolarizing", lam, (2,) * n_qubits)

    def check_dim(self, D: int) -> None:
        if self.kind == "global-depolarizing":
            lo, hi = depolarizing_range(D)
            if not lo <= self.lam <= hi:
                raise InvalidInput(f"lambda={self.lam} outside [{lo:.6g}, {hi}] for D={D}")
        elif self.kind == "local-depolarizing" and int(np.prod(self.site_dims)) != D:
            raise InvalidInput(f"site dims {self.site_dims} do not multiply to D={D}")

    def apply(self, rho) -> np.ndarray:
        if self.kind == "global-depolarizing":
            return apply_depolarizing(rho, self.lam)
        if self.kind == "local-depolarizing":
            return apply_local_depolarizing(rho, self.lam, self.site_dims)
        return np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class StatisticalModel:
    probe: np.ndarray
    generators: GeneratorSet
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    theta: np.ndarray = None

    def __post_init__(self):
        probe = density_matrix(self.probe)
        if not isinstance(self.generators, GeneratorSet):
            object.__setattr__(self, "generators", GeneratorSet(tuple(self.generators)))
        g = self.generators
        if probe.shape[0] != g.dim:
            raise InvalidInput(f"probe dimension {probe.shape[0]} != generator dimension {g.dim}")
        theta = np.zeros(g.d) if self.theta is None else np.asarray(self.theta, dtype=float).ravel()
        if theta.shape != (g.d,) or not np.all(np.isfinite(theta)):
            raise InvalidInput(f"theta must be a finite vector of length {g.d}")
        self.noise.check_dim(g.dim)
        object.__setattr__(self, "probe", probe)
        object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return self.generators.dim

    @property
    def d(self) -> int:
        return self.generators.d

    def with_theta(self, theta) -> "StatisticalModel":
        return StatisticalModel(self.probe, self.generators, self.noise, theta)

    def with_noise(self, noise: NoiseSpec) -> "StatisticalModel":
        return StatisticalModel(self.probe, self.generators, noise, self.theta)


@dataclass(frozen=True)
class EncodedModel:
    """Encoded state, its parameter derivatives and the effective generators."""

    rho: np.ndarray
    drho: tuple
    effective_generators: tuple = ()

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def d(self) -> int:
        return len(self.drho)


def build_unitary(g: GeneratorSet, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape != (len(g),):
        raise InvalidInput(f"theta has length {theta.size}, expected {len(g)}")
    return matcore.expm_i(_combine(g, theta))


def _combine(g, theta):
    H = np.zeros((g.dim, g.dim), dtype=complex)
    for t, Hj in zip(theta, g):
        H += t * Hj
    return H


def apply_depolarizing(rho, lam: float) -> np.ndarray:
    """``lam * rho + (1 - lam) * I / D``."""
    rho = np.asarray(rho, dtype=complex)
    D = rho.shape[0]
    lo, hi = depolarizing_range(D)
    if not lo - 1e-15 <= lam <= hi + 1e-15:
        raise InvalidInput(f"lambda={lam} outside [{lo:.6g}, {hi}] for D={D}")
    return lam * rho + (1 - lam) * np.eye(D) / D


def apply_local_depolarizing(rho, lam: float, site_dims: Sequence[int]) -> np.ndarray:
    """Qubit depolarizing channel with parameter ``lam`` applied to every site."""
    site_dims = [int(k) for k in site_dims]
    if any(k != 2 for k in site_dims):
        raise InvalidInput("local depolarizing noise is only defined on qubit sites")
    if not -1 / 3 - 1e-15 <= lam <= 1 + 1e-15:
        raise InvalidInput(f"lambda={lam} outside [-1/3, 1]")
    out = np.asarray(rho, dtype=complex)
    paulis = (matcore.PAULI_I, matcore.PAULI_X, matcore.PAULI_Y, matcore.PAULI_Z)
    for site in range(len(site_dims)):
        # Pauli twirl on one site: (I/2) x Tr_site(X) = 1/4 sum_P P X P
        ops = [matcore.embed(P, site_dims, site) for P in paulis]
        mixed = sum(P @ out @ P for P in ops) / 4
        out = lam * out + (1 - lam) * mixed
    return out


def effective_generators(g: GeneratorSet, theta) -> list[np.ndarray]:
    """Generators ``H_j^eff`` with ``d U_theta / d theta_j = U_theta (i H_j^eff)``."""
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape != (len(g),):
        raise InvalidInput(f"theta has length {theta.size}, expected {len(g)}")
    H = _combine(g, theta)
    return [matcore.averaged_conjugation(H, Hj) for Hj in g]


def encode(model: StatisticalModel) -> EncodedModel:
    """Encoded state and its exact derivatives.

    The channel acts after the unitary, ``rho_theta = Lambda(U rho U^dagger)``;
    by linearity ``d_j rho_theta = Lambda(i U [H_j^eff, rho] U^dagger)``.
    """
    U = build_unitary(model.generators, model.theta)
    heff = effective_generators(model.generators, model.theta)
    rho = model.probe
    noise = model.noise
    rho_theta = noise.apply(U @ rho @ U.conj().T)
    drho = []
    for Hj in heff:
        dpure = 1j * U @ (Hj @ rho - rho @ Hj) @ U.conj().T
        # Lambda is affine; its linear part drops the (1 - lam) I/D term on traceless input
        if noise.kind == "global-depolarizing":
            dj = noise.lam * dpure
        elif noise.kind == "local-depolarizing":
            dj = _local_linear(dpure, noise.lam, noise.site_dims)
        else:
            dj = dpure
        drho.append((dj + dj.conj().T) / 2)
    rho_theta = (rho_theta + rho_theta.conj().T) / 2
    return EncodedModel(rho_theta, tuple(drho), tuple(heff))


def _local_linear(X, lam, site_dims):
    # the local channel acting on a traceless operator (no trace normalization involved)
    return apply_local_depolarizing(X, lam, site_dims)


def reparametrize(enc: EncodedModel, J) -> EncodedModel:
    """Change of parameters with Jacobian ``J[k, j] = d theta_k / d eta_j``."""
    J = np.asarray(J, dtype=float)
    if J.shape != (enc.d, enc.d):
        raise InvalidInput(f"Jacobian must be {enc.d}x{enc.d}")
    drho = tuple(sum(J[k, j] * enc.drho[k] for k in range(enc.d)) for j in range(enc.d))
    heff = ()
    if enc.effective_generators:
        heff = tuple(sum(J[k, j] * enc.effective_generators[k] for k in range(enc.d))
                     for j in range(enc.d))
    return EncodedModel(enc.rho, drho, heff)


def lift_local_generators(local: GeneratorSet, n_sites: int) -> GeneratorSet:
    """``sum_s I x .. x H_j x .. x I`` so that the lifted unitary is ``U^{x n}``."""
    if n_sites < 1:
        raise InvalidInput("n_sites must be at least 1")
    dims = [local.dim] * n_sites
    return GeneratorSet(tuple(sum(matcore.embed(H, dims, s) for s in range(n_sites))
                              for H in local))


def pauli_coordinates(H) -> np.ndarray:
    """Real coordinates ``(a_x, a_y, a_z)`` of a traceless qubit operator."""
    return np.real([np.trace(H @ P) / 2 for P in (matcore.PAULI_X, matcore.PAULI_Y, matcore.PAULI_Z)])


def orthonormalize_generators_qubit(g: GeneratorSet, theta):
    """Anticommuting, unit-norm effective generators for a two-phase qubit model.

    Returns the new generators and the Jacobian ``J`` with ``dtheta' = J dtheta``.
    The generators are normalized to unit Pauli vectors, so that a rotation
    maps them onto ``sigma_y`` and ``sigma_z``.
    """
    if g.dim != 2 or g.d != 2:
        raise InvalidInput("orthonormalization is defined for two qubit generators")
    H1, H2 = effective_generators(g, theta)
    a, b = pauli_coordinates(H1), pauli_coordinates(H2)
    na2 = float(a @ a)
    if na2 <= 1e-24:
        raise DegenerateModel("first effective generator vanishes")
    x = float(a @ b) / na2
    H2_perp = H2 - x * H1
    n1 = np.sqrt(na2)
    n2 = np.linalg.norm(pauli_coordinates(H2_perp))
    if n2 <= 1e-12 * max(1.0, n1):
        raise DegenerateModel("effective generators are parallel")
    J = np.array([[n1, n1 * x], [0.0, n2]])
    return GeneratorSet((H1 / n1, H2_perp / n2)), J
