"""Dense complex-matrix kernel.

Thin, validated wrappers around numpy/LAPACK for the handful of matrix
functions the estimation code needs: Hermitian eigendecompositions,
spectral powers, trace norms, unitary exponentials and the averaged
conjugation that turns a fixed generator into an effective one.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import numerics
from .errors import InvalidInput, SingularMatrix

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(M, name="matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.size == 0:
        raise InvalidInput(f"{name} must be a non-empty 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInput(f"{name} has non-finite entries")
    return M


def hermitian(M, name="matrix") -> np.ndarray:
    """Return ``(M + M^dagger) / 2`` after checking ``M`` is square and near-Hermitian."""
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {M.shape}")
    asym = np.max(np.abs(M - M.conj().T))
    if asym > numerics.get().herm_error:
        raise InvalidInput(f"{name} is not Hermitian (max asymmetry {asym:.3g})")
    return (M + M.conj().T) / 2


def eig_hermitian(M) -> EigenDecomposition:
    """Eigenvalues in ascending order with a unitary matrix of eigenvectors."""
    w, v = np.linalg.eigh(hermitian(M))
    return EigenDecomposition(w, v)


def psd_power(M, p: float) -> np.ndarray:
    """Spectral power ``V diag(w**p) V^dagger`` of a positive semidefinite matrix.

    Slightly negative eigenvalues (down to ``-psd_clamp * ||M||``) are clamped
    to zero. Negative powers require a strictly positive spectrum.
    """
    cfg = numerics.get()
    w, v = eig_hermitian(M)
    scale = max(np.max(np.abs(w)), 1.0)
    if w[0] < -cfg.psd_clamp * scale:
        raise InvalidInput(f"matrix is not positive semidefinite (lambda_min={w[0]:.3g})")
    if p < 0:
        if w[0] <= len(w) * cfg.psd_clamp * scale:
            raise SingularMatrix(f"cannot raise a singular matrix to the power {p}")
        wp = w**p
    elif p == 0:
        wp = np.ones_like(w)
    else:
        wp = np.clip(w, 0.0, None) ** p
    out = (v * wp) @ v.conj().T
    if np.isrealobj(M):
        out = out.real
    return (out + out.conj().T) / 2


def operator_norm(M) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_matrix(M), 2))


def trace_abs(G, R) -> float:
    """``Tr|sqrt(G) R sqrt(G)|`` for ``G >= 0``.

    Computed as a nuclear norm, so ``R`` may be Hermitian or (as for the
    commutator matrix) real antisymmetric.
    """
    G = hermitian(G, "G")
    R = as_matrix(R, "R")
    if R.shape != G.shape:
        raise InvalidInput(f"shape mismatch {G.shape} vs {R.shape}")
    w, v = eig_hermitian(G)
    scale = max(np.max(np.abs(w)), 1e-300)
    if w[0] < -numerics.get().psd_clamp * max(scale, 1.0):
        raise InvalidInput(f"G is not positive semidefinite (lambda_min={w[0]:.3g})")
    # eigenvalues at roundoff level would enter as their square roots
    keep = w > 8 * len(w) * np.finfo(float).eps * scale
    B = v[:, keep] * np.sqrt(w[keep])
    return float(np.sum(np.linalg.svd(B.conj().T @ R @ B, compute_uv=False)))


def expm_i(H) -> np.ndarray:
    """Unitary ``exp(i H)`` for Hermitian ``H``."""
    w, v = eig_hermitian(H)
    return (v * np.exp(1j * w)) @ v.conj().T


def phi(z):
    """``(e^z - 1) / z`` with ``phi(0) = 1``, vectorized."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < numerics.get().phi_taylor
    safe = np.where(small, 1.0, z)
    series = 1 + z / 2 + z**2 / 6 + z**3 / 24
    return np.where(small, series, np.expm1(safe) / safe)


def averaged_conjugation(H, K) -> np.ndarray:
    """``int_0^1 exp(-isH) K exp(isH) ds`` evaluated in the eigenbasis of ``H``."""
    H = hermitian(H, "H")
    K = hermitian(K, "K")
    if H.shape != K.shape:
        raise InvalidInput(f"shape mismatch {H.shape} vs {K.shape}")
    w, v = np.linalg.eigh(H)
    Kp = v.conj().T @ K @ v
    weights = phi(1j * (w[None, :] - w[:, None]))
    out = v @ (Kp * weights) @ v.conj().T
    return (out + out.conj().T) / 2


def kron(*mats) -> np.ndarray:
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def partial_trace(M, dims: Sequence[int], site: int) -> np.ndarray:
    """Trace out tensor factor ``site`` of an operator on ``prod(dims)``."""
    M = as_matrix(M)
    dims = [int(k) for k in dims]
    if any(k < 1 for k in dims) or int(np.prod(dims)) != M.shape[0] or M.shape[0] != M.shape[1]:
        raise InvalidInput(f"dims {dims} do not match a matrix of shape {M.shape}")
    n = len(dims)
    if not 0 <= site < n:
        raise InvalidInput(f"site {site} out of range for {n} factors")
    t = M.reshape(dims + dims)
    t = np.trace(t, axis1=site, axis2=site + n)
    rest = int(np.prod(dims)) // dims[site]
    return t.reshape(rest, rest)


def embed(op, dims: Sequence[int], site: int) -> np.ndarray:
    """``I x ... x op x ... x I`` with ``op`` acting on factor ``site``."""
    factors = [np.eye(k) for k in dims]
    factors[site] = op
    return kron(*factors)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho = _checked_state(rho, "rho")
    sigma = _checked_state(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise InvalidInput(f"shape mismatch {rho.shape} vs {sigma.shape}")
    root = psd_power(rho, 0.5)
    w = np.linalg.eigvalsh(hermitian(root @ sigma @ root))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def _checked_state(rho, name):
    rho = hermitian(rho, name)
    cfg = numerics.get()
    w = np.linalg.eigvalsh(rho)
    if w[0] < -cfg.psd_clamp * max(1.0, w[-1]):
        raise InvalidInput(f"{name} is not positive semidefinite (lambda_min={w[0]:.3g})")
    if abs(np.trace(rho).real - 1) > cfg.trace_tol:
        raise InvalidInput(f"{name} does not have unit trace")
    return rho
