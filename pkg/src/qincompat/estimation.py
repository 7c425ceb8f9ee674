"""SLD-based information quantities and closed-form incompatibility bounds.

Everything here is computable from the symmetric logarithmic derivatives
alone: the QFI matrix ``F``, the commutator matrix ``A``, the scalar bounds
``C_S`` and ``C_Z``, the upper bound ``I*`` on the incompatibility and its
optimal weight matrix, plus the closed forms for the depolarized qubit and
for pure probes under global depolarizing noise.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import matcore, numerics
from .errors import (InvalidInput, ModelNotDifferentiable, NoIncompatibility,
                     SingularFisher)
from .model import EncodedModel, depolarizing_range


@dataclass(frozen=True)
class InfoBundle:
    slds: tuple
    F: np.ndarray
    A: np.ndarray
    support_rank: int

    @property
    def d(self) -> int:
        return self.F.shape[0]


def sld(rho, drho) -> np.ndarray:
    """Symmetric logarithmic derivative, solved in the eigenbasis of ``rho``.

    ``L_ab = 2 (drho)_ab / (p_a + p_b)`` on pairs touching the support and 0
    on the kernel. A derivative with a nonzero kernel-kernel block means the
    model leaves the support of ``rho`` and the QFI diverges.
    """
    cfg = numerics.get()
    rho = matcore.hermitian(rho, "rho")
    drho = matcore.hermitian(drho, "drho")
    p, V = np.linalg.eigh(rho)
    tau = cfg.support_rel * max(p[-1], 0.0)
    dp = V.conj().T @ drho @ V
    denom = p[:, None] + p[None, :]
    on = denom > tau
    off = ~on
    if off.any() and np.linalg.norm(dp[off]) > cfg.off_support:
        raise ModelNotDifferentiable(
            f"derivative has a kernel component of norm {np.linalg.norm(dp[off]):.3g}")
    Lp = np.where(on, 2 * dp / np.where(on, denom, 1.0), 0.0)
    L = V @ Lp @ V.conj().T
    return (L + L.conj().T) / 2


def support_rank(rho) -> int:
    p = np.linalg.eigvalsh(matcore.hermitian(rho))
    return int(np.sum(p > numerics.get().support_rel * max(p[-1], 0.0)))


def info_bundle(enc: EncodedModel, require_regular: bool = True) -> InfoBundle:
    """SLDs, ``F_ij = Re Tr[rho L_i L_j]`` and ``A_ij = Im Tr[rho L_i L_j]``.

    With ``require_regular`` a numerically singular ``F`` raises
    :class:`SingularFisher`.
    """
    rho = enc.rho
    slds = tuple(sld(rho, dj) for dj in enc.drho)
    d = len(slds)
    T = np.empty((d, d), dtype=complex)
    for i in range(d):
        rL = rho @ slds[i]
        for j in range(d):
            T[i, j] = np.trace(rL @ slds[j])
    # F is the symmetric part, A the antisymmetric part of T
    Fc = (T + T.T) / 2
    Ac = (T - T.T) / 2j
    if np.max(np.abs(Fc.imag), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(Fc))):
        raise ArithmeticError("QFI matrix has a non-negligible imaginary part")
    if np.max(np.abs(Ac.imag), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(Ac))):
        raise ArithmeticError("commutator matrix has a non-negligible imaginary part")
    F = Fc.real
    A = Ac.real
    F = (F + F.T) / 2
    A = (A - A.T) / 2
    bundle = InfoBundle(slds, F, A, support_rank(rho))
    if require_regular:
        check_regular(F)
    return bundle


def check_regular(F) -> None:
    F = np.asarray(F, dtype=float)
    w = np.linalg.eigvalsh(F)
    norm = max(abs(w[0]), abs(w[-1]))
    if norm == 0 or w[0] <= numerics.get().singular_fisher * norm:
        raise SingularFisher(f"QFI matrix is singular (eigenvalues {w})")


def _inverse(F):
    check_regular(F)
    Finv = np.linalg.inv(F)
    return (Finv + Finv.T) / 2


def c_s(G, F) -> float:
    """SLD Cramer-Rao bound ``Tr[G F^-1]``."""
    G = np.asarray(G, dtype=float)
    return float(np.trace(G @ _inverse(F)))


def c_z(G, bundle: InfoBundle) -> float:
    """``Tr[G F^-1] + TrAbs[G F^-1 A F^-1]``, an upper bound on the Holevo bound."""
    G = np.asarray(G, dtype=float)
    Finv = _inverse(bundle.F)
    return float(np.trace(G @ Finv)) + matcore.trace_abs(G, Finv @ bundle.A @ Finv)


def normalized_commutator(bundle: InfoBundle) -> np.ndarray:
    """``F^-1/2 A F^-1/2``."""
    check_regular(bundle.F)
    Fm = matcore.psd_power(bundle.F, -0.5)
    Ap = Fm @ bundle.A @ Fm
    return (Ap - Ap.T) / 2


def istar(bundle: InfoBundle) -> float:
    """Upper bound ``I* = ||F^-1/2 A F^-1/2||`` on the incompatibility."""
    value = matcore.operator_norm(normalized_commutator(bundle))
    if value > 1 + 1e-9:
        warnings.warn(f"I* = {value:.12g} exceeds 1; the model is numerically ill-conditioned",
                      RuntimeWarning, stacklevel=2)
    return value


def optimal_weight_istar(bundle: InfoBundle) -> np.ndarray:
    """Weight matrix attaining the supremum that defines ``I*``.

    In the frame ``G' = F^-1/2 G F^-1/2`` the optimum is half the projector
    onto the leading 2x2 canonical block of ``F^-1/2 A F^-1/2``; it is mapped
    back as ``G = F^1/2 G' F^1/2``.
    """
    Ap = normalized_commutator(bundle)
    Fh = matcore.psd_power(bundle.F, 0.5)
    if matcore.operator_norm(Ap) <= numerics.get().compat_a:
        raise NoIncompatibility("commutator matrix vanishes",
                                weight=bundle.F / np.trace(bundle.F))
    # i A' is Hermitian; its top eigenvector is (q1 + i q2)/sqrt(2) over the leading block
    w, v = np.linalg.eigh(1j * Ap)
    u = v[:, -1]
    Gp = np.real(np.outer(u, u.conj()))
    G = Fh @ Gp @ Fh
    return (G + G.T) / 2


def weight_from_functions(grads: Sequence, weights: Sequence[float] | None = None,
                          d: int | None = None) -> np.ndarray:
    """``G = sum_i g_i |df_i><df_i|`` for the gradients of the target functions."""
    grads = [np.asarray(v, dtype=float).ravel() for v in grads]
    if weights is None:
        weights = [1.0] * len(grads)
    if len(weights) != len(grads):
        raise InvalidInput("one weight per gradient is required")
    if any(g < 0 for g in weights):
        raise InvalidInput("weights must be nonnegative")
    if d is None:
        if not grads:
            raise InvalidInput("the number of parameters is needed for an empty gradient list")
        d = grads[0].size
    G = np.zeros((d, d))
    for g, v in zip(weights, grads):
        if v.size != d:
            raise InvalidInput(f"gradient of length {v.size}, expected {d}")
        G += g * np.outer(v, v)
    return G


def separable_bound(d: int, D: int) -> tuple[float, bool]:
    """Figure of merit for separable measurements: ``(value, exact)``.

    The value is exact (and equal to ``d``) for a qubit probe; otherwise it is
    the lower bound ``d / (D - 1)``.
    """
    if d < 1 or D < 2 or d > D * D - 1:
        raise InvalidInput(f"need 1 <= d <= D^2 - 1 and D >= 2, got d={d}, D={D}")
    if D == 2:
        return float(d), True
    return d / (D - 1), False


def qubit_closed_form(purity: float, lam: float) -> float:
    """``sqrt(2 Tr rho^2 - 1) |lam|`` for the depolarized two-phase qubit; ``purity`` is of the input probe."""
    if not 0.5 - 1e-12 <= purity <= 1 + 1e-12:
        raise InvalidInput(f"qubit purity must lie in [1/2, 1], got {purity}")
    if not -1 / 3 - 1e-15 <= lam <= 1 + 1e-15:
        raise InvalidInput(f"lambda must lie in [-1/3, 1], got {lam}")
    return float(np.sqrt(max(2 * purity - 1, 0.0)) * abs(lam))


def _check_lambda(D, lam):
    if D < 2:
        raise InvalidInput("D must be at least 2")
    lo, hi = depolarizing_range(D)
    if not lo - 1e-15 <= lam <= hi + 1e-15:
        raise InvalidInput(f"lambda={lam} outside [{lo:.6g}, 1] for D={D}")


def sld_noise_factor(D: int, lam: float) -> float:
    """Rescaling ``L(lam) = c L`` of the SLDs of a globally depolarized pure probe."""
    _check_lambda(D, lam)
    return lam * D / (2 + lam * (D - 2))


def ddim_scaling(D: int, lam: float, istar0: float) -> float:
    """``I*`` of a depolarized pure probe from its noiseless value."""
    _check_lambda(D, lam)
    denom = 2 + lam * (D - 2)
    assert denom > 0
    return abs(lam) * D / denom * istar0


def kappa_star(D: int, lam: float) -> float:
    """Relative asymmetry ``|I*(lam) - I*(-lam)| / I*(lam)``.

    Both ``lam`` and ``-lam`` must be admissible, i.e. ``|lam| <= 1/(D^2-1)``.
    """
    _check_lambda(D, lam)
    _check_lambda(D, -lam)
    denom = 2 - lam * (D - 2)
    assert denom > 0
    return 2 * abs(lam) * (D - 2) / denom
