"""Holevo-Cramer-Rao bound and the incompatibility figure ``r`` as SDPs.

Estimator operators are expanded as ``X_i = sum_k X[k, i] lambda_k`` over an
orthonormal Hermitian basis of the full operator space. With ``rho = R^dag R``
the matrix ``Z_ij = Tr[rho X_i X_j]`` equals ``(W^dag W)^T`` for the ``rD x d``
matrix ``W`` whose columns are ``vec(R X_i)``, so ``V >= Z`` becomes the
Hermitian block condition ``[[V, W^dag], [W, 1]] >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import estimation, matcore, numerics
from .errors import InvalidInput, SolverFailure
from .model import EncodedModel, reparametrize
from .sdp import SdpProblem, Status, realify, solve


def hermitian_basis(D: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis: ``1/sqrt(D)`` followed by generalized Gell-Mann matrices.

    Order: identity, then for each pair ``j < k`` the symmetric and the
    antisymmetric element, then the ``D - 1`` diagonal elements.
    """
    if D < 2:
        raise InvalidInput("D must be at least 2")
    out = [np.eye(D, dtype=complex) / np.sqrt(D)]
    for j in range(D):
        for k in range(j + 1, D):
            s = np.zeros((D, D), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((D, D), dtype=complex)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            out += [s, a]
    for l in range(1, D):
        diag = np.zeros(D)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return out


def _support_split(rho):
    rho = matcore.hermitian(rho, "rho")
    p, V = np.linalg.eigh(rho)
    keep = p > numerics.get().support_rel * max(p[-1], 0.0)
    return p, V, keep


def r_factor(rho) -> tuple[np.ndarray, int]:
    """``R`` with ``R^dag R = rho``; rows ``sqrt(p_a) <a|`` over the support."""
    p, V, keep = _support_split(rho)
    R = np.sqrt(p[keep])[:, None] * V[:, keep].conj().T
    return R[::-1], int(keep.sum())


def kernel_rows(rho, basis) -> np.ndarray:
    """Rows ``K`` with ``K x = 0`` iff ``sum_k x_k lambda_k`` vanishes on ``ker(rho) x ker(rho)``.

    That block of an estimator operator enters neither ``Tr[rho X_i X_j]``
    nor the unbiasedness conditions, so leaving it free only makes the
    program degenerate.
    """
    p, V, keep = _support_split(rho)
    Q = V[:, ~keep]
    n = Q.shape[1]
    if n == 0:
        return np.zeros((0, len(basis)))
    blocks = np.array([Q.conj().T @ lam @ Q for lam in basis])  # (D^2, n, n)
    iu = np.triu_indices(n)
    su = np.triu_indices(n, 1)
    rows = np.concatenate([blocks[:, iu[0], iu[1]].real, blocks[:, su[0], su[1]].imag], axis=1).T
    return rows


@dataclass(frozen=True)
class HolevoAssembly:
    basis: tuple
    R: np.ndarray
    rank: int
    dsdtheta: np.ndarray  # (D^2, d), Tr[lambda_k d_j rho]
    s: np.ndarray  # (D^2,), Tr[lambda_k rho]
    T: np.ndarray  # (rD, D^2) complex, columns vec(R lambda_k)
    kernel: np.ndarray  # (m, D^2), see kernel_rows

    @property
    def d(self) -> int:
        return self.dsdtheta.shape[1]

    @property
    def dim(self) -> int:
        return self.R.shape[1]

    def operators(self, X) -> list[np.ndarray]:
        """Estimator operators ``X_i`` from a coefficient matrix."""
        X = np.asarray(X, dtype=float)
        return [np.tensordot(X[:, i], np.array(self.basis), axes=1) for i in range(X.shape[1])]


def _real_coefficients(values, what):
    values = np.asarray(values)
    scale = max(1.0, np.max(np.abs(values), initial=0.0))
    if np.max(np.abs(values.imag), initial=0.0) > 1e-10 * scale:
        raise ArithmeticError(f"{what} has a non-negligible imaginary part")
    return values.real.copy()


def assemble(enc: EncodedModel) -> HolevoAssembly:
    D = enc.dim
    basis = hermitian_basis(D)
    R, rank = r_factor(enc.rho)
    B = np.array(basis)
    ds = _real_coefficients(np.einsum("kab,jba->kj", B, np.array(enc.drho)), "dsdtheta")
    s = _real_coefficients(np.einsum("kab,ba->k", B, enc.rho), "state coordinates")
    T = np.stack([(R @ lam).ravel(order="F") for lam in basis], axis=1)
    K = kernel_rows(enc.rho, basis)
    return HolevoAssembly(tuple(basis), R, rank, ds, s, T, K)


def mean_zero_rows(assembly: HolevoAssembly, rho=None) -> tuple[np.ndarray, np.ndarray]:
    """Rows pinning ``Tr[rho X_i] = 0``: returns ``(s, rhs)`` meaning ``X^T s = rhs``."""
    s = assembly.s if rho is None else _real_coefficients(
        [np.trace(lam @ rho) for lam in assembly.basis], "state coordinates")
    return s, np.zeros(assembly.d)


def _holevo_program(asm: HolevoAssembly, mean_zero: bool, target=None) -> SdpProblem:
    """Holevo constraints on ``k`` estimator columns with ``X^T dsdtheta = target`` (``k x d``)."""
    target = np.eye(asm.d) if target is None else np.asarray(target, dtype=float)
    d = target.shape[0]
    D2 = len(asm.basis)
    rD = asm.T.shape[0]
    p = SdpProblem()
    p.symmetric("V", d)
    p.matrix("X", D2, d)

    def block(v):
        W = asm.T @ v["X"]
        M = np.zeros((d + rD, d + rD), dtype=complex)
        M[:d, :d] = v["V"]
        M[:d, d:] = W.conj().T
        M[d:, :d] = W
        M[d:, d:] = np.eye(rD)
        return realify(M)

    p.add_psd(block, "holevo")
    p.add_equality(lambda v: (v["X"].T @ asm.dsdtheta).ravel(), target.ravel())
    if mean_zero:
        s, _ = mean_zero_rows(asm)
        p.add_equality(lambda v: v["X"].T @ s, np.zeros(d))
    if asm.kernel.shape[0]:
        p.add_equality(lambda v: (asm.kernel @ v["X"]).ravel(), np.zeros(asm.kernel.shape[0] * d))
    return p


def _unit_fisher(enc: EncodedModel, F):
    """Rescale parameters so that the QFI has unit diagonal; returns ``(model, J)``.

    Both programs are invariant under this reparametrization (with
    ``G -> J^T G J``) and it keeps the SDP data well scaled across noise levels.
    """
    J = np.diag(1 / np.sqrt(np.diag(F)))
    return reparametrize(enc, J), J


def holevo_bound(G, enc: EncodedModel, mean_zero: bool = True, gap_tol: float | None = None,
                 feas_tol: float | None = None):
    """``C_H(G)``: returns the bound and the optimal coefficients ``X*`` (shape ``(D^2, d)``).

    Column ``i`` of ``X*`` expands the estimator operator ``X_i`` in
    :func:`hermitian_basis`. Raises :class:`SolverFailure` when the SDP does
    not reach optimality.
    """
    bundle = estimation.info_bundle(enc)
    G = np.asarray(G, dtype=float)
    if G.shape != (enc.d, enc.d):
        raise InvalidInput(f"weight matrix must be {enc.d}x{enc.d}, got {G.shape}")
    G = matcore.hermitian(G, "G").real
    if np.linalg.eigvalsh(G)[0] < -1e-12 * max(1.0, np.abs(G).max()):
        raise InvalidInput("weight matrix must be positive semidefinite")
    scaled, J = _unit_fisher(enc, bundle.F)
    Gs = J.T @ G @ J
    # C_H is linear in G; solve with a unit-trace weight
    weight = float(np.trace(Gs))
    if weight == 0:
        return 0.0, np.zeros((enc.dim ** 2, enc.d))
    # only X P enters the objective for Gs = P diag(g) P^T; V lives on range(Gs)
    g, Q = np.linalg.eigh(Gs / weight)
    on = g > 1e-12 * g[-1]
    P, g = Q[:, on], g[on]
    asm = assemble(scaled)
    p = _holevo_program(asm, mean_zero, P.T)
    p.minimize(lambda v: np.sum(g * np.diag(v["V"])))
    sol = solve(p, gap_tol=gap_tol, feas_tol=feas_tol)
    if not sol.optimal:
        raise SolverFailure(f"Holevo SDP ended with status {sol.status}: {sol.message}",
                            sol.status, sol)
    Y = sol.assignment["X"]
    if not on.all():
        Y = np.hstack([Y, _free_columns(asm, Q[:, ~on].T, mean_zero)])
        P = np.hstack([P, Q[:, ~on]])
    # estimators of the original parameters: theta_hat = J eta_hat
    return weight * sol.objective, Y @ P.T @ J.T


def _free_columns(asm: HolevoAssembly, target, mean_zero):
    """Minimum-norm columns with ``X^T dsdtheta = target`` for directions the weight ignores."""
    rows = [asm.dsdtheta.T]
    if mean_zero:
        rows.append(asm.s[None, :])
    if asm.kernel.shape[0]:
        rows.append(asm.kernel)
    A = np.vstack(rows)
    out = []
    for t in target:
        rhs = np.concatenate([t, np.zeros(A.shape[0] - t.size)])
        out.append(np.linalg.lstsq(A, rhs, rcond=None)[0])
    return np.array(out).T


@dataclass(frozen=True)
class IncompatReport:
    c_s_identity: float
    c_h_identity: float
    c_z_identity: float
    r: float
    incompat: float
    istar: float
    separable_bound: float
    separable_exact: bool
    purity: float
    status: str
    gap: float
    iterations: int
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL.value

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def r_figure(enc: EncodedModel, include_identity_bound: bool = True, mean_zero: bool = True,
             gap_tol: float | None = None, feas_tol: float | None = None) -> IncompatReport:
    """Solve ``min t`` s.t. ``||F^1/2 V F^1/2|| <= t`` under the Holevo constraints.

    ``r = t*`` is the largest ratio ``C_H(G)/C_S(G)`` over weight matrices and
    the incompatibility is ``I = r - 1``. Solver trouble is reported through
    ``status`` with NaN figures; it does not raise.
    """
    bundle = estimation.info_bundle(enc)
    d = enc.d
    scaled, J = _unit_fisher(enc, bundle.F)
    Fh = matcore.psd_power(J.T @ bundle.F @ J, 0.5)
    p = _holevo_program(assemble(scaled), mean_zero)
    p.scalar("t")

    def spectral(v):
        B = Fh @ v["V"] @ Fh
        tI = v["t"] * np.eye(d)
        return np.block([[tI, B], [B, tI]])

    p.add_psd(spectral, "spectral")
    p.minimize(lambda v: v["t"])
    sol = solve(p, gap_tol=gap_tol, feas_tol=feas_tol)
    status, message = str(sol.status), sol.message
    r = sol.objective if sol.optimal else float("nan")

    eye = np.eye(d)
    c_h = float("nan")
    if include_identity_bound:
        try:
            c_h, _ = holevo_bound(eye, enc, mean_zero, gap_tol, feas_tol)
        except SolverFailure as exc:
            if sol.optimal:
                status, message = str(exc.status), str(exc)
    sep, exact = estimation.separable_bound(d, enc.dim)
    return IncompatReport(
        c_s_identity=estimation.c_s(eye, bundle.F),
        c_h_identity=c_h,
        c_z_identity=estimation.c_z(eye, bundle),
        r=r,
        incompat=r - 1,
        istar=estimation.istar(bundle),
        separable_bound=sep,
        separable_exact=exact,
        purity=float(np.real(np.trace(enc.rho @ enc.rho))),
        status=status,
        gap=sol.gap,
        iterations=sol.iterations,
        message=message,
    )
