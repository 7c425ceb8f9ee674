"""Small dense semidefinite programs.

Problems are stated with named variables (scalars, symmetric matrices or
general real matrices), a linear objective to minimize, affine maps that
must be positive semidefinite and linear equalities. Maps are plain Python
callables taking a ``{name: value}`` dict; they are sampled once to recover
their coefficient matrices.

The solver is an infeasible primal-dual path-following method with
Nesterov-Todd scaling and a Mehrotra predictor-corrector step, written for
problems with at most a few hundred scalar unknowns.
"""
from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import numerics
from .errors import InvalidInput

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    shape: tuple
    offset: int
    size: int


class SdpProblem:
    """Builder for ``minimize c(x) s.t. F_k(x) >= 0, a(x) = b``.

    >>> p = SdpProblem()
    >>> t = p.scalar("t")
    >>> p.minimize(lambda v: v["t"])
    >>> p.add_psd(lambda v: np.array([[v["t"], 1.0], [1.0, v["t"]]]))
    >>> round(solve(p).objective, 6)
    1.0
    """

    def __init__(self):
        self.variables: dict[str, Variable] = {}
        self.n = 0
        self.objective: Callable | None = None
        self.psd_constraints: list[tuple[str, Callable]] = []
        self.equalities: list[tuple[Callable, np.ndarray]] = []

    def _add(self, name, kind, shape, size):
        if name in self.variables:
            raise InvalidInput(f"duplicate variable {name!r}")
        self.variables[name] = Variable(name, kind, shape, self.n, size)
        self.n += size
        return name

    def scalar(self, name: str) -> str:
        return self._add(name, "scalar", (), 1)

    def symmetric(self, name: str, n: int) -> str:
        return self._add(name, "symmetric", (n, n), n * (n + 1) // 2)

    def matrix(self, name: str, rows: int, cols: int) -> str:
        return self._add(name, "matrix", (rows, cols), rows * cols)

    def minimize(self, fn: Callable) -> None:
        self.objective = fn

    def add_psd(self, fn: Callable, name: str | None = None) -> None:
        self.psd_constraints.append((name or f"psd{len(self.psd_constraints)}", fn))

    def add_equality(self, fn: Callable, rhs) -> None:
        self.equalities.append((fn, np.atleast_1d(np.asarray(rhs, dtype=float)).ravel()))

    def unpack(self, x) -> dict:
        x = np.asarray(x, dtype=float)
        out = {}
        for v in self.variables.values():
            chunk = x[v.offset:v.offset + v.size]
            if v.kind == "scalar":
                out[v.name] = float(chunk[0])
            elif v.kind == "symmetric":
                n = v.shape[0]
                M = np.zeros((n, n))
                iu = np.triu_indices(n)
                M[iu] = chunk
                M.T[iu] = chunk
                out[v.name] = M
            else:
                out[v.name] = chunk.reshape(v.shape)
        return out

    def compile(self, seed: int = 0) -> "StandardForm":
        """Sample every map at zero and at unit vectors; verify affinity and symmetry."""
        if self.objective is None:
            raise InvalidInput("no objective set")
        n = self.n
        if n == 0:
            raise InvalidInput("problem has no variables")
        rng = np.random.default_rng(seed)
        probe = rng.standard_normal(n)
        basis = [self.unpack(np.eye(n)[i]) for i in range(n)]
        zero = self.unpack(np.zeros(n))
        at_probe = self.unpack(probe)

        def sample(fn, what):
            c0 = np.asarray(fn(zero))
            coeffs = np.array([np.asarray(fn(e)) - c0 for e in basis])
            value = np.asarray(fn(at_probe))
            pred = c0 + np.tensordot(probe, coeffs, axes=1)
            scale = 1.0 + np.max(np.abs(value), initial=0.0)
            if value.shape != c0.shape or np.max(np.abs(value - pred), initial=0.0) > 1e-10 * scale:
                raise InvalidInput(f"{what} is not affine in the variables")
            if np.iscomplexobj(value):
                if np.max(np.abs(value.imag), initial=0.0) > 1e-12 * scale:
                    raise InvalidInput(f"{what} is complex-valued; realify it first")
                c0, coeffs, value = c0.real, coeffs.real, value.real
            return c0.astype(float), coeffs.astype(float), value

        c0, c, _ = sample(self.objective, "objective")
        if c0.shape != ():
            raise InvalidInput("objective must be scalar-valued")
        blocks = []
        for name, fn in self.psd_constraints:
            F0, F, value = sample(fn, f"constraint {name!r}")
            if F0.ndim != 2 or F0.shape[0] != F0.shape[1]:
                raise InvalidInput(f"constraint {name!r} must be square-matrix-valued")
            scale = 1.0 + np.max(np.abs(value))
            if np.max(np.abs(value - value.T)) > 1e-10 * scale:
                raise InvalidInput(f"constraint {name!r} is not symmetric-valued")
            blocks.append(Block(name, (F0 + F0.T) / 2, (F + F.transpose(0, 2, 1)) / 2))
        rows, rhs = [], []
        for k, (fn, b) in enumerate(self.equalities):
            e0, E, _ = sample(fn, f"equality {k}")
            e0 = np.atleast_1d(e0)
            E = E.reshape(n, -1)
            if e0.size != b.size:
                raise InvalidInput(f"equality {k}: {e0.size} values but {b.size} right-hand sides")
            rows.append(E.T)
            rhs.append(b - e0)
        A = np.vstack(rows) if rows else np.zeros((0, n))
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        return StandardForm(c, float(c0), blocks, A, b)


@dataclass
class Block:
    name: str
    F0: np.ndarray
    F: np.ndarray  # (n, m, m)
    active: np.ndarray = None

    def __post_init__(self):
        nz = np.any(self.F != 0, axis=(1, 2))
        self.active = np.flatnonzero(nz)
        self.Fa = self.F[self.active]

    @property
    def m(self):
        return self.F0.shape[0]

    def apply(self, x):
        return self.F0 + np.tensordot(x[self.active], self.Fa, axes=1)

    def linear(self, dx):
        return np.tensordot(dx[self.active], self.Fa, axes=1)

    def adjoint(self, Z, n):
        out = np.zeros(n)
        out[self.active] = self.Fa.reshape(len(self.active), -1) @ Z.ravel()
        return out


@dataclass
class StandardForm:
    c: np.ndarray
    c0: float
    blocks: list
    A: np.ndarray
    b: np.ndarray


@dataclass
class SdpSolution:
    status: Status
    assignment: dict
    objective: float
    dual_objective: float
    gap: float
    iterations: int
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    x: np.ndarray = None
    y: np.ndarray = None
    slacks: list = field(default_factory=list)
    duals: list = field(default_factory=list)
    history: list = field(default_factory=list)
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def realify(M) -> np.ndarray:
    """Real symmetric embedding ``[[Re M, -Im M], [Im M, Re M]]`` of a Hermitian matrix."""
    M = np.asarray(M)
    re, im = M.real, (M.imag if np.iscomplexobj(M) else np.zeros_like(M, dtype=float))
    return np.block([[re, -im], [im, re]])


def realify_hermitian_psd(block):
    """Realify a Hermitian matrix, or wrap a Hermitian-valued affine map."""
    if callable(block):
        return lambda v: realify(block(v))
    return realify(block)


def _reduce_equalities(A, b, tol=1e-12):
    """Drop linearly dependent equality rows; ``None`` if they are inconsistent."""
    if A.shape[0] == 0:
        return A, b
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    if rank == A.shape[0]:
        return A, b
    Ur = U[:, :rank]
    if np.linalg.norm(b - Ur @ (Ur.T @ b)) > 1e-9 * (1 + np.linalg.norm(b)):
        return None
    return Ur.T @ A, Ur.T @ b


def _nt_scaling(S, Z):
    """``G`` with ``G^T Z G = G^-1 S G^-T = diag(lam)``."""
    Ls = np.linalg.cholesky(S)
    Lz = np.linalg.cholesky(Z)
    U, lam, Vt = np.linalg.svd(Lz.T @ Ls)
    G = Ls @ Vt.T / np.sqrt(lam)
    Ginv = (np.sqrt(lam)[:, None] * Vt) @ sla.solve_triangular(Ls, np.eye(len(lam)), lower=True)
    return G, Ginv, lam


def _max_step(lam, D):
    """Largest ``a`` with ``diag(lam) + a D >= 0`` (inf if unbounded)."""
    r = 1 / np.sqrt(lam)
    e = np.linalg.eigvalsh(r[:, None] * D * r[None, :])
    return np.inf if e[0] >= 0 else -1.0 / e[0]


def solve(problem: SdpProblem | StandardForm, gap_tol: float | None = None,
          feas_tol: float | None = None, max_iter: int | None = None,
          problem_seed: int = 0) -> SdpSolution:
    """Solve to duality gap ``gap_tol`` and residuals ``feas_tol``.

    Never raises on solver trouble: non-optimal outcomes are reported
    through :attr:`SdpSolution.status`. The gap and the residuals are
    measured relative to ``max(1, |objective|)`` and ``1 + ||data||``.
    """
    cfg = numerics.get()
    gap_tol = cfg.gap_tol if gap_tol is None else gap_tol
    feas_tol = cfg.feas_tol if feas_tol is None else feas_tol
    max_iter = cfg.max_iter if max_iter is None else max_iter
    builder = problem if isinstance(problem, SdpProblem) else None
    std = problem.compile(problem_seed) if builder else problem
    unpack = builder.unpack if builder else (lambda x: {"x": x})
    c, blocks = std.c, std.blocks
    n = c.size

    def result(status, x, y, S, Z, it, hist, msg="", pres=np.nan, dres=np.nan):
        pobj = float(c @ x + std.c0)
        dobj = float(-sum(np.sum(bk.F0 * Zk) for bk, Zk in zip(blocks, Z)) + b @ y + std.c0) \
            if y is not None else np.nan
        return SdpSolution(status, unpack(x), pobj, dobj, pobj - dobj, it, pres, dres, x, y,
                           S, Z, hist, msg)

    reduced = _reduce_equalities(std.A, std.b)
    if reduced is None:
        return SdpSolution(Status.INFEASIBLE, unpack(np.zeros(n)), np.nan, np.nan, np.nan, 0,
                           message="inconsistent equality constraints")
    A, b = reduced
    p = A.shape[0]
    m_total = sum(bk.m for bk in blocks)
    if m_total == 0:
        raise InvalidInput("problem has no semidefinite constraint")

    # start: least-norm x satisfying the equalities, slacks shifted into the interior
    x = np.linalg.lstsq(A, b, rcond=None)[0] if p else np.zeros(n)
    y = np.zeros(p)
    S, Z = [], []
    for bk in blocks:
        Sx = bk.apply(x)
        shift = max(0.0, 1.0 - np.linalg.eigvalsh(Sx)[0])
        S.append(Sx + shift * np.eye(bk.m))
        Z.append(np.eye(bk.m))

    norm_F0 = 1 + np.sqrt(sum(np.sum(bk.F0**2) for bk in blocks))
    norm_b = 1 + np.linalg.norm(b)
    norm_c = 1 + np.linalg.norm(c)
    history = []
    stalls = 0

    for it in range(max_iter + 1):
        Sx = [bk.apply(x) for bk in blocks]
        rp = [Sxk - Sk for Sxk, Sk in zip(Sx, S)]
        re = b - A @ x
        AZ = sum(bk.adjoint(Zk, n) for bk, Zk in zip(blocks, Z))
        rd = c - AZ - A.T @ y
        comp = sum(np.sum(Sk * Zk) for Sk, Zk in zip(S, Z))
        mu = comp / m_total
        pobj = c @ x + std.c0
        dobj = -sum(np.sum(bk.F0 * Zk) for bk, Zk in zip(blocks, Z)) + b @ y + std.c0
        pres = max(np.sqrt(sum(np.sum(r**2) for r in rp)) / norm_F0,
                   np.linalg.norm(re) / norm_b if p else 0.0)
        dres = np.linalg.norm(rd) / norm_c
        history.append({"iteration": it, "primal": float(pobj), "dual": float(dobj),
                        "complementarity": float(comp), "primal_residual": float(pres),
                        "dual_residual": float(dres)})
        log.debug("it %d pobj %.10g dobj %.10g comp %.3g pres %.3g dres %.3g",
                  it, pobj, dobj, comp, pres, dres)

        tol = gap_tol * max(1.0, abs(pobj))
        if pres <= feas_tol and dres <= feas_tol and comp <= tol and abs(pobj - dobj) <= tol:
            worst = min(np.linalg.eigvalsh(s)[0] for s in Sx)
            if worst >= -feas_tol:
                return result(Status.OPTIMAL, x, y, Sx, Z, it, history, pres=pres, dres=dres)

        # certificates of infeasibility
        t_dual = b @ y - sum(np.sum(bk.F0 * Zk) for bk, Zk in zip(blocks, Z))
        if t_dual > 0 and np.linalg.norm(AZ + A.T @ y) <= feas_tol * t_dual:
            return result(Status.INFEASIBLE, x, y, Sx, Z, it, history,
                          "primal infeasible (dual certificate found)", pres, dres)
        t_prim = -(c @ x)
        if t_prim > 0 and it > 0:
            lin = [(Sxk - bk.F0) / t_prim for Sxk, bk in zip(Sx, blocks)]
            if (min(np.linalg.eigvalsh(L)[0] for L in lin) >= -feas_tol
                    and (not p or np.linalg.norm(A @ x) <= feas_tol * t_prim)
                    and t_prim > 1 / feas_tol):
                return result(Status.INFEASIBLE, x, y, Sx, Z, it, history,
                              "dual infeasible (primal unbounded)", pres, dres)
        if it == max_iter:
            break

        try:
            scal = [_nt_scaling(Sk, Zk) for Sk, Zk in zip(S, Z)]
        except np.linalg.LinAlgError:
            return result(Status.NUMERICAL_FAILURE, x, y, Sx, Z, it, history,
                          "iterates lost positive definiteness", pres, dres)

        # Schur complement: M_ij = sum_k Tr(W^-1 F_i W^-1 F_j) = <G^-1 F_i G^-T, G^-1 F_j G^-T>
        M = np.zeros((n, n))
        for bk, (G, Ginv, lam) in zip(blocks, scal):
            if not len(bk.active):
                continue
            Y = (Ginv @ bk.Fa @ Ginv.T).reshape(len(bk.active), -1)
            M[np.ix_(bk.active, bk.active)] += Y @ Y.T
        K = np.zeros((n + p, n + p))
        K[:n, :n] = M
        K[:n, n:] = A.T
        K[n:, :n] = A
        # symmetric diagonal scaling; variables absent from every block keep scale 1
        diag = np.abs(np.diag(M))
        kscale = np.ones(n + p)
        big = diag > 1e-12 * max(diag.max(initial=0.0), 1e-300)
        kscale[:n][big] = np.sqrt(diag[big])
        Ks = K / kscale[:, None] / kscale[None, :]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu = sla.lu_factor(Ks, check_finite=False)
            if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) < 1e-15 * np.max(np.abs(np.diag(lu[0]))):
                lu = None
        except (ValueError, sla.LinAlgError):
            lu = None

        def kkt(rhs):
            rs = rhs / kscale
            if lu is not None:
                sol = sla.lu_solve(lu, rs, check_finite=False)
                sol = sol + sla.lu_solve(lu, rs - Ks @ sol, check_finite=False)
            else:
                sol = np.linalg.lstsq(Ks, rs, rcond=None)[0]
            return sol / kscale

        Winv_rp_Winv = [Ginv.T @ (Ginv @ r @ Ginv.T) @ Ginv for r, (G, Ginv, lam) in zip(rp, scal)]

        def direction(Xs):
            R = [Ginv.T @ X @ Ginv for X, (G, Ginv, lam) in zip(Xs, scal)]
            h = sum(bk.adjoint(Rk - Wk, n) for bk, Rk, Wk in zip(blocks, R, Winv_rp_Winv)) - rd
            sol = kkt(np.concatenate([h, re]))
            dx, dy = sol[:n], -sol[n:]
            dS = [r + bk.linear(dx) for r, bk in zip(rp, blocks)]
            dZ = []
            for Rk, dSk, (G, Ginv, lam) in zip(R, dS, scal):
                Winv = Ginv.T @ Ginv
                dZk = Rk - Winv @ dSk @ Winv
                dZ.append((dZk + dZk.T) / 2)
            return dx, dy, dS, dZ

        def step_length(dS, dZ):
            amax = np.inf
            for dSk, dZk, (G, Ginv, lam) in zip(dS, dZ, scal):
                ds = Ginv @ dSk @ Ginv.T
                dz = G.T @ dZk @ G
                amax = min(amax, _max_step(lam, (ds + ds.T) / 2), _max_step(lam, (dz + dz.T) / 2))
            return amax

        # predictor
        dx, dy, dS, dZ = direction([-np.diag(lam) for G, Ginv, lam in scal])
        a_aff = min(1.0, step_length(dS, dZ))
        comp_aff = sum(np.sum((Sk + a_aff * dSk) * (Zk + a_aff * dZk))
                       for Sk, Zk, dSk, dZk in zip(S, Z, dS, dZ))
        sigma = min(1.0, max(0.0, comp_aff / comp)) ** 3 if comp > 0 else 0.0

        # corrector
        Xs = []
        for (G, Ginv, lam), dSk, dZk in zip(scal, dS, dZ):
            ds = Ginv @ dSk @ Ginv.T
            dz = G.T @ dZk @ G
            Yc = sigma * mu * np.eye(len(lam)) - np.diag(lam**2) - (ds @ dz + dz @ ds) / 2
            Xs.append(2 * Yc / (lam[:, None] + lam[None, :]))
        dx, dy, dS, dZ = direction(Xs)
        alpha = min(1.0, 0.99 * step_length(dS, dZ))
        if not np.isfinite(alpha) or alpha < 1e-12:
            stalls += 1
            if stalls >= 3:
                return result(Status.NUMERICAL_FAILURE, x, y, Sx, Z, it, history,
                              "step length collapsed", pres, dres)
        else:
            stalls = 0
        x = x + alpha * dx
        y = y + alpha * dy
        S = [(Sk + alpha * dSk + (Sk + alpha * dSk).T) / 2 for Sk, dSk in zip(S, dS)]
        Z = [(Zk + alpha * dZk + (Zk + alpha * dZk).T) / 2 for Zk, dZk in zip(Z, dZ)]

    Sx = [bk.apply(x) for bk in blocks]
    return result(Status.MAX_ITERATIONS, x, y, Sx, Z, max_iter, history,
                  f"no convergence in {max_iter} iterations", pres, dres)
