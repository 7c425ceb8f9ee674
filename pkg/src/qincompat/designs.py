"""Probe designs whose commutator matrix vanishes, and compatibility certificates.

Three families are provided: a maximally entangled probe on two copies of
the system (encoded on one copy or on both), a pair of single-system states
whose expectations of ``-i[H_1, H_2]`` cancel (the anti-parallel strategy),
and the product of a full orthonormal basis.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import estimation, holevo, matcore, numerics
from .errors import InvalidInput, NoConstructionNeeded
from .model import (GeneratorSet, NoiseSpec, StatisticalModel, effective_generators, encode,
                    lift_local_generators, pure_state)


class Verdict(str, enum.Enum):
    COMPATIBLE_BY_A = "CompatibleByA"
    COMPATIBLE_BY_SDP = "CompatibleBySdp"
    INCOMPATIBLE = "Incompatible"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CompatibilityCertificate:
    a_norm: float
    verdict: Verdict
    sdp_r: float | None = None
    sdp_status: str | None = None

    def as_dict(self) -> dict:
        return {"a_norm": self.a_norm, "verdict": str(self.verdict), "sdp_r": self.sdp_r,
                "sdp_status": self.sdp_status}


def max_entangled_state(D: int) -> np.ndarray:
    """``sum_i |i>|i> / sqrt(D)`` as a vector of length ``D**2``."""
    if D < 2:
        raise InvalidInput("D must be at least 2")
    psi = np.zeros(D * D, dtype=complex)
    psi[np.arange(D) * (D + 1)] = 1 / np.sqrt(D)
    return psi


def _as_generators(gens) -> GeneratorSet:
    return gens if isinstance(gens, GeneratorSet) else GeneratorSet(tuple(gens))


def ancilla_model(gens, theta=None, noise: NoiseSpec | None = None) -> StatisticalModel:
    """Maximally entangled probe, encoding ``1 x U_theta`` on the second factor."""
    g = _as_generators(gens)
    D = g.dim
    lifted = GeneratorSet(tuple(np.kron(np.eye(D), H) for H in g))
    return StatisticalModel(pure_state(max_entangled_state(D)), lifted, noise or NoiseSpec(), theta)


def double_model(gens, theta=None, noise: NoiseSpec | None = None) -> StatisticalModel:
    """Maximally entangled probe, encoding ``U_theta x U_theta``."""
    g = _as_generators(gens)
    return StatisticalModel(pure_state(max_entangled_state(g.dim)), lift_local_generators(g, 2),
                            noise or NoiseSpec(), theta)


@dataclass(frozen=True)
class AntiparallelSpec:
    """Selected eigenpairs (1-based), their sign bits and the phases of both states."""

    subset: tuple = (1,)
    signs: tuple = ()
    phases1: tuple = ()
    phases2: tuple = ()

    def __post_init__(self):
        subset = tuple(int(j) for j in self.subset)
        if not subset:
            raise InvalidInput("subset must be nonempty")
        if len(set(subset)) != len(subset) or min(subset) < 1:
            raise InvalidInput(f"subset must hold distinct indices >= 1, got {subset}")
        n = len(subset)
        signs = tuple(int(s) for s in self.signs) or (0,) * n
        ph1 = tuple(float(x) for x in self.phases1) or (0.0,) * n
        ph2 = tuple(float(x) for x in self.phases2) or (0.0,) * n
        if any(s not in (0, 1) for s in signs):
            raise InvalidInput("sign bits must be 0 or 1")
        if not len(signs) == len(ph1) == len(ph2) == n:
            raise InvalidInput("signs and phases need one entry per subset index")
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "phases1", ph1)
        object.__setattr__(self, "phases2", ph2)


def _fix_phase(v):
    k = int(np.flatnonzero(np.abs(v) > 1e-12)[0])
    return v * (abs(v[k]) / v[k])


def commutator_pairs(H1, H2):
    """Eigenpairs of ``-i[H1, H2]`` grouped as (positive, negative) partners.

    Positive eigenvalues are sorted by decreasing size and matched with the
    negative ones sorted by decreasing magnitude. Returns the list of pairs
    ``((mu, v_plus), (nu, v_minus))`` and the eigenvectors of the null space.
    """
    H1 = matcore.hermitian(H1, "H1")
    H2 = matcore.hermitian(H2, "H2")
    K = -1j * (H1 @ H2 - H2 @ H1)
    w, V = np.linalg.eigh((K + K.conj().T) / 2)
    scale = np.max(np.abs(w), initial=0.0)
    if scale <= numerics.get().compat_a:
        raise NoConstructionNeeded("the generators commute; every probe is already compatible")
    tol = 1e-10 * scale
    vecs = [_fix_phase(V[:, k]) for k in range(len(w))]
    pos = [k for k in np.argsort(-w) if w[k] > tol]
    neg = [k for k in np.argsort(w) if w[k] < -tol]
    zero = [vecs[k] for k in range(len(w)) if abs(w[k]) <= tol]
    pairs = [((w[a], vecs[a]), (w[b], vecs[b])) for a, b in zip(pos, neg)]
    return pairs, zero


def _balanced(first, second):
    """States in span{v_first, v_second} with opposite expectations.

    With ``e1 = mu_first`` and ``e2 = mu_second`` of opposite sign, the state
    whose eigenvalue is larger in magnitude is tilted towards its partner until
    both expectations have magnitude ``min(|e1|, |e2|)``. For ``|e1| = |e2|``
    this returns the bare eigenvectors.
    """
    (e1, v1), (e2, v2) = first, second
    if abs(abs(e1) - abs(e2)) <= 1e-10 * max(abs(e1), abs(e2)):
        return v1, v2
    if abs(e1) <= abs(e2):
        c2 = 2 * abs(e1) / (abs(e1) + abs(e2))  # cos^2 of the tilt
        return v1, np.sqrt(c2) * v2 + np.sqrt(1 - c2) * v1
    c1 = 2 * abs(e2) / (abs(e1) + abs(e2))
    return np.sqrt(c1) * v1 + np.sqrt(1 - c1) * v2, v2


def antiparallel_pair(H1eff, H2eff, spec: AntiparallelSpec | None = None, add_null: bool = False):
    """Two unit vectors whose expectations of ``[H1eff, H2eff]`` cancel.

    ``psi1`` collects, for each selected index ``j``, the eigenvector of
    ``-i[H1, H2]`` with eigenvalue ``(-1)^s_j a_j`` and ``psi2`` its partner of
    opposite sign, each with its own phase. When the partners' magnitudes
    differ the pair is balanced inside its two-dimensional eigenspace. With
    ``add_null`` a null eigenvector is added to both states.
    """
    spec = spec or AntiparallelSpec()
    pairs, zero = commutator_pairs(H1eff, H2eff)
    if max(spec.subset) > len(pairs):
        raise InvalidInput(f"subset {spec.subset} exceeds the {len(pairs)} available eigenpairs")
    D = np.asarray(H1eff).shape[0]
    psi1 = np.zeros(D, dtype=complex)
    psi2 = np.zeros(D, dtype=complex)
    for j, s, f1, f2 in zip(spec.subset, spec.signs, spec.phases1, spec.phases2):
        plus, minus = pairs[j - 1]
        u1, u2 = _balanced(plus, minus) if s == 0 else _balanced(minus, plus)
        psi1 += np.exp(1j * f1) * u1
        psi2 += np.exp(1j * f2) * u2
    if add_null:
        if not zero:
            raise InvalidInput("the commutator has no null eigenvector")
        psi1 += zero[0]
        psi2 += zero[0]
    return psi1 / np.linalg.norm(psi1), psi2 / np.linalg.norm(psi2)


def antiparallel_model(gens, theta=None, spec: AntiparallelSpec | None = None,
                       add_null: bool = False):
    """Product probe ``psi1 x psi2`` under ``U_theta x U_theta``; returns ``(model, psi1, psi2)``."""
    g = _as_generators(gens)
    if g.d != 2:
        raise InvalidInput(f"the anti-parallel construction needs two generators, got {g.d}")
    theta = np.zeros(2) if theta is None else np.asarray(theta, dtype=float)
    H1, H2 = effective_generators(g, theta)
    psi1, psi2 = antiparallel_pair(H1, H2, spec, add_null)
    model = StatisticalModel(pure_state(np.kron(psi1, psi2)), lift_local_generators(g, 2),
                             NoiseSpec(), theta)
    return model, psi1, psi2


def _check_orthonormal(states, D):
    S = np.array([np.asarray(v, dtype=complex).ravel() for v in states])
    if S.shape != (D, D):
        raise InvalidInput(f"need {D} vectors of length {D}, got shape {S.shape}")
    err = np.max(np.abs(S.conj() @ S.T - np.eye(D)))
    if err > 1e-10:
        raise InvalidInput(f"states are not orthonormal (Gram error {err:.3g})")
    return S


def basis_product_model(states: Sequence, gens, theta=None) -> StatisticalModel:
    """``psi_1 x ... x psi_D`` for an orthonormal basis, encoded by ``U_theta`` on every factor."""
    g = _as_generators(gens)
    S = _check_orthonormal(states, g.dim)
    return StatisticalModel(pure_state(matcore.kron(*S).ravel()), lift_local_generators(g, g.dim),
                            NoiseSpec(), theta)


def basis_product_compatibility(states: Sequence, gens, theta=None) -> CompatibilityCertificate:
    """Certificate from ``A`` alone; the QFI of such products may be singular."""
    return certify(basis_product_model(states, gens, theta), run_sdp=False, require_regular=False)


def certify(model: StatisticalModel, run_sdp: bool = True,
            require_regular: bool = True) -> CompatibilityCertificate:
    """Classify a model through ``A`` and, optionally, the SDP for ``r``.

    ``A = 0`` is sufficient for compatibility. Otherwise the SDP decides:
    ``r <= 1 + 1e-6`` certifies compatibility, ``r > 1 + 1e-4`` incompatibility
    and the band in between is left undecided.
    """
    enc = encode(model)
    bundle = estimation.info_bundle(enc, require_regular=require_regular or run_sdp)
    a_norm = float(np.linalg.norm(bundle.A))
    by_a = a_norm <= numerics.get().compat_a
    r = status = None
    if run_sdp:
        report = holevo.r_figure(enc, include_identity_bound=False)
        status = report.status
        r = report.r if report.optimal else None
    if by_a:
        verdict = Verdict.COMPATIBLE_BY_A
    elif r is None:
        verdict = Verdict.INCONCLUSIVE
    elif r <= 1 + 1e-6:
        verdict = Verdict.COMPATIBLE_BY_SDP
    elif r > 1 + 1e-4:
        verdict = Verdict.INCOMPATIBLE
    else:
        verdict = Verdict.INCONCLUSIVE
    return CompatibilityCertificate(a_norm, verdict, r, status)
