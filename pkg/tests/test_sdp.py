import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corpus import random_hermitian, random_psd
from qincompat.errors import InvalidInput
from qincompat.sdp import SdpProblem, Status, realify, solve


def random_lmi(seed):
    """min c.x  s.t.  I + sum x_i F_i >= 0 and |x_i| <= 2."""
    rng = np.random.default_rng(seed)
    F = [(M + M.T) / 2 for M in rng.normal(size=(3, 4, 4))]
    c = rng.normal(size=3)
    return c, F


def lmi_problem(c, F):
    p = SdpProblem()
    p.matrix("x", 3, 1)
    p.minimize(lambda v: c @ v["x"][:, 0])
    p.add_psd(lambda v: np.eye(4) + sum(xi * Fi for xi, Fi in zip(v["x"][:, 0], F)), "lmi")
    p.add_psd(lambda v: np.diag(np.concatenate([2 - v["x"][:, 0], 2 + v["x"][:, 0]])), "box")
    return p


def random_search(c, F, rng, rounds=10, per_round=100_000):
    """Best feasible objective over shrinking random clouds (10^6 points in total)."""
    Fs = np.array(F)
    best_x, best = np.zeros(3), 0.0
    radius = 2.0
    for _ in range(rounds):
        X = np.clip(best_x + rng.uniform(-radius, radius, size=(per_round, 3)), -2, 2)
        mats = np.eye(4) + np.einsum("ni,ijk->njk", X, Fs)
        ok = np.linalg.eigvalsh(mats)[:, 0] >= 0
        if ok.any():
            vals = X[ok] @ c
            k = int(np.argmin(vals))
            if vals[k] < best:
                best, best_x = vals[k], X[ok][k]
        radius *= 0.4
    return best


def psd_lower_bound_problem(G, M):
    p = SdpProblem()
    p.symmetric("V", M.shape[0])
    p.minimize(lambda v: np.sum(G * v["V"]))
    p.add_psd(lambda v: v["V"] - M)
    return p


class TestSmallProblems:
    def test_two_by_two_boundary(self):
        p = SdpProblem()
        p.scalar("t")
        p.minimize(lambda v: v["t"])
        p.add_psd(lambda v: np.array([[v["t"], 1.0], [1.0, v["t"]]]))
        sol = solve(p)
        assert sol.status is Status.OPTIMAL
        assert sol.objective == pytest.approx(1.0, abs=1e-7)

    def test_monotone_objective(self):
        rng = np.random.default_rng(0)
        G = random_psd(3, rng) + np.eye(3)
        M = random_hermitian(3, rng).real
        sol = solve(psd_lower_bound_problem(G, M))
        assert sol.optimal
        assert sol.objective == pytest.approx(np.sum(G * M), abs=1e-6)
        assert np.allclose(sol.assignment["V"], M, atol=1e-5)

    def test_equality_constraints(self):
        # min -lambda_max style: max <u, X u> with Tr X = 1
        rng = np.random.default_rng(1)
        C = random_hermitian(4, rng).real
        p = SdpProblem()
        p.symmetric("X", 4)
        p.minimize(lambda v: -np.sum(C * v["X"]))
        p.add_psd(lambda v: v["X"])
        p.add_equality(lambda v: np.trace(v["X"]), 1.0)
        sol = solve(p)
        assert sol.objective == pytest.approx(-np.linalg.eigvalsh(C)[-1], abs=1e-7)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_lmi_against_search(self, seed):
        c, F = random_lmi(seed)
        sol = solve(lmi_problem(c, F))
        assert sol.optimal
        oracle = random_search(c, F, np.random.default_rng(100 + seed))
        assert oracle >= sol.objective - 1e-6
        assert oracle - sol.objective <= 1e-4


class TestStatuses:
    def test_inconsistent_equalities(self):
        p = SdpProblem()
        p.scalar("t")
        p.minimize(lambda v: v["t"])
        p.add_psd(lambda v: np.array([[v["t"]]]))
        p.add_equality(lambda v: v["t"], 1.0)
        p.add_equality(lambda v: v["t"], 2.0)
        assert solve(p).status is Status.INFEASIBLE

    def test_primal_infeasible(self):
        p = SdpProblem()
        p.scalar("t")
        p.minimize(lambda v: v["t"])
        p.add_psd(lambda v: np.array([[v["t"]]]))
        p.add_psd(lambda v: np.array([[-1 - v["t"]]]))
        assert solve(p).status is Status.INFEASIBLE

    def test_unbounded(self):
        p = SdpProblem()
        p.scalar("t")
        p.minimize(lambda v: -v["t"])
        p.add_psd(lambda v: np.array([[v["t"]]]))
        assert solve(p).status is Status.INFEASIBLE

    def test_iteration_cap(self):
        c, F = random_lmi(3)
        sol = solve(lmi_problem(c, F), max_iter=2)
        assert sol.status is Status.MAX_ITERATIONS


class TestBuilder:
    def test_rejects_nonaffine(self):
        p = SdpProblem()
        p.scalar("t")
        p.minimize(lambda v: v["t"] ** 2)
        with pytest.raises(InvalidInput):
            p.compile()

    def test_rejects_complex_block(self):
        p = SdpProblem()
        p.scalar("t")
        p.minimize(lambda v: v["t"])
        p.add_psd(lambda v: np.array([[v["t"], 1j], [-1j, v["t"]]]))
        with pytest.raises(InvalidInput):
            p.compile()

    def test_rejects_asymmetric_block(self):
        p = SdpProblem()
        p.scalar("t")
        p.minimize(lambda v: v["t"])
        p.add_psd(lambda v: np.array([[v["t"], 1.0], [0.0, v["t"]]]))
        with pytest.raises(InvalidInput):
            p.compile()

    def test_unpack_symmetric(self):
        p = SdpProblem()
        p.symmetric("V", 2)
        V = p.unpack(np.array([1.0, 2.0, 3.0]))["V"]
        assert np.array_equal(V, [[1, 2], [2, 3]])


class TestRealify:
    def test_real_input(self):
        M = np.array([[1.0, 2.0], [2.0, -1.0]])
        R = realify(M)
        assert np.array_equal(R[:2, :2], M) and np.array_equal(R[2:, 2:], M)
        assert np.all(R[:2, 2:] == 0)

    def test_psd_example(self):
        M = np.array([[1, 1j], [-1j, 1]])
        assert np.allclose(np.sort(np.linalg.eigvalsh(realify(M))), [0, 0, 2, 2])

    def test_indefinite_example(self):
        M = np.array([[0, 1j], [-1j, 0]])
        assert np.linalg.eigvalsh(realify(M))[0] < 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**31 - 1))
    def test_doubles_spectrum(self, D, seed):
        M = random_hermitian(D, np.random.default_rng(seed))
        w = np.linalg.eigvalsh(M)
        assert np.allclose(np.linalg.eigvalsh(realify(M)), np.sort(np.repeat(w, 2)), atol=1e-10)


class TestDuality:
    @pytest.mark.parametrize("seed", [4, 5, 6])
    def test_weak_duality_on_feasible_iterates(self, seed):
        c, F = random_lmi(seed)
        sol = solve(lmi_problem(c, F))
        feasible = [h for h in sol.history
                    if h["primal_residual"] <= 1e-8 and h["dual_residual"] <= 1e-8]
        assert feasible
        for h in feasible:
            assert h["dual"] <= h["primal"] + 1e-9
        assert sol.dual_objective <= sol.objective + 1e-9

    def test_reproducible(self):
        c, F = random_lmi(7)
        a, b = solve(lmi_problem(c, F)), solve(lmi_problem(c, F))
        assert abs(a.objective - b.objective) <= 1e-12
        assert a.iterations == b.iterations


class TestAgainstCvxpy:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_trace_constrained_program(self, seed):
        cp = pytest.importorskip("cvxpy")
        rng = np.random.default_rng(seed)
        n, m = 4, 3
        C = random_hermitian(n, rng).real + n * np.eye(n)
        As = [random_hermitian(n, rng).real for _ in range(m)]
        X0 = random_psd(n, rng) + np.eye(n)
        b = np.array([np.sum(Ak * X0) for Ak in As])

        X = cp.Variable((n, n), symmetric=True)
        ref = cp.Problem(cp.Minimize(cp.trace(C @ X)),
                         [X >> 0] + [cp.trace(Ak @ X) == bk for Ak, bk in zip(As, b)])
        ref.solve(solver=cp.CLARABEL)

        p = SdpProblem()
        p.symmetric("X", n)
        p.minimize(lambda v: np.sum(C * v["X"]))
        p.add_psd(lambda v: v["X"])
        p.add_equality(lambda v: np.array([np.sum(Ak * v["X"]) for Ak in As]), b)
        sol = solve(p)
        assert sol.optimal
        assert sol.objective == pytest.approx(ref.value, abs=1e-6)
