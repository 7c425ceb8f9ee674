import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from corpus import I2, SX, SY, SZ, bloch_state, qubit_gens, random_hermitian, random_pure, random_state
from qincompat import matcore, model
from qincompat.errors import DegenerateModel, InvalidInput
from qincompat.model import GeneratorSet, NoiseSpec, StatisticalModel, encode, pure_state


def full_map(m: StatisticalModel, theta):
    """rho_theta computed directly from the unitary and the channel."""
    U = expm(1j * sum(t * H for t, H in zip(theta, m.generators)))
    return m.noise.apply(U @ m.probe @ U.conj().T)


def finite_difference(m, h=1e-5):
    out = []
    for j in range(m.d):
        e = np.zeros(m.d)
        e[j] = h
        out.append((full_map(m, m.theta + e) - full_map(m, m.theta - e)) / (2 * h))
    return out


def random_noisy_model(rng, D, d, local=False):
    gens = GeneratorSet(tuple(random_hermitian(D, rng, True) for _ in range(d)))
    if local:
        n = int(np.log2(D))
        noise = NoiseSpec.local(rng.uniform(-1 / 3, 1), n)
    else:
        lo, _ = model.depolarizing_range(D)
        noise = NoiseSpec.global_(rng.uniform(lo, 1))
    probe = random_state(D, rng) if rng.random() < 0.5 else pure_state(random_pure(D, rng))
    return StatisticalModel(probe, gens, noise, rng.uniform(-1.5, 1.5, size=d))


class TestValidation:
    def test_density_matrix_trace(self):
        with pytest.raises(InvalidInput):
            model.density_matrix(np.diag([1.0, 1.0]))

    def test_density_matrix_positive(self):
        with pytest.raises(InvalidInput):
            model.density_matrix(np.diag([1.5, -0.5]))

    def test_generators_traceless(self):
        with pytest.raises(InvalidInput):
            GeneratorSet((np.eye(2), SZ))

    def test_too_many_generators(self):
        with pytest.raises(InvalidInput):
            GeneratorSet((SX, SY, SZ, SX))

    def test_global_noise_range(self):
        with pytest.raises(InvalidInput):
            StatisticalModel(pure_state([1, 0]), qubit_gens(), NoiseSpec.global_(-0.5))

    def test_local_noise_needs_qubits(self):
        with pytest.raises(InvalidInput):
            NoiseSpec("local-depolarizing", 0.5, (3,))

    def test_theta_length(self):
        with pytest.raises(InvalidInput):
            StatisticalModel(pure_state([1, 0]), qubit_gens(), theta=[0.1])

    def test_depolarizing_range(self):
        assert model.depolarizing_range(2) == pytest.approx((-1 / 3, 1))
        assert model.depolarizing_range(3) == pytest.approx((-1 / 8, 1))


class TestBuildUnitary:
    def test_zero(self):
        assert np.allclose(model.build_unitary(qubit_gens(), [0, 0]), np.eye(2))

    def test_quarter_turn(self):
        assert np.allclose(model.build_unitary(qubit_gens(), [np.pi / 2, 0]), 1j * SY)

    def test_matches_expm_of_sum(self):
        t = (0.3, -1.1)
        assert np.allclose(model.build_unitary(qubit_gens(), t),
                           matcore.expm_i(t[0] * SY + t[1] * SZ))

    def test_length_mismatch(self):
        with pytest.raises(InvalidInput):
            model.build_unitary(qubit_gens(), [0.1, 0.2, 0.3])


class TestDepolarizing:
    def test_identity_channel(self):
        rho = bloch_state([0.3, 0.1, -0.5])
        assert np.allclose(model.apply_depolarizing(rho, 1.0), rho)

    def test_full_depolarization(self):
        rho = random_state(3, np.random.default_rng(0))
        assert np.allclose(model.apply_depolarizing(rho, 0.0), np.eye(3) / 3)

    def test_qubit_lower_boundary(self):
        out = model.apply_depolarizing(np.diag([1.0, 0.0]), -1 / 3)
        assert np.allclose(out, np.diag([1 / 3, 2 / 3]))

    def test_out_of_range(self):
        with pytest.raises(InvalidInput):
            model.apply_depolarizing(np.diag([1.0, 0.0]), 1.5)


class TestLocalDepolarizing:
    def test_identity_channel(self):
        rho = random_state(4, np.random.default_rng(1))
        assert np.allclose(model.apply_local_depolarizing(rho, 1.0, [2, 2]), rho)

    def test_full_depolarization(self):
        rho = random_state(8, np.random.default_rng(2))
        assert np.allclose(model.apply_local_depolarizing(rho, 0.0, [2, 2, 2]), np.eye(8) / 8)

    def test_product_state(self):
        rng = np.random.default_rng(3)
        r1, r2 = random_state(2, rng), random_state(2, rng)
        lam = 0.37
        out = model.apply_local_depolarizing(np.kron(r1, r2), lam, [2, 2])
        ref = np.kron(model.apply_depolarizing(r1, lam), model.apply_depolarizing(r2, lam))
        assert np.allclose(out, ref, atol=1e-14)

    def test_sequential_partial_trace_form(self):
        """Agrees with rho -> lam rho + (1 - lam) I/2 x Tr_site rho applied site by site."""
        rng = np.random.default_rng(4)
        rho = random_state(8, rng)
        lam = -0.2
        ref = rho
        for site in (2, 0, 1):
            reduced = matcore.partial_trace(ref, [2, 2, 2], site)
            # reinsert I/2 at position `site`
            t = np.kron(I2 / 2, reduced).reshape(2, 2, 2, 2, 2, 2)
            perm = {0: (0, 1, 2), 1: (1, 0, 2), 2: (1, 2, 0)}[site]
            t = t.transpose(perm + tuple(p + 3 for p in perm)).reshape(8, 8)
            ref = lam * ref + (1 - lam) * t
        out = model.apply_local_depolarizing(rho, lam, [2, 2, 2])
        assert np.allclose(out, ref, atol=1e-14)

    def test_rejects_qutrit_site(self):
        with pytest.raises(InvalidInput):
            model.apply_local_depolarizing(np.eye(6) / 6, 0.5, [2, 3])


class TestEffectiveGenerators:
    def test_origin(self):
        heff = model.effective_generators(qubit_gens(), [0, 0])
        assert np.allclose(heff[0], SY) and np.allclose(heff[1], SZ)

    def test_single_generator(self):
        g = GeneratorSet((SZ,))
        assert np.allclose(model.effective_generators(g, [0.7])[0], SZ)

    def test_rotated_second_generator(self):
        heff = model.effective_generators(qubit_gens(), [np.pi / 4, 0])
        assert np.allclose(heff[1], 2 / np.pi * (SZ + SX), atol=1e-12)


class TestEncode:
    def test_noiseless_origin(self):
        psi = random_pure(2, np.random.default_rng(5))
        rho = pure_state(psi)
        enc = encode(StatisticalModel(rho, qubit_gens()))
        assert np.allclose(enc.rho, rho)
        for H, d in zip((SY, SZ), enc.drho):
            assert np.allclose(d, 1j * (H @ rho - rho @ H))

    def test_commuting_generator_gives_zero_derivative(self):
        enc = encode(StatisticalModel(pure_state([1, 0]), GeneratorSet((SZ,))))
        assert np.allclose(enc.drho[0], 0)

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from([(2, 2), (2, 3), (3, 2), (4, 3), (8, 2)]), st.integers(0, 2**31 - 1),
           st.booleans())
    def test_derivative_matches_finite_differences(self, dims, seed, local):
        D, d = dims
        m = random_noisy_model(np.random.default_rng(seed), D, d, local and D in (2, 4, 8))
        enc = encode(m)
        for analytic, fd in zip(enc.drho, finite_difference(m)):
            assert np.max(np.abs(analytic - fd)) <= 1e-8
            assert abs(np.trace(analytic)) <= 1e-10

    def test_noise_commutes_with_encoding(self):
        rng = np.random.default_rng(6)
        m = random_noisy_model(rng, 3, 2)
        U = model.build_unitary(m.generators, m.theta)
        before = U @ m.noise.apply(m.probe) @ U.conj().T
        assert np.allclose(encode(m).rho, before, atol=1e-12)

    def test_purity_independent_of_theta(self):
        rng = np.random.default_rng(7)
        m = random_noisy_model(rng, 4, 3)
        p = [model.purity(encode(m.with_theta(rng.uniform(-2, 2, 3))).rho) for _ in range(4)]
        assert np.ptp(p) <= 1e-10


class TestLiftLocalGenerators:
    def test_single_site(self):
        lifted = model.lift_local_generators(qubit_gens(), 1)
        assert np.allclose(lifted[0], SY) and np.allclose(lifted[1], SZ)

    def test_two_sites(self):
        lifted = model.lift_local_generators(GeneratorSet((SZ,)), 2)
        assert np.allclose(lifted[0], np.diag([2, 0, 0, -2]))

    def test_matches_explicit_tensor_product(self):
        rng = np.random.default_rng(8)
        g = qubit_gens()
        probe = random_state(8, rng)
        theta = rng.uniform(-1, 1, 2)
        lam = 0.6
        enc = encode(StatisticalModel(probe, model.lift_local_generators(g, 3),
                                      NoiseSpec.local(lam, 3), theta))
        U = model.build_unitary(g, theta)
        U3 = np.kron(np.kron(U, U), U)
        ref = model.apply_local_depolarizing(U3 @ probe @ U3.conj().T, lam, [2, 2, 2])
        assert np.allclose(enc.rho, ref, atol=1e-10)


class TestReparametrize:
    def test_identity_jacobian(self):
        enc = encode(StatisticalModel(bloch_state([1, 0, 0]), qubit_gens()))
        same = model.reparametrize(enc, np.eye(2))
        assert all(np.allclose(a, b) for a, b in zip(same.drho, enc.drho))

    def test_linear_combination(self):
        enc = encode(StatisticalModel(bloch_state([1, 0, 0]), qubit_gens()))
        J = np.array([[1.0, 2.0], [0.5, -1.0]])
        out = model.reparametrize(enc, J)
        assert np.allclose(out.drho[1], 2 * enc.drho[0] - enc.drho[1])


class TestOrthonormalizeQubit:
    def test_already_orthogonal(self):
        g, J = model.orthonormalize_generators_qubit(qubit_gens(), [0, 0])
        assert np.allclose(g[0], SY) and np.allclose(g[1], SZ)
        assert np.allclose(J, np.diag(np.diag(J)))

    def test_parallel_generators(self):
        with pytest.raises(DegenerateModel):
            model.orthonormalize_generators_qubit(GeneratorSet((SZ, SZ)), [0, 0])

    def test_anticommuting_after_rotation(self):
        g, _ = model.orthonormalize_generators_qubit(qubit_gens(), [np.pi / 4, 0])
        assert np.allclose(g[0] @ g[1] + g[1] @ g[0], 0, atol=1e-12)
