import numpy as np
import pytest

from toricquench import oracle
from toricquench.chains import ChainCouplings
from toricquench.errors import DegenerateGroundStateError


def make_chain(fields, bonds):
    return ChainCouplings(fields=np.asarray(fields, float), bonds=np.asarray(bonds, float))


class TestGroundState:
    def test_field_dominated_limit(self):
        # g -> 0 with unit fields: polarized ground state, energy computed dense
        chain = make_chain([1.0, 1.0], [1e-9, 1e-9])
        state = oracle.exact_ground_state(chain)
        energy = oracle.expectation(state, oracle.dense_hamiltonian(chain)).real
        assert abs(energy - (-2.0)) < 1e-6
        assert abs(abs(state.amplitudes[0]) - 1.0) < 1e-6  # all spins up

    def test_bond_dominated_limit_is_ghz(self):
        chain = make_chain([1e-6] * 4, [1.0] * 4)
        state = oracle.exact_ground_state(chain)
        for j in range(4):
            for l in range(j + 1, 4):
                corr = oracle.exact_string_correlator(state, j, l)
                assert abs(corr - 1.0) < 1e-5

    def test_even_parity(self):
        chain = make_chain([0.5] * 6, 1.0 + 0.3 * np.sin(np.arange(6)))
        state = oracle.exact_ground_state(chain)
        parity = np.sum(oracle.parity_diagonal(6) * np.abs(state.amplitudes) ** 2)
        assert abs(parity - 1.0) < 1e-12

    def test_degenerate_sector_reported(self):
        # zero fields on half the sites cost nothing to flip pairwise
        chain = make_chain([1.0, 1.0, 0.0, 0.0], [1e-12] * 4)
        with pytest.raises(DegenerateGroundStateError):
            oracle.exact_ground_state(chain)

    def test_size_cap(self):
        chain = make_chain([0.5] * 13, [1.0] * 13)
        with pytest.raises(ValueError):
            oracle.exact_ground_state(chain)


class TestEvolution:
    def test_identity_at_zero(self):
        chain = make_chain([0.5] * 4, [1.0] * 4)
        state = oracle.exact_ground_state(chain)
        evolved = oracle.exact_evolve(chain, state, 0.0)
        np.testing.assert_allclose(evolved.amplitudes, state.amplitudes, atol=1e-12)

    def test_eigenstate_gets_only_phase(self):
        chain = make_chain([0.7] * 4, [1.0] * 4)
        state = oracle.exact_ground_state(chain)
        evolved = oracle.exact_evolve(chain, state, 2.3)
        overlap = abs(state.amplitudes.conj() @ evolved.amplitudes)
        assert abs(overlap - 1.0) < 1e-12

    def test_norm_and_energy_conserved(self):
        pre = make_chain([0.0] * 6, 1.0 + 0.4 * np.cos(np.arange(6)))
        post = make_chain([0.5] * 6, pre.bonds)
        state = oracle.exact_ground_state(pre)
        ham = oracle.dense_hamiltonian(post)
        e0 = oracle.expectation(state, ham).real
        for t in (0.0, 1.0, 2.0, 5.0):
            evolved = oracle.exact_evolve(post, state, t)
            assert abs(np.linalg.norm(evolved.amplitudes) - 1.0) < 1e-12
            assert abs(oracle.expectation(evolved, ham).real - e0) < 1e-10


class TestObservables:
    def test_correlator_at_coincident_sites(self):
        chain = make_chain([0.5] * 4, [1.0] * 4)
        state = oracle.exact_ground_state(chain)
        assert oracle.exact_string_correlator(state, 2, 2) == 1.0

    def test_product_state_entropy_zero(self):
        amps = np.zeros(2**5, dtype=complex)
        amps[0] = 1.0  # all spins up
        state = oracle.DenseState(amplitudes=amps, num_sites=5)
        for width in (1, 2, 4):
            assert oracle.exact_interval_entropy(state, 0, width) < 1e-12

    def test_ghz_interval_entropy_is_one_bit(self):
        chain = make_chain([1e-8] * 6, [1.0] * 6)
        state = oracle.exact_ground_state(chain)
        assert abs(oracle.exact_interval_entropy(state, 2, 2) - 1.0) < 1e-6

    def test_full_chain_entropy_zero_and_complement_symmetry(self):
        pre = make_chain([0.0] * 6, 1.0 + 0.4 * np.sin(1 + np.arange(6)))
        post = make_chain([0.8] * 6, pre.bonds)
        state = oracle.exact_evolve(post, oracle.exact_ground_state(pre), 1.7)
        assert oracle.exact_interval_entropy(state, 0, 6) < 1e-10
        s_left = oracle.exact_interval_entropy(state, 0, 2)
        s_right = oracle.exact_interval_entropy(state, 2, 4)
        assert abs(s_left - s_right) < 1e-10

    def test_majorana_covariance_anticommutators(self):
        chain = make_chain([0.5] * 4, [1.0] * 4)
        state = oracle.exact_ground_state(chain)
        cov = oracle.exact_majorana_covariance(state)
        # <d_m d_n> + <d_n d_m> = 2 delta_mn for Majorana operators
        np.testing.assert_allclose(cov + cov.T, 2 * np.eye(8), atol=1e-12)


class TestPfaffian:
    def test_two_by_two(self):
        assert oracle.pfaffian_recursive(np.array([[0.0, 3.5], [-3.5, 0.0]])) == 3.5

    def test_block_diagonal_multiplicativity(self):
        a, b = 1.7, -0.4
        mat = np.zeros((4, 4))
        mat[0, 1], mat[1, 0] = a, -a
        mat[2, 3], mat[3, 2] = b, -b
        assert abs(oracle.pfaffian_recursive(mat) - a * b) < 1e-12

    def test_square_equals_determinant(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            raw = rng.normal(size=(6, 6))
            anti = raw - raw.T
            pf = oracle.pfaffian_recursive(anti)
            assert abs(pf**2 - np.linalg.det(anti)) < 1e-8

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            oracle.pfaffian_recursive(np.ones((3, 3)))
        with pytest.raises(ValueError):
            oracle.pfaffian_recursive(np.ones((4, 4)))
