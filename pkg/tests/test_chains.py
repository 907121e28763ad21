import numpy as np
import pytest
import scipy.linalg

from toricquench import oracle
from toricquench.chains import (
    BdGMatrix,
    ChainCouplings,
    LightconeProfile,
    build_bdg,
    diagonalize,
    fit_localization,
    lightcone_profile,
    propagator,
)


def disordered_chain(n, epsilon=0.5, field=0.5, seed=0, picture="mu"):
    rng = np.random.default_rng(seed)
    bonds = 1.0 + epsilon * rng.uniform(-1.0, 1.0, size=n)
    return ChainCouplings(fields=np.full(n, field), bonds=bonds, picture=picture)


class TestChainCouplings:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChainCouplings(fields=np.zeros(1), bonds=np.zeros(1))
        with pytest.raises(ValueError):
            ChainCouplings(fields=-np.ones(4), bonds=np.ones(4))
        with pytest.raises(ValueError):
            ChainCouplings(fields=np.ones(4), bonds=np.ones(4), picture="nu")

    def test_dual_swaps_roles(self):
        chain = disordered_chain(6)
        dual = chain.dual()
        assert dual.picture == "tau"
        np.testing.assert_array_equal(dual.fields, chain.bonds)
        np.testing.assert_array_equal(dual.bonds, chain.fields)


class TestBuildBdg:
    def test_decoupled_sites_spectrum(self):
        # two free spins in a field: single-particle levels at +-2f
        chain = ChainCouplings(fields=np.array([1.0, 1.0]), bonds=np.zeros(2))
        bdg = build_bdg(chain)
        evals = np.sort(np.linalg.eigvalsh(bdg.matrix))
        np.testing.assert_allclose(evals, [-2.0, -2.0, 2.0, 2.0], atol=1e-12)

    def test_uniform_dispersion_antiperiodic(self):
        n = 64
        chain = ChainCouplings(fields=np.ones(n), bonds=np.full(n, 0.5), picture="tau")
        evals = np.sort(np.linalg.eigvalsh(build_bdg(chain).matrix))
        k = np.pi * (2 * np.arange(n) + 1) / n
        omega = 2.0 * np.sqrt(1.0 + 0.25 - np.cos(k))
        expected = np.sort(np.concatenate([omega, -omega]))
        np.testing.assert_allclose(evals, expected, atol=1e-12)

    def test_hermiticity_disordered(self):
        bdg = build_bdg(disordered_chain(33, seed=7))
        assert np.max(np.abs(bdg.matrix - bdg.matrix.T)) < 1e-14

    def test_particle_hole_symmetry_enforced(self):
        good = build_bdg(disordered_chain(8)).matrix.copy()
        good[0, 0] += 1e-3  # breaks both symmetry classes
        with pytest.raises(ValueError):
            BdGMatrix(good)


class TestDiagonalize:
    def test_decoupled_sites(self):
        fields = np.array([0.3, 1.2, 0.7, 2.0])
        chain = ChainCouplings(fields=fields, bonds=np.zeros(4))
        spec = diagonalize(build_bdg(chain), chain)
        np.testing.assert_allclose(np.sort(spec.omega), np.sort(2 * fields), atol=1e-12)
        # phi and psi are signed permutations of the identity
        for block in (spec.phi, spec.psi):
            np.testing.assert_allclose(np.sort(np.abs(block), axis=1)[:, :-1], 0.0, atol=1e-12)
            np.testing.assert_allclose(np.max(np.abs(block), axis=1), 1.0, atol=1e-12)

    def test_zero_field_gives_bond_energies(self):
        rng = np.random.default_rng(3)
        bonds = 1.0 + 0.5 * rng.uniform(-1, 1, 8)
        chain = ChainCouplings(fields=np.zeros(8), bonds=bonds)
        spec = diagonalize(build_bdg(chain))
        np.testing.assert_allclose(np.sort(spec.omega), np.sort(2 * bonds), atol=1e-10)

    def test_orthogonality_conditions(self):
        chain = disordered_chain(24, seed=5)
        spec = diagonalize(build_bdg(chain))
        n = chain.length
        eye = np.eye(n)
        assert np.max(np.abs(spec.gblock @ spec.gblock.T + spec.hblock @ spec.hblock.T - eye)) < 1e-10
        assert np.max(np.abs(spec.gblock @ spec.hblock.T + spec.hblock @ spec.gblock.T)) < 1e-10
        assert np.max(np.abs(spec.phi @ spec.phi.T - eye)) < 1e-10
        assert np.max(np.abs(spec.psi @ spec.psi.T - eye)) < 1e-10
        assert np.all(spec.omega >= -1e-12)

    def test_ground_energy_matches_oracle(self):
        chain = ChainCouplings(fields=np.full(8, 0.5), bonds=np.ones(8))
        spec = diagonalize(build_bdg(chain))
        state = oracle.exact_ground_state(chain)
        energy = oracle.expectation(state, oracle.dense_hamiltonian(chain)).real
        assert abs(spec.ground_energy - energy) < 1e-10

    def test_spectrum_matches_dense_eigh(self):
        bdg = build_bdg(disordered_chain(16, seed=11))
        spec = diagonalize(bdg)
        evals = np.linalg.eigvalsh(bdg.matrix)
        np.testing.assert_allclose(np.sort(spec.omega), np.sort(evals[evals > 0]), atol=1e-10)


class TestPropagator:
    def test_identity_at_zero(self):
        bdg = build_bdg(disordered_chain(12))
        np.testing.assert_allclose(propagator(bdg, 0.0), np.eye(24), atol=1e-14)

    def test_unitarity(self):
        bdg = build_bdg(disordered_chain(20, seed=2))
        for t in (0.3, 5.0, 250.0):
            u = propagator(bdg, t)
            assert np.max(np.abs(u @ u.conj().T - np.eye(40))) < 1e-10

    def test_group_property(self):
        bdg = build_bdg(disordered_chain(10, seed=4))
        u1, u2, u12 = propagator(bdg, 1.3), propagator(bdg, 2.4), propagator(bdg, 3.7)
        assert np.max(np.abs(u1 @ u2 - u12)) < 1e-9

    def test_matches_dense_exponential(self):
        bdg = build_bdg(disordered_chain(32, seed=6))
        t = 2.7
        direct = scipy.linalg.expm(-1j * t * bdg.matrix)
        assert np.max(np.abs(propagator(bdg, t) - direct)) < 1e-9

    def test_matches_many_body_heisenberg_evolution(self):
        chain = disordered_chain(8, seed=9)
        t = 3.0
        mine = propagator(build_bdg(chain), t)
        reference = oracle.exact_propagator(chain, t)
        assert np.max(np.abs(mine - reference)) < 1e-9


class TestLightcone:
    def test_zero_grid_gives_identity_pattern(self):
        bdg = build_bdg(disordered_chain(16))
        profile = lightcone_profile(bdg, [0.0])
        np.testing.assert_allclose(profile.sup_m, np.eye(16), atol=1e-12)

    def test_entries_bounded_and_diagonal(self):
        bdg = build_bdg(disordered_chain(24, seed=8))
        profile = lightcone_profile(bdg, [0.0, 1.0, 10.0])
        assert np.all(profile.sup_m >= 0.0)
        assert np.all(profile.sup_m <= 2.0 + 1e-12)
        assert np.all(np.diag(profile.sup_m) >= 1.0 - 1e-12)  # grid contains t=0

    def test_snapshot_matches_propagator(self):
        bdg = build_bdg(disordered_chain(10))
        profile = lightcone_profile(bdg, [1.5], snapshot_times=[1.5])
        u = propagator(bdg, 1.5)
        expected = np.abs(u[0::2, 0::2]) + np.abs(u[0::2, 1::2])
        np.testing.assert_allclose(profile.snapshots[1.5], expected, atol=1e-12)


class TestLocalizationFit:
    def test_synthetic_exponential(self):
        n = 64
        dist = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
        dist = np.minimum(dist, n - dist)
        profile = LightconeProfile(
            sup_m=np.exp(-0.5 * dist),
            t_grid=np.array([0.0]),
            front_radius=np.array([0.0]),
            front_threshold=1e-3,
            snapshots={},
        )
        fit = fit_localization(profile)
        assert abs(fit.mu - 0.5) < 1e-6
        assert fit.r2 > 1.0 - 1e-9
        assert not fit.no_decay

    def test_clean_chain_ballistic_front(self):
        n = 128
        chain = ChainCouplings(fields=np.ones(n), bonds=np.full(n, 0.5), picture="tau")
        grid = np.linspace(0.0, 50.0, 26)
        profile = lightcone_profile(build_bdg(chain), grid)
        fit = fit_localization(profile)
        assert fit.velocity is not None and fit.velocity > 0
        assert fit.velocity_r2 > 0.99

    def test_disordered_profile_decays(self):
        n = 128
        profiles = []
        for seed in range(5):
            chain = disordered_chain(n, seed=seed, picture="mu").dual()
            grid = np.concatenate([[0.0], np.geomspace(0.1, 100.0, 40)])
            profiles.append(lightcone_profile(build_bdg(chain), grid).sup_m)
        mean_profile = LightconeProfile(
            sup_m=np.mean(profiles, axis=0),
            t_grid=grid,
            front_radius=np.zeros_like(grid),
            front_threshold=1e-3,
            snapshots={},
        )
        fit = fit_localization(mean_profile)
        assert fit.mu > 0
        assert fit.r2 > 0.9
        assert not fit.no_decay

    def test_flat_profile_flags_no_decay(self):
        n = 64
        rng = np.random.default_rng(0)
        flat = 0.1 * np.ones((n, n)) * np.exp(0.01 * rng.normal(size=(n, n)))
        profile = LightconeProfile(
            sup_m=flat,
            t_grid=np.array([0.0]),
            front_radius=np.array([0.0]),
            front_threshold=1e-3,
            snapshots={},
        )
        assert fit_localization(profile).no_decay

    def test_small_profile_rejected(self):
        profile = LightconeProfile(
            sup_m=np.eye(16),
            t_grid=np.array([0.0]),
            front_radius=np.array([0.0]),
            front_threshold=1e-3,
            snapshots={},
        )
        with pytest.raises(ValueError):
            fit_localization(profile)
