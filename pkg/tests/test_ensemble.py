import numpy as np
import pytest

from toricquench import ensemble
from toricquench.ensemble import (
    ExperimentConfig,
    average,
    child_seed,
    config_hash,
    run_experiment,
)
from toricquench.lattice import CylinderRegion, LatticeConfig, SquareRegion


def small_config(master_seed=101, epsilons=(0.0, 0.4), n_realizations=10, observables=("wilson", "entropy")):
    return ExperimentConfig(
        lattice=LatticeConfig(L=16, epsilon=0.0),
        epsilons=epsilons,
        times=(2.0,),
        regions=(SquareRegion(D=3), CylinderRegion(D=3)),
        n_realizations=n_realizations,
        master_seed=master_seed,
        observables=observables,
    )


class TestAverage:
    def test_constant_samples(self):
        assert average([2.0, 2.0, 2.0]) == (2.0, 0.0)

    def test_two_samples(self):
        mean, stderr = average([0.0, 1.0])
        assert mean == 0.5
        assert abs(stderr - 0.5) < 1e-15

    def test_single_sample_has_no_stderr(self):
        assert average([3.5]) == (3.5, None)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            average([])

    def test_monte_carlo_sanity(self):
        rng = np.random.default_rng(0)
        samples = rng.uniform(0.0, 1.0, size=10_000)
        mean, stderr = average(samples)
        assert abs(mean - 0.5) < 0.01
        assert abs(stderr - 1.0 / np.sqrt(12 * 10_000)) < 5e-4


class TestSeeding:
    def test_child_seeds_deterministic_and_distinct(self):
        assert child_seed(7, 0, 0) == child_seed(7, 0, 0)
        seeds = {child_seed(7, ei, ri) for ei in range(3) for ri in range(50)}
        assert len(seeds) == 150


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            small_config(n_realizations=0)
        with pytest.raises(ValueError):
            ExperimentConfig(
                lattice=LatticeConfig(L=16, epsilon=0.0),
                epsilons=(0.0,),
                times=(1.0,),
                regions=(),
                n_realizations=1,
                master_seed=0,
                observables=("volume",),
            )

    def test_region_fit_checked_upfront(self):
        with pytest.raises(ValueError):
            ExperimentConfig(
                lattice=LatticeConfig(L=16, epsilon=0.0),
                epsilons=(0.0,),
                times=(1.0,),
                regions=(SquareRegion(D=15),),
                n_realizations=1,
                master_seed=0,
                observables=("wilson",),
            )

    def test_hash_is_stable(self):
        assert config_hash(small_config()) == config_hash(small_config())
        assert config_hash(small_config()) != config_hash(small_config(master_seed=102))


class TestRunExperiment:
    def test_single_clean_realization(self):
        config = small_config(epsilons=(0.0,), n_realizations=1)
        result = run_experiment(config)
        for point in result.points:
            assert point.n == 1
            assert point.stderr is None

    def test_zero_variance_for_clean_ensemble(self):
        config = small_config(epsilons=(0.0,), n_realizations=8)
        result = run_experiment(config)
        assert result.points
        for point in result.points:
            assert point.stderr == 0.0

    def test_bit_exact_across_worker_counts(self):
        config = small_config()
        serial = run_experiment(config, threads=1)
        threaded = run_experiment(config, threads=4)
        assert serial.points == threaded.points

    def test_observable_bounds(self):
        result = run_experiment(small_config(epsilons=(0.5,), n_realizations=6))
        for point in result.points:
            if point.statistic in ("row_correlator", "wilson_product"):
                assert point.mean <= 1.0 + 1e-8
            if point.statistic == "row_entropy_bits":
                assert 0.0 <= point.mean <= point.D

    def test_provenance(self):
        config = small_config(n_realizations=2)
        result = run_experiment(config)
        assert result.provenance["master_seed"] == config.master_seed
        assert result.provenance["config_sha256"] == config_hash(config)

    def test_statistic_keys_present(self):
        result = run_experiment(small_config(n_realizations=3))
        stats = {p.statistic for p in result.points}
        assert stats == {"row_correlator", "wilson_product", "wilson_geomean", "row_entropy_bits"}

    def test_stderr_shrinks_with_realizations(self):
        # doubling n should shrink stderr by roughly 1/sqrt(2) on average
        ratios = []
        for seed in range(6):
            base = small_config(
                master_seed=200 + seed, epsilons=(0.5,), n_realizations=40, observables=("wilson",)
            )
            doubled = small_config(
                master_seed=200 + seed, epsilons=(0.5,), n_realizations=80, observables=("wilson",)
            )
            se_small = [p.stderr for p in run_experiment(base).points if p.statistic == "row_correlator"]
            se_large = [p.stderr for p in run_experiment(doubled).points if p.statistic == "row_correlator"]
            ratios.append(se_large[0] / se_small[0])
        assert 0.6 <= np.mean(ratios) <= 0.85

    def test_failure_budget(self, monkeypatch):
        original = ensemble._evaluate_realization

        def flaky(config, epsilon_index, realization_index):
            if realization_index == 0:
                raise RuntimeError("synthetic failure")
            return original(config, epsilon_index, realization_index)

        monkeypatch.setattr(ensemble, "_evaluate_realization", flaky)
        with pytest.raises(RuntimeError):
            run_experiment(small_config(epsilons=(0.3,), n_realizations=10))
        result = run_experiment(small_config(epsilons=(0.3,), n_realizations=120, observables=("wilson",)))
        assert len(result.failures) == 1
        assert all(point.n == 119 for point in result.points)


class TestLightconeEnsemble:
    def test_summary_shape_and_determinism(self):
        config = ExperimentConfig(
            lattice=LatticeConfig(L=48, epsilon=0.0),
            epsilons=(0.0, 0.5),
            times=(5.0,),
            regions=(),
            n_realizations=3,
            master_seed=7,
            observables=("lightcone",),
            lightcone_t_max=30.0,
            lightcone_grid_size=24,
        )
        result = run_experiment(config)
        assert len(result.lightcones) == 2
        for summary in result.lightcones:
            assert summary.distances[-1] == 24
            assert summary.mean_sup.shape == summary.stderr_sup.shape
            assert summary.n == 3
            assert 5.0 in summary.snapshots
        again = run_experiment(config, threads=2)
        np.testing.assert_array_equal(result.lightcones[1].mean_sup, again.lightcones[1].mean_sup)
