"""Disorder-ensemble orchestration with reproducible seeding.

A run sweeps disorder strengths and realizations, evaluates the requested
per-row observables through the free-fermion pipeline, and aggregates them
with per-point mean, standard error and sample count.  Child seeds derive
from (master seed, disorder index, realization index) through counter-keyed
seed sequences, so results are bit-identical for a given configuration no
matter how many workers execute the realizations.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .chains import (
    LocalizationFit,
    build_bdg,
    diagonalize,
    fit_decay,
    lightcone_profile,
    linear_fit,
    distance_profile,
)
from .lattice import (
    CylinderRegion,
    LatticeConfig,
    SquareRegion,
    assemble_wilson,
    build_disorder_realization,
    cylinder_entropy_jobs,
    wilson_loop_jobs,
)
from .observables import build_majorana_gamma, build_string_gamma, interval_entropy, string_correlator
from .quench import QuenchPair, evolve_coefficients

OBSERVABLES = ("lightcone", "wilson", "row_correlator", "entropy")
FAILURE_BUDGET = 0.01


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one disorder-ensemble experiment."""

    lattice: LatticeConfig
    epsilons: tuple[float, ...]
    times: tuple[float, ...]
    regions: tuple[SquareRegion | CylinderRegion, ...]
    n_realizations: int
    master_seed: int
    observables: tuple[str, ...]
    lightcone_t_max: float = 250.0
    lightcone_grid_size: int = 512
    lightcone_row: int = 0
    lightcone_grid: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ValueError(f"unknown observables: {sorted(unknown)}")
        if not self.observables:
            raise ValueError("no observables requested")
        for eps in self.epsilons:
            replace(self.lattice, epsilon=eps)  # validates range against the lattice
        if not self.epsilons:
            raise ValueError("no disorder strengths requested")
        L = self.lattice.L
        for region in self.regions:
            if not 1 <= region.D <= L - 2:
                raise ValueError(f"region width {region.D} does not fit an L={L} torus")
            col = region.anchor[1] if isinstance(region, SquareRegion) else region.anchor_column
            if not 0 <= col <= L - region.D:
                raise ValueError(f"column anchor {col} wraps a width-{region.D} region on {L} columns")

    def lattice_at(self, epsilon: float) -> LatticeConfig:
        return replace(self.lattice, epsilon=epsilon)


def region_label(region) -> str:
    if isinstance(region, SquareRegion):
        return f"square_D{region.D}_r{region.anchor[0]}_c{region.anchor[1]}"
    return f"cylinder_D{region.D}_a{region.anchor_column}"


@dataclass(frozen=True)
class EnsemblePoint:
    """Disorder-averaged scalar observable at one (epsilon, t, region)."""

    epsilon: float
    t: float
    region: str
    D: int
    statistic: str
    mean: float
    stderr: float | None
    n: int


@dataclass(frozen=True, eq=False)
class LightconeSummary:
    """Disorder-averaged sup-M profile and front data for one epsilon."""

    epsilon: float
    distances: np.ndarray
    mean_sup: np.ndarray
    stderr_sup: np.ndarray
    t_grid: np.ndarray
    mean_front_radius: np.ndarray
    n: int
    fit: LocalizationFit
    snapshots: dict


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    points: tuple[EnsemblePoint, ...]
    lightcones: tuple[LightconeSummary, ...]
    failures: tuple[tuple, ...]
    provenance: dict


def average(samples) -> tuple[float, float | None]:
    """Arithmetic mean and standard error s / sqrt(n) (ddof = 1).

    A single sample has no standard error and returns None for it.
    """
    values = np.asarray(list(samples), dtype=float)
    if values.size == 0:
        raise ValueError("cannot average zero samples")
    mean = float(np.mean(values))
    if values.size == 1:
        return mean, None
    return mean, float(np.std(values, ddof=1) / np.sqrt(values.size))


def child_seed(master_seed: int, epsilon_index: int, realization_index: int) -> int:
    """64-bit realization seed derived from the master seed and counters."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(epsilon_index, realization_index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def config_to_dict(config: ExperimentConfig) -> dict:
    regions = []
    for region in config.regions:
        if isinstance(region, SquareRegion):
            regions.append({"kind": "square", "D": region.D, "row": region.anchor[0], "col": region.anchor[1]})
        else:
            regions.append({"kind": "cylinder", "D": region.D, "col": region.anchor_column})
    return {
        "lattice": {
            "L": config.lattice.L,
            "base_coupling": config.lattice.base_coupling,
            "field_strength": config.lattice.field_strength,
            "sector": config.lattice.sector,
        },
        "epsilons": list(config.epsilons),
        "times": list(config.times),
        "regions": regions,
        "n_realizations": config.n_realizations,
        "master_seed": config.master_seed,
        "observables": list(config.observables),
        "lightcone": {
            "t_max": config.lightcone_t_max,
            "grid_size": config.lightcone_grid_size,
            "row": config.lightcone_row,
            "grid": list(config.lightcone_grid) if config.lightcone_grid is not None else None,
        },
    }


def config_hash(config: ExperimentConfig) -> str:
    payload = json.dumps(config_to_dict(config), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()


def _lightcone_grid(config: ExperimentConfig) -> np.ndarray:
    if config.lightcone_grid is not None:
        return np.unique(np.asarray(config.lightcone_grid, dtype=float))
    grid = np.concatenate([[0.0], np.geomspace(0.1, config.lightcone_t_max, config.lightcone_grid_size)])
    return np.unique(np.concatenate([grid, np.asarray(config.times, dtype=float)]))


def _evaluate_realization(config: ExperimentConfig, epsilon_index: int, realization_index: int):
    """All per-realization observable values, keyed for canonical aggregation."""
    epsilon = config.epsilons[epsilon_index]
    lattice = config.lattice_at(epsilon)
    seed = child_seed(config.master_seed, epsilon_index, realization_index)
    realization = build_disorder_realization(lattice, seed)

    want_strings = bool({"wilson", "row_correlator"} & set(config.observables))
    want_entropy = "entropy" in config.observables

    string_jobs = {}
    entropy_jobs = {}
    per_row = {}
    for region in config.regions:
        if isinstance(region, SquareRegion) and want_strings:
            jobs = wilson_loop_jobs(realization, region)
            string_jobs[region_label(region)] = jobs
        elif isinstance(region, CylinderRegion) and want_entropy:
            jobs = cylinder_entropy_jobs(realization, region)
            entropy_jobs[region_label(region)] = jobs
        else:
            continue
        for job_index, job in enumerate(jobs):
            per_row.setdefault(job.row, []).append((region_label(region), job_index, job.sites))

    string_values = {label: {t: np.empty(len(jobs)) for t in config.times} for label, jobs in string_jobs.items()}
    entropy_values = {label: {t: np.empty(len(jobs)) for t in config.times} for label, jobs in entropy_jobs.items()}

    for row in sorted(per_row):
        chain = realization.rows[row]
        pair = QuenchPair(
            diagonalize(build_bdg(chain.with_fields(0.0))),
            diagonalize(build_bdg(chain)),
        )
        for t in config.times:
            frame = evolve_coefficients(pair, t)
            for label, job_index, sites in per_row[row]:
                if label in string_values:
                    gamma = build_string_gamma(frame, sites[0], sites[1])
                    string_values[label][t][job_index] = string_correlator(gamma)
                else:
                    gamma = build_majorana_gamma(frame, sites[0], sites[1] - sites[0])
                    entropy_values[label][t][job_index] = interval_entropy(gamma).entropy

    scalars = {}
    for region in config.regions:
        label = region_label(region)
        if label in string_values:
            for t in config.times:
                values = string_values[label][t]
                assembly = assemble_wilson(values)
                scalars[(label, region.D, float(t), "row_correlator")] = float(np.mean(values))
                if "wilson" in config.observables:
                    scalars[(label, region.D, float(t), "wilson_product")] = assembly.product
                    scalars[(label, region.D, float(t), "wilson_geomean")] = assembly.geometric_mean
        elif label in entropy_values:
            for t in config.times:
                values = entropy_values[label][t]
                scalars[(label, region.D, float(t), "row_entropy_bits")] = float(np.mean(values))

    lightcone_payload = None
    if "lightcone" in config.observables:
        chain = realization.rows[config.lightcone_row % len(realization.rows)].dual()
        snapshot_times = tuple(config.times) if realization_index == 0 else ()
        profile = lightcone_profile(build_bdg(chain), _lightcone_grid(config), snapshot_times)
        distances, values = distance_profile(profile.sup_m)
        lightcone_payload = {
            "distances": distances,
            "profile": values,
            "t_grid": profile.t_grid,
            "front_radius": profile.front_radius,
            "snapshots": profile.snapshots,
        }
    return scalars, lightcone_payload


def run_experiment(config: ExperimentConfig, threads: int = 1) -> EnsembleResult:
    """Run the full ensemble and aggregate deterministically.

    Realizations are independent work items; aggregation always happens in
    (epsilon index, realization index) order, so the result does not depend
    on the worker count.  Failed realizations are recorded and excluded; the
    run aborts if more than 1% of them fail.
    """
    tasks = [
        (ei, ri)
        for ei in range(len(config.epsilons))
        for ri in range(config.n_realizations)
    ]
    outcomes = {}

    def work(task):
        ei, ri = task
        try:
            return task, _evaluate_realization(config, ei, ri), None
        except Exception as exc:  # noqa: BLE001 - bookkeeping decides below
            return task, None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for task, value, error in pool.map(work, tasks):
                outcomes[task] = (value, error)
    else:
        for task in tasks:
            task, value, error = work(task)
            outcomes[task] = (value, error)

    failures = tuple(
        (config.epsilons[ei], ri, error)
        for (ei, ri), (_, error) in sorted(outcomes.items())
        if error is not None
    )
    if len(failures) > FAILURE_BUDGET * len(tasks):
        raise RuntimeError(
            f"{len(failures)} of {len(tasks)} realizations failed: {failures[:3]}..."
        )

    points = []
    lightcones = []
    for ei, epsilon in enumerate(config.epsilons):
        collected = {}
        lc_profiles = []
        lc_fronts = []
        lc_snapshots = {}
        lc_axis = None
        for ri in range(config.n_realizations):
            value, error = outcomes[(ei, ri)]
            if error is not None:
                continue
            scalars, lightcone_payload = value
            for key, scalar in scalars.items():
                collected.setdefault(key, []).append(scalar)
            if lightcone_payload is not None:
                lc_profiles.append(lightcone_payload["profile"])
                lc_fronts.append(lightcone_payload["front_radius"])
                lc_axis = (lightcone_payload["distances"], lightcone_payload["t_grid"])
                if lightcone_payload["snapshots"]:
                    lc_snapshots = lightcone_payload["snapshots"]
        for (label, D, t, statistic) in sorted(collected):
            samples = collected[(label, D, t, statistic)]
            mean, stderr = average(samples)
            points.append(
                EnsemblePoint(
                    epsilon=epsilon,
                    t=t,
                    region=label,
                    D=D,
                    statistic=statistic,
                    mean=mean,
                    stderr=stderr,
                    n=len(samples),
                )
            )
        if lc_profiles:
            lightcones.append(
                _summarize_lightcone(epsilon, lc_axis, lc_profiles, lc_fronts, lc_snapshots)
            )

    provenance = {
        "master_seed": config.master_seed,
        "config_sha256": config_hash(config),
        "version": __version__,
        "n_failures": len(failures),
    }
    return EnsembleResult(
        points=tuple(points),
        lightcones=tuple(lightcones),
        failures=failures,
        provenance=provenance,
    )


def _summarize_lightcone(epsilon, axis, profiles, fronts, snapshots) -> LightconeSummary:
    distances, t_grid = axis
    stacked = np.vstack(profiles)
    mean_sup = stacked.mean(axis=0)
    if stacked.shape[0] > 1:
        stderr_sup = stacked.std(axis=0, ddof=1) / np.sqrt(stacked.shape[0])
    else:
        stderr_sup = np.zeros_like(mean_sup)
    mean_front = np.vstack(fronts).mean(axis=0)

    mu, prefactor, zeta, r2, no_decay = fit_decay(distances[1:], mean_sup[1:])
    velocity = velocity_r2 = None
    window = (t_grid >= 5.0) & (t_grid <= 50.0) & (mean_front < distances[-1] - 2)
    if np.count_nonzero(window) >= 3:
        velocity, _, velocity_r2 = linear_fit(t_grid[window], mean_front[window])
    fit = LocalizationFit(
        mu=mu,
        prefactor=prefactor,
        zeta=zeta,
        r2=r2,
        no_decay=no_decay,
        velocity=velocity,
        velocity_r2=velocity_r2,
    )
    return LightconeSummary(
        epsilon=epsilon,
        distances=distances,
        mean_sup=mean_sup,
        stderr_sup=stderr_sup,
        t_grid=t_grid,
        mean_front_radius=mean_front,
        n=len(profiles),
        fit=fit,
        snapshots=snapshots,
    )
