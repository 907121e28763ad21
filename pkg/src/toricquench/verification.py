"""Acceptance verification suite, shared by ``toricquench verify`` and pytest.

Each check function runs one acceptance criterion at its stated tolerance and
returns a CheckResult; ``run_acceptance`` collects them.  The fast level runs
the oracle-equivalence, anchor, invariant and reproducibility checks at
reduced statistical scale; the slow level runs all seven criteria at full
scale (several minutes of ensemble computation).
"""

from __future__ import annotations

import hashlib
import shutil
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import oracle
from .chains import ChainCouplings, build_bdg, diagonalize, propagator
from .ensemble import ExperimentConfig, run_experiment
from .lattice import (
    CylinderRegion,
    LatticeConfig,
    SquareRegion,
    assemble_entropy,
    build_disorder_realization,
)
from .observables import build_majorana_gamma, build_string_gamma, interval_entropy, string_correlator
from .quench import QuenchPair, evolve_coefficients

BASE_SEED = 20260801


@dataclass(frozen=True)
class CheckResult:
    name: str
    tolerance: str
    observed: str
    passed: bool
    seconds: float


def _timed(name, tolerance, started, passed, observed) -> CheckResult:
    return CheckResult(
        name=name,
        tolerance=tolerance,
        observed=observed,
        passed=bool(passed),
        seconds=time.perf_counter() - started,
    )


def _random_quench(n: int, rep: int, seed: int = BASE_SEED):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, rep)))
    bonds = 1.0 + 0.5 * rng.uniform(-1.0, 1.0, size=n)
    field = float(rng.uniform(0.2, 1.0))
    pre = ChainCouplings(fields=np.zeros(n), bonds=bonds)
    post = pre.with_fields(field)
    return pre, post


def check_oracle_equivalence(
    sizes=(4, 6, 8),
    n_quenches=25,
    times=(0.0, 0.3, 1.0, 3.0, 10.0),
    tol=1e-8,
) -> CheckResult:
    """Criterion 1: free-fermion pipeline vs dense many-body oracle."""
    started = time.perf_counter()
    worst_corr = 0.0
    worst_ent = 0.0
    for n in sizes:
        pair_ops = {
            (j, l): oracle._string_operator({j: oracle._SX, l: oracle._SX}, n)
            for j in range(n)
            for l in range(j + 1, n)
        }
        intervals = sorted(
            {
                (a, w)
                for a in (0, 1, n // 2)
                for w in (1, 2, n // 2, n - 1)
                if a + w <= n and w >= 1
            }
        )
        for rep in range(n_quenches):
            pre, post = _random_quench(n, rep)
            pair = QuenchPair(diagonalize(build_bdg(pre)), diagonalize(build_bdg(post)))
            ground = oracle.exact_ground_state(pre)
            states = oracle.evolve_grid(post, ground, times)
            for t, state in zip(times, states):
                frame = evolve_coefficients(pair, t)
                for (j, l), op in pair_ops.items():
                    mine = string_correlator(build_string_gamma(frame, j, l))
                    reference = abs(oracle.expectation(state, op))
                    worst_corr = max(worst_corr, abs(mine - reference))
                for a, w in intervals:
                    mine = interval_entropy(build_majorana_gamma(frame, a, w)).entropy
                    reference = oracle.exact_interval_entropy(state, a, w)
                    worst_ent = max(worst_ent, abs(mine - reference))
    passed = worst_corr < tol and worst_ent < tol
    return _timed(
        "oracle_equivalence",
        f"{tol:g}",
        started,
        passed,
        f"max |corr dev|={worst_corr:.2e}, max |entropy dev|={worst_ent:.2e}",
    )


def check_t0_anchors(L=16, tol_corr=1e-10, tol_entropy=1e-8) -> CheckResult:
    """Criterion 2: exact t=0 values of the toric-code initial state."""
    started = time.perf_counter()
    config = LatticeConfig(L=L, epsilon=0.5)
    realization = build_disorder_realization(config, seed=BASE_SEED)
    worst_corr = 0.0
    worst_ent = 0.0
    row_entropies = []
    for row_index, chain in enumerate(realization.rows):
        pair = QuenchPair(
            diagonalize(build_bdg(chain.with_fields(0.0))),
            diagonalize(build_bdg(chain)),
        )
        frame = evolve_coefficients(pair, 0.0)
        if row_index < 3:
            for sep in range(1, L - 1):
                corr = string_correlator(build_string_gamma(frame, 0, sep))
                worst_corr = max(worst_corr, abs(corr - 1.0))
        for width in (1, L // 2, L - 2):
            ent = interval_entropy(build_majorana_gamma(frame, 0, width)).entropy
            worst_ent = max(worst_ent, abs(ent - 1.0))
        row_entropies.append(
            interval_entropy(build_majorana_gamma(frame, 0, L // 2)).entropy
        )
    total = assemble_entropy(row_entropies)
    total_dev = abs(total - 2 * L)
    passed = worst_corr < tol_corr and worst_ent < tol_entropy and total_dev < 2 * L * tol_entropy
    return _timed(
        "t0_anchors",
        f"{tol_corr:g}/{tol_entropy:g}",
        started,
        passed,
        f"|corr-1|={worst_corr:.2e}, |S_row-1|={worst_ent:.2e}, |S_cyl-2L|={total_dev:.2e}",
    )


def check_canonical_invariants(n=32, seed=BASE_SEED) -> CheckResult:
    """Criterion 3: unitarity, canonical frames, pairing range, Pfaffian identity."""
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    bonds = 1.0 + 0.5 * rng.uniform(-1.0, 1.0, size=n)
    chain = ChainCouplings(fields=np.full(n, 0.5), bonds=bonds)
    bdg = build_bdg(chain)
    unitarity = 0.0
    for t in (0.0, 0.7, 13.3, 250.0):
        u = propagator(bdg, t)
        unitarity = max(unitarity, np.max(np.abs(u @ u.conj().T - np.eye(2 * n))))

    pair = QuenchPair(diagonalize(build_bdg(chain.with_fields(0.0))), diagonalize(bdg))
    frame_res = 0.0
    nu_excess = 0.0
    full_entropy = 0.0
    for t in (0.5, 7.7):
        frame = evolve_coefficients(pair, t)
        eye = np.eye(n)
        frame_res = max(
            frame_res,
            np.max(np.abs((frame.phi_t @ frame.phi_t.conj().T).real - eye)),
            np.max(np.abs((frame.psi_t @ frame.psi_t.conj().T).real - eye)),
        )
        for start, width in ((0, n // 4), (3, n // 2), (0, n)):
            gamma = build_majorana_gamma(frame, start, width)
            evals = np.linalg.eigvalsh(1j * gamma.matrix)
            nu_excess = max(nu_excess, float(np.max(np.abs(evals)) - 1.0))
        full_entropy = max(
            full_entropy, interval_entropy(build_majorana_gamma(frame, 0, n)).entropy
        )

    pf_dev = 0.0
    for _ in range(50):
        raw = rng.normal(size=(6, 6))
        anti = raw - raw.T
        pf = oracle.pfaffian_recursive(anti)
        pf_dev = max(pf_dev, abs(pf**2 - np.linalg.det(anti)))

    passed = (
        unitarity < 1e-10
        and frame_res < 1e-10
        and nu_excess < 1e-9
        and full_entropy < 1e-8
        and pf_dev < 1e-8
    )
    return _timed(
        "canonical_invariants",
        "1e-10/1e-9/1e-8",
        started,
        passed,
        f"|UU^dag-1|={unitarity:.2e}, frame={frame_res:.2e}, nu_excess={nu_excess:.2e}, "
        f"S_full={full_entropy:.2e}, |pf^2-det|={pf_dev:.2e}",
    )


def check_lightcone_dichotomy(
    L=256,
    t_max=250.0,
    n_realizations=20,
    grid_size=128,
    threads=1,
    seed=BASE_SEED,
) -> CheckResult:
    """Criterion 4: ballistic clean front vs exponentially localized sup-M."""
    started = time.perf_counter()
    config = ExperimentConfig(
        lattice=LatticeConfig(L=L, epsilon=0.0),
        epsilons=(0.0, 0.5),
        times=(),
        regions=(),
        n_realizations=n_realizations,
        master_seed=seed,
        observables=("lightcone",),
        lightcone_t_max=t_max,
        lightcone_grid_size=grid_size,
    )
    result = run_experiment(config, threads=threads)
    summaries = {s.epsilon: s for s in result.lightcones}
    clean, disordered = summaries[0.0], summaries[0.5]
    velocity = clean.fit.velocity or 0.0
    velocity_r2 = clean.fit.velocity_r2 or 0.0
    ratio = float(clean.mean_sup[32] / disordered.mean_sup[32])
    passed = (
        velocity > 0.0
        and velocity_r2 > 0.99
        and disordered.fit.mu > 0.0
        and disordered.fit.r2 > 0.9
        and not disordered.fit.no_decay
        and ratio >= 10.0
    )
    return _timed(
        "lightcone_dichotomy",
        "r2>0.99/0.9,x10",
        started,
        passed,
        f"v={velocity:.3f} (r2={velocity_r2:.4f}), mu={disordered.fit.mu:.3f} "
        f"(r2={disordered.fit.r2:.4f}), clean/disordered@32={ratio:.1f}",
    )


def _points_by(result, statistic):
    return {
        (p.epsilon, p.t, p.D): p for p in result.points if p.statistic == statistic
    }


def check_wilson_resilience(
    L=128, n_realizations=100, t=250.0, threads=1, seed=BASE_SEED
) -> CheckResult:
    """Criterion 5: correlator grows with disorder and plateaus in D."""
    started = time.perf_counter()
    epsilons = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    config = ExperimentConfig(
        lattice=LatticeConfig(L=L, epsilon=0.0),
        epsilons=epsilons,
        times=(t,),
        regions=(SquareRegion(D=32), SquareRegion(D=64)),
        n_realizations=n_realizations,
        master_seed=seed,
        observables=("wilson",),
    )
    result = run_experiment(config, threads=threads)
    corr = _points_by(result, "row_correlator")

    monotone = True
    for lo, hi in zip(epsilons[:-1], epsilons[1:]):
        a, b = corr[(lo, t, 32)], corr[(hi, t, 32)]
        slack = np.hypot(a.stderr or 0.0, b.stderr or 0.0)
        if b.mean < a.mean - slack:
            monotone = False
    p32, p64 = corr[(0.5, t, 32)], corr[(0.5, t, 64)]
    plateau_gap = abs(p32.mean - p64.mean)
    plateau_tol = 3.0 * np.hypot(p32.stderr or 0.0, p64.stderr or 0.0)
    clean64 = corr[(0.0, t, 64)].mean
    contrast = clean64 < 0.1 * p64.mean
    passed = monotone and plateau_gap <= plateau_tol and contrast
    return _timed(
        "wilson_resilience",
        "1se/3se/x10",
        started,
        passed,
        f"monotone={monotone}, |D32-D64|={plateau_gap:.4f} (tol {plateau_tol:.4f}), "
        f"clean@64={clean64:.2e} vs eps0.5@64={p64.mean:.4f}",
    )


def check_entropy_boundary_law(
    L=128, n_realizations=100, t=250.0, threads=1, seed=BASE_SEED
) -> CheckResult:
    """Criterion 6: D-independent disordered entropy vs growing clean entropy."""
    started = time.perf_counter()
    config = ExperimentConfig(
        lattice=LatticeConfig(L=L, epsilon=0.0),
        epsilons=(0.0, 0.5),
        times=(t,),
        regions=(CylinderRegion(D=16), CylinderRegion(D=32), CylinderRegion(D=64)),
        n_realizations=n_realizations,
        master_seed=seed,
        observables=("entropy",),
    )
    result = run_experiment(config, threads=threads)
    entropy = _points_by(result, "row_entropy_bits")
    s32, s64 = entropy[(0.5, t, 32)], entropy[(0.5, t, 64)]
    gap = abs(s32.mean - s64.mean)
    tol = 3.0 * np.hypot(s32.stderr or 0.0, s64.stderr or 0.0)
    clean = [entropy[(0.0, t, d)].mean for d in (16, 32, 64)]
    growing = clean[0] < clean[1] < clean[2]
    passed = gap <= tol and growing
    return _timed(
        "entropy_boundary_law",
        "3se/strict",
        started,
        passed,
        f"|S32-S64|={gap:.4f} (tol {tol:.4f}), clean S(16,32,64)=({clean[0]:.3f},{clean[1]:.3f},{clean[2]:.3f})",
    )


def _small_experiment(master_seed: int) -> ExperimentConfig:
    return ExperimentConfig(
        lattice=LatticeConfig(L=24, epsilon=0.0),
        epsilons=(0.0, 0.3),
        times=(3.0,),
        regions=(SquareRegion(D=4), CylinderRegion(D=4)),
        n_realizations=30,
        master_seed=master_seed,
        observables=("wilson", "entropy"),
    )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def check_reproducibility(threads=1, seed=BASE_SEED) -> CheckResult:
    """Criterion 7: byte-identical reruns; seed-independent statistics at 3 sigma."""
    from .cli import execute_entropy, execute_wilson

    started = time.perf_counter()
    workdir = Path(tempfile.mkdtemp(prefix="toricquench-verify-"))
    try:
        config = _small_experiment(seed)
        hashes = []
        for attempt in ("a", "b"):
            out = workdir / attempt
            out.mkdir()
            execute_wilson(config, out, threads=threads)
            execute_entropy(config, out, threads=threads)
            hashes.append((_sha256(out / "wilson.csv"), _sha256(out / "entropy.csv")))
        identical = hashes[0] == hashes[1]

        alt = run_experiment(_small_experiment(seed + 99), threads=threads)
        base = run_experiment(config, threads=threads)
        alt_points = {(p.epsilon, p.t, p.region, p.D, p.statistic): p for p in alt.points}
        worst_sigma = 0.0
        consistent = True
        for point in base.points:
            other = alt_points[(point.epsilon, point.t, point.region, point.D, point.statistic)]
            combined = np.hypot(point.stderr or 0.0, other.stderr or 0.0)
            delta = abs(point.mean - other.mean)
            if combined == 0.0:
                consistent = consistent and delta < 1e-12
            else:
                worst_sigma = max(worst_sigma, delta / combined)
                consistent = consistent and delta <= 3.0 * combined
        passed = identical and consistent
        return _timed(
            "statistical_reproducibility",
            "bytes/3se",
            started,
            passed,
            f"identical_hashes={identical}, worst |dm|/se={worst_sigma:.2f}",
        )
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


def run_acceptance(level: str = "fast", threads: int = 1) -> list[CheckResult]:
    """Run the verification checks for the given level."""
    if level == "fast":
        return [
            check_oracle_equivalence(sizes=(4, 6), n_quenches=8),
            check_t0_anchors(),
            check_canonical_invariants(),
            check_reproducibility(threads=threads),
        ]
    if level == "slow":
        return [
            check_oracle_equivalence(),
            check_t0_anchors(),
            check_canonical_invariants(),
            check_lightcone_dichotomy(threads=threads),
            check_wilson_resilience(threads=threads),
            check_entropy_boundary_law(threads=threads),
            check_reproducibility(threads=threads),
        ]
    raise ValueError(f"unknown level {level!r}")
