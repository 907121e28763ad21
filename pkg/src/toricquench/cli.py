"""Command-line entry point.

Subcommands ``lightcone``, ``wilson`` and ``entropy`` run preset experiments
from a YAML config and write CSV data files, PNG figures and a JSON run
manifest into the output directory; ``verify`` runs the acceptance checks.
Identical config and seed reproduce byte-identical data files.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
from pathlib import Path

import click
import yaml

from . import __version__
from .ensemble import (
    EnsembleResult,
    ExperimentConfig,
    config_hash,
    config_to_dict,
    run_experiment,
)
from .lattice import CylinderRegion, LatticeConfig, SquareRegion

UNITS_COMMENT = "# units: hbar = 1, time in 1/J0, widths/distances in lattice spacings, entropies in bits"


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _parse_regions(entries) -> tuple:
    regions = []
    for entry in entries or ():
        kind = entry.get("kind")
        if kind == "square":
            regions.append(
                SquareRegion(D=int(entry["D"]), anchor=(int(entry.get("row", 0)), int(entry.get("col", 0))))
            )
        elif kind == "cylinder":
            regions.append(CylinderRegion(D=int(entry["D"]), anchor_column=int(entry.get("col", 0))))
        else:
            raise ValueError(f"unknown region kind {kind!r}")
    return tuple(regions)


def load_experiment(
    config_path,
    observables: tuple[str, ...],
    seed: int | None = None,
    paper_scale: bool = False,
    require_t0: bool = False,
    t_grid: tuple[float, ...] | None = None,
) -> ExperimentConfig:
    """Build an ExperimentConfig from a YAML file plus CLI overrides."""
    with open(config_path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config file must contain a mapping")
    if paper_scale:
        overrides = raw.get("paper_scale")
        if not overrides:
            raise ValueError("config has no paper_scale block")
        raw = _deep_merge(raw, overrides)
    lattice_raw = raw.get("lattice", {})
    lattice = LatticeConfig(
        L=int(lattice_raw["L"]),
        epsilon=0.0,
        base_coupling=float(lattice_raw.get("base_coupling", 1.0)),
        field_strength=float(lattice_raw.get("field_strength", 0.5)),
    )
    times = tuple(float(t) for t in raw.get("times", ()))
    if require_t0 and 0.0 not in times:
        times = (0.0,) + times
    lightcone_raw = raw.get("lightcone", {})
    return ExperimentConfig(
        lattice=lattice,
        epsilons=tuple(float(e) for e in raw.get("epsilons", ())),
        times=times,
        regions=_parse_regions(raw.get("regions")),
        n_realizations=int(raw.get("n_realizations", 1)),
        master_seed=int(seed if seed is not None else raw.get("master_seed", 0)),
        observables=observables,
        lightcone_t_max=float(lightcone_raw.get("t_max", 250.0)),
        lightcone_grid_size=int(lightcone_raw.get("grid_size", 512)),
        lightcone_row=int(lightcone_raw.get("row", 0)),
        lightcone_grid=t_grid,
    )


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(UNITS_COMMENT + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])
    return path


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir: Path, command: str, config: ExperimentConfig, outputs) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "generated_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "master_seed": config.master_seed,
        "config": config_to_dict(config),
        "config_sha256": config_hash(config),
        "outputs": [
            {"path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size} for p in outputs
        ],
    }
    path = out_dir / "run_manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _grouped_points(result: EnsembleResult):
    grouped = {}
    for point in result.points:
        grouped.setdefault((point.epsilon, point.t, point.region, point.D), {})[point.statistic] = point
    return dict(sorted(grouped.items()))


def execute_wilson(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> list[Path]:
    """Run the Wilson/correlator experiment and emit wilson.csv + figure."""
    from . import plots

    if not any(isinstance(r, SquareRegion) for r in config.regions):
        raise ValueError("wilson experiment needs at least one square region")
    result = run_experiment(config, threads=threads)
    header = [
        "epsilon",
        "t",
        "D",
        "mean_row_correlator",
        "stderr",
        "n",
        "wilson_product_estimate",
        "wilson_product_direct",
        "wilson_product_direct_stderr",
    ]
    rows = []
    plot_rows = []
    for (epsilon, t, _region, width), stats in _grouped_points(result).items():
        corr = stats.get("row_correlator")
        if corr is None:
            continue
        product = stats.get("wilson_product")
        estimate = corr.mean**width
        rows.append(
            [
                epsilon,
                t,
                width,
                corr.mean,
                corr.stderr,
                corr.n,
                estimate,
                product.mean if product else None,
                product.stderr if product else None,
            ]
        )
        plot_rows.append(
            {"epsilon": epsilon, "t": t, "D": width, "mean": corr.mean, "stderr": corr.stderr}
        )
    outputs = [_write_csv(out_dir / "wilson.csv", header, rows)]
    figure = out_dir / "wilson.png"
    plots.save_series(figure, plot_rows, ylabel="disorder-averaged row correlator")
    outputs.append(figure)
    outputs.append(write_manifest(out_dir, "wilson", config, outputs))
    return outputs


def execute_entropy(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> list[Path]:
    """Run the entropy experiment and emit entropy.csv + figure."""
    from . import plots

    if not any(isinstance(r, CylinderRegion) for r in config.regions):
        raise ValueError("entropy experiment needs at least one cylinder region")
    result = run_experiment(config, threads=threads)
    header = ["epsilon", "t", "D", "mean_row_entropy_bits", "stderr", "n", "cylinder_total_bits"]
    rows = []
    plot_rows = []
    for (epsilon, t, _region, width), stats in _grouped_points(result).items():
        entropy = stats.get("row_entropy_bits")
        if entropy is None:
            continue
        rows.append(
            [
                epsilon,
                t,
                width,
                entropy.mean,
                entropy.stderr,
                entropy.n,
                2 * config.lattice.L * entropy.mean,
            ]
        )
        plot_rows.append(
            {"epsilon": epsilon, "t": t, "D": width, "mean": entropy.mean, "stderr": entropy.stderr}
        )
    outputs = [_write_csv(out_dir / "entropy.csv", header, rows)]
    figure = out_dir / "entropy.png"
    plots.save_series(figure, plot_rows, ylabel="per-row interval entropy [bits]")
    outputs.append(figure)
    outputs.append(write_manifest(out_dir, "entropy", config, outputs))
    return outputs


def execute_lightcone(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> list[Path]:
    """Run the propagator experiment: snapshots, sup-M profile, fit JSON."""
    from . import plots

    result = run_experiment(config, threads=threads)
    outputs = []
    profile_rows = []
    fits = {}
    for summary in result.lightcones:
        tag = f"eps{summary.epsilon:g}"
        for t, matrix in sorted(summary.snapshots.items()):
            csv_path = out_dir / f"lightcone_snapshot_{tag}_t{t:g}.csv"
            rows = [
                [l, j, float(matrix[l, j])]
                for l in range(matrix.shape[0])
                for j in range(matrix.shape[1])
            ]
            outputs.append(_write_csv(csv_path, ["row_l", "col_j", "M_value"], rows))
            png_path = out_dir / f"lightcone_snapshot_{tag}_t{t:g}.png"
            plots.save_heatmap(png_path, matrix, f"M(t={t:g}), eps={summary.epsilon:g}")
            outputs.append(png_path)
        for d, mean, err in zip(summary.distances, summary.mean_sup, summary.stderr_sup):
            profile_rows.append([summary.epsilon, int(d), float(mean), float(err), summary.n])
        fit = summary.fit
        fits[f"{summary.epsilon:g}"] = {
            "mu": fit.mu,
            "prefactor": fit.prefactor,
            "zeta": fit.zeta,
            "r2": fit.r2,
            "no_decay": fit.no_decay,
            "velocity": fit.velocity,
            "velocity_r2": fit.velocity_r2,
            "n_realizations": summary.n,
        }
    outputs.append(
        _write_csv(
            out_dir / "lightcone_profile.csv",
            ["epsilon", "distance", "mean_sup_M", "stderr", "n"],
            profile_rows,
        )
    )
    fit_path = out_dir / "lightcone_fit.json"
    with open(fit_path, "w", encoding="utf-8") as fh:
        json.dump(fits, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(fit_path)
    figure = out_dir / "lightcone_profile.png"
    plots.save_lightcone_profiles(figure, result.lightcones)
    outputs.append(figure)
    outputs.append(write_manifest(out_dir, "lightcone", config, outputs))
    return outputs


def _run_command(command: str, executor, config_path, seed, threads, out_dir, paper_scale, **kwargs):
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        observables = {"wilson": ("wilson",), "entropy": ("entropy",), "lightcone": ("lightcone",)}
        config = load_experiment(
            config_path,
            observables=observables[command],
            seed=seed,
            paper_scale=paper_scale,
            require_t0=(command == "entropy"),
            t_grid=kwargs.get("t_grid"),
        )
        written = executor(config, out_path, threads=threads)
    except Exception as exc:
        for path in written:
            Path(path).unlink(missing_ok=True)
        raise click.ClickException(str(exc)) from exc
    for path in written:
        click.echo(f"wrote {path}")


def _common_options(fn):
    fn = click.option("--paper-scale", is_flag=True, help="Apply the config's paper_scale overrides.")(fn)
    fn = click.option(
        "--out-dir",
        envvar="TORICQUENCH_OUT_DIR",
        default="out",
        show_default=True,
        help="Output directory (env: TORICQUENCH_OUT_DIR).",
    )(fn)
    fn = click.option("--threads", type=int, default=1, show_default=True, help="Worker threads.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the config's master seed.")(fn)
    fn = click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        required=True,
        help="YAML experiment config.",
    )(fn)
    return fn


@click.group()
@click.version_option(version=__version__)
def main():
    """Disordered toric-code quench simulator."""


@main.command()
@_common_options
@click.option(
    "--t-grid",
    default=None,
    help="Comma-separated times overriding the sup grid and snapshot times.",
)
def lightcone(config_path, seed, threads, out_dir, paper_scale, t_grid):
    """Propagator weight matrices, sup-M decay profile, and localization fit."""
    grid = None
    if t_grid is not None:
        grid = tuple(float(v) for v in t_grid.split(","))
    if grid is not None:
        # explicit grids double as the snapshot times

        def executor(config, out_path, threads=1):
            from dataclasses import replace

            return execute_lightcone(replace(config, times=grid), out_path, threads=threads)

    else:
        executor = execute_lightcone
    _run_command("lightcone", executor, config_path, seed, threads, out_dir, paper_scale, t_grid=grid)


@main.command()
@_common_options
def wilson(config_path, seed, threads, out_dir, paper_scale):
    """Disorder-averaged row correlators and Wilson-loop products."""
    _run_command("wilson", execute_wilson, config_path, seed, threads, out_dir, paper_scale)


@main.command()
@_common_options
def entropy(config_path, seed, threads, out_dir, paper_scale):
    """Disorder-averaged per-row interval entropies (t=0 reference included)."""
    _run_command("entropy", execute_entropy, config_path, seed, threads, out_dir, paper_scale)


@main.command()
@click.option(
    "--level",
    type=click.Choice(["fast", "slow"]),
    default="fast",
    show_default=True,
    help="fast: oracle/anchor/invariant checks at reduced scale; slow: all acceptance criteria at full scale.",
)
def verify(level):
    """Run the verification suite and exit nonzero on any failure."""
    from .verification import run_acceptance

    results = run_acceptance(level)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "pass" if r.passed else "FAIL"
        click.echo(f"{r.name:<{width}}  tol={r.tolerance:<12} {status}  {r.observed}")
        failed += 0 if r.passed else 1
    if failed:
        raise SystemExit(1)
    click.echo(f"all {len(results)} checks passed")


if __name__ == "__main__":
    main()
