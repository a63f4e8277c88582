"""Command-line interface.

Verbs: generate, discover, resolve, evaluate, export-features, bench,
plot. Exit codes: 0 success, 2 config error, 3 data error, 4 internal
invariant violation. SEA_WORKERS overrides --workers.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import pipeline
from .discovery import FisherZOracle, pc, varsort
from .errors import ConfigError, DataError, SeaError
from .graph import Dag, from_text, to_text
from .metrics import evaluate
from .pipeline import ExperimentConfig, effective_workers, run_experiment
from .resolver import EdgeScores
from .scm import (
    Dataset,
    MechanismSpec,
    TopologySpec,
    build_scm,
    fnv1a64,
    sample_dataset,
    sample_graph,
)


def _resolve_seed(seed, out_path) -> int:
    if seed is not None:
        return seed
    return fnv1a64(str(out_path))


@click.group()
@click.option("--seed", type=int, default=None, help="Global RNG seed.")
@click.option("--workers", type=int, default=None, help="Worker threads (SEA_WORKERS overrides).")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON experiment config file.")
@click.pass_context
def main(ctx, seed, workers, config_path):
    """Subset-based causal structure discovery toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["workers"] = workers
    ctx.obj["config_path"] = config_path


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--edges", type=float, required=True)
@click.option("--topology", type=click.Choice(["erdos_renyi", "scale_free"]),
              default="erdos_renyi")
@click.option("--mechanism", default="linear")
@click.option("--m", type=int, required=True)
@click.option("--regimes", type=click.Choice(["observational", "all_single_node"]),
              default="observational")
@click.option("--out", type=click.Path(), required=True, help="Dataset CSV path.")
@click.pass_context
def generate(ctx, n, edges, topology, mechanism, m, regimes, out):
    """Sample a random SCM and write a dataset CSV + regime file."""
    seed = _resolve_seed(ctx.obj["seed"], out)
    dag = sample_graph(TopologySpec(topology, n, edges), seed)
    scm = build_scm(dag, MechanismSpec(kind=mechanism), seed + 1)
    data = sample_dataset(scm, m, regimes, seed + 2)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data.write_csv(out)
    out.with_suffix(".graph").write_text(to_text(dag))
    out.with_suffix(".scm.json").write_text(scm.to_json())
    click.echo(f"wrote {out} ({m} rows, {n} cols, {dag.edge_count()} true edges)")


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--algorithm", type=click.Choice(["pc", "varsort"]), default="pc")
@click.option("--alpha", type=float, default=0.05)
@click.option("--propagation", type=click.Choice(["meek4", "paper2"]), default="meek4")
@click.option("--out", type=click.Path(), required=True, help="Output pattern path.")
def discover(data_path, algorithm, alpha, propagation, out):
    """Run a full-graph discovery algorithm on a dataset CSV."""
    data = Dataset.read_csv(data_path)
    if algorithm == "pc":
        oracle = FisherZOracle(data.observational(), alpha)
        pattern, _ = pc(oracle, range(data.n), propagation=propagation)
        scores = EdgeScores.from_pattern(pattern)
    else:
        scores = varsort(data)
        pattern = scores.to_pattern()
    Path(out).write_text(to_text(pattern))
    np.savetxt(Path(out).with_suffix(".scores.csv"), scores.score, delimiter=",")
    click.echo(f"wrote {out}")


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), default=None)
@click.option("--t", "t_count", type=int, default=None, help="Number of subsets T.")
@click.option("--k", "subset_size", type=int, default=None, help="Subset size k.")
@click.option("--b", "batch_size", type=int, default=None, help="Batch size b.")
@click.option("--strategy", type=click.Choice(["random", "statistic_guided", "mixed"]),
              default=None)
@click.option("--method", type=click.Choice(list(pipeline.AGGREGATE_METHODS)),
              default=None)
@click.option("--statistic", default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--propagation", type=click.Choice(["meek4", "paper2"]), default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.pass_context
def resolve(ctx, data_path, t_count, subset_size, batch_size, strategy, method,
            statistic, alpha, propagation, out_dir):
    """Run the sample-estimate-aggregate pipeline end to end."""
    cfg = _build_config(ctx, dict(
        dataset_path=data_path, t_count=t_count, subset_size=subset_size,
        batch_size=batch_size, strategy=strategy, method=method,
        statistic=statistic, alpha=alpha, propagation=propagation,
        out_dir=out_dir,
    ))
    if data_path:
        data = Dataset.read_csv(data_path)
        cfg.n = data.n
    report = run_experiment(cfg)
    click.echo(report.to_json())


def _build_config(ctx, overrides: dict) -> ExperimentConfig:
    base = {}
    if ctx.obj.get("config_path"):
        base = json.loads(Path(ctx.obj["config_path"]).read_text())
    base.update({k: v for k, v in overrides.items() if v is not None})
    if ctx.obj.get("seed") is not None:
        base["seed"] = ctx.obj["seed"]
    base["workers"] = effective_workers(ctx.obj.get("workers"))
    return ExperimentConfig(**base)


@main.command()
@click.option("--scores", "scores_path", type=click.Path(exists=True), required=True,
              help="Edge-score CSV (n x n).")
@click.option("--truth", "truth_path", type=click.Path(exists=True), required=True,
              help="True DAG in edge-list text format.")
@click.option("--threshold", default="default",
              help='Float, "default" (0.5), or "quantile" (rate-matched).')
@click.option("--out", type=click.Path(), default=None, help="Report JSON path.")
def evaluate_cmd(scores_path, truth_path, threshold, out):
    """Score a prediction against a true graph."""
    truth = from_text(Path(truth_path).read_text())
    if not isinstance(truth, Dag):
        raise DataError("truth file must contain a dag")
    matrix = np.loadtxt(scores_path, delimiter=",", ndmin=2)
    try:
        threshold = float(threshold)
    except ValueError:
        pass
    report = evaluate(EdgeScores(matrix.shape[0], matrix), truth, threshold)
    text = report.to_json()
    if out:
        Path(out).write_text(text)
    click.echo(text)


main.add_command(evaluate_cmd, name="evaluate")


@main.command("export-features")
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--t", "t_count", type=int, default=50)
@click.option("--k", "subset_size", type=int, default=5)
@click.option("--b", "batch_size", type=int, default=500)
@click.option("--statistic", default="inverse_covariance")
@click.option("--alpha", type=float, default=0.05)
@click.option("--out", type=click.Path(), required=True)
@click.pass_context
def export_features_cmd(ctx, data_path, t_count, subset_size, batch_size,
                        statistic, alpha, out):
    """Write the aligned feature bundle for a dataset."""
    from .sampler import BatchPlan, SelectionState, sample_batches, sample_subsets
    from .stats import compute_statistic

    data = Dataset.read_csv(data_path)
    seed = _resolve_seed(ctx.obj["seed"], out)
    workers = effective_workers(ctx.obj.get("workers"))
    obs = data.observational()
    plan = BatchPlan(t_count, min(batch_size, obs.shape[0]), subset_size)
    batches = sample_batches(obs.shape[0], plan, seed)
    rho = compute_statistic(obs[batches[0]], statistic)
    state = SelectionState.from_statistic(rho, strategy="mixed")
    subsets = sample_subsets(state, plan, seed + 1)
    cfg = ExperimentConfig(n=data.n, alpha=alpha, t_count=t_count,
                           subset_size=subset_size, batch_size=plan.batch_size)
    estimates = pipeline._run_estimates(obs, batches, subsets, cfg, workers)
    pipeline.export_features(rho, estimates, out)
    click.echo(f"wrote {out} ({len(estimates)} estimates)")


@main.command()
@click.option("--out-dir", type=click.Path(), default="sea-bench")
@click.pass_context
def bench(ctx, out_dir):
    """Time the reference pipeline (n=100, E=100, m=100000, T=100)."""
    cfg = _build_config(ctx, dict(out_dir=out_dir))
    cfg.n, cfg.expected_edges, cfg.m = 100, 100.0, 100000
    cfg.t_count, cfg.subset_size, cfg.batch_size = 100, 5, 500
    start = time.perf_counter()
    report = run_experiment(cfg)
    elapsed = time.perf_counter() - start
    click.echo(report.to_json())
    click.echo(f"elapsed: {elapsed:.2f}s with {cfg.workers} workers", err=True)


@main.command()
@click.argument("results", nargs=-1, type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True, help="SVG output path.")
def plot(results, out):
    """Plot SHD and mAP against T from results JSON files."""
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    points = []
    for path in results:
        doc = json.loads(Path(path).read_text())
        points.append((doc["config"]["t_count"], doc["shd_cpdag"], doc.get("map")))
    points.sort()
    ts = [p[0] for p in points]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(ts, [p[1] for p in points], marker="o")
    ax1.set_xlabel("T (subsets)")
    ax1.set_ylabel("SHD (CPDAG)")
    ax2.plot(ts, [p[2] for p in points], marker="o", color="tab:orange")
    ax2.set_xlabel("T (subsets)")
    ax2.set_ylabel("mAP")
    fig.tight_layout()
    fig.savefig(out)
    click.echo(f"wrote {out}")


def run() -> None:
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(2)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(3)
    except SeaError as exc:
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(4)


if __name__ == "__main__":
    run()
