"""Experiment orchestration, configuration, feature export, and I/O.

The run is: generate (or load) a dataset; compute the global statistic
on batch 0; sample node subsets guided by the statistic; run marginal
estimates in parallel; aggregate (resolve / vote / full PC / varsort);
evaluate against the true graph; write all artifacts.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .discovery import MarginalEstimate, marginal_estimate, pc, varsort, FisherZOracle
from .errors import ConfigError, DataError
from .graph import Pattern, to_text
from .metrics import EvalReport, evaluate
from .resolver import EdgeScores, bootstrap_vote, resolve_marginals
from .sampler import BatchPlan, SelectionState, sample_batches, sample_subsets
from .scm import (
    Dataset,
    MechanismSpec,
    TopologySpec,
    build_scm,
    fnv1a64,
    sample_dataset,
    sample_graph,
)
from .stats import GlobalStatistic, compute_statistic

AGGREGATE_METHODS = ("resolve", "bootstrap_vote", "pc_full", "varsort")

# mark codes for the aligned estimate records
MARK_SENTINEL = 0  # pair not covered by this subset
MARK_NO_EDGE = 1
MARK_IJ = 2
MARK_JI = 3
MARK_UNDIRECTED = 4


@dataclass
class ExperimentConfig:
    n: int = 10
    expected_edges: float = 10.0
    topology: str = "erdos_renyi"
    mechanism: str = "linear"
    m: int = 10000
    regimes: str = "observational"
    t_count: int = 50
    subset_size: int = 5
    batch_size: int = 500
    strategy: str = "mixed"
    statistic: str = "inverse_covariance"
    stat_scope: str = "batch"  # batch (D_0) | full (D)
    alpha: float = 0.05
    method: str = "resolve"
    undirected_weight: float = 0.0
    propagation: str = "meek4"
    threshold: str | float = "default"
    seed: int = 0
    workers: int = 1
    out_dir: str = "sea-out"
    dataset_path: str | None = None  # reuse a cached dataset + regimes

    def __post_init__(self):
        if self.method not in AGGREGATE_METHODS:
            raise ConfigError(f"unknown aggregate method: {self.method!r}")
        if self.stat_scope not in ("batch", "full"):
            raise ConfigError(f"unknown stat_scope: {self.stat_scope!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)


def effective_workers(requested: int | None) -> int:
    """SEA_WORKERS overrides the flag; default 1."""
    env = os.environ.get("SEA_WORKERS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"SEA_WORKERS must be an integer, got {env!r}") from exc
        if value < 1:
            raise ConfigError("SEA_WORKERS must be >= 1")
        return value
    return requested if requested else 1


@dataclass
class FeatureBundle:
    """Aligned marginal-estimate marks plus the global statistic."""

    n: int
    stat_kind: str
    rho: np.ndarray
    subsets: list[list[int]]
    edge_index: list[tuple[int, int]]
    marks: np.ndarray  # T x K mark codes

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "stat_kind": self.stat_kind,
                "rho": self.rho.tolist(),
                "subsets": [list(map(int, s)) for s in self.subsets],
                "edge_index": [[int(i), int(j)] for i, j in self.edge_index],
                "marks": self.marks.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "FeatureBundle":
        doc = json.loads(text)
        return cls(
            n=doc["n"],
            stat_kind=doc["stat_kind"],
            rho=np.asarray(doc["rho"], dtype=float),
            subsets=[list(map(int, s)) for s in doc["subsets"]],
            edge_index=[(int(i), int(j)) for i, j in doc["edge_index"]],
            marks=np.asarray(doc["marks"], dtype=int),
        )


def _mark_code(pattern: Pattern, a: int, b: int) -> int:
    from .graph import EdgeKind

    kind = pattern.mark(a, b)
    return {
        EdgeKind.ABSENT: MARK_NO_EDGE,
        EdgeKind.DIRECTED_IJ: MARK_IJ,
        EdgeKind.DIRECTED_JI: MARK_JI,
        EdgeKind.UNDIRECTED: MARK_UNDIRECTED,
    }[kind]


def build_features(rho: GlobalStatistic, estimates) -> FeatureBundle:
    """Align estimates onto the union of covered pairs (sentinel elsewhere)."""
    estimates = list(estimates)
    if not estimates:
        raise ConfigError("estimates must be non-empty")
    n = rho.matrix.shape[0]
    for est in estimates:
        if any(v >= n for v in est.subset):
            raise ConfigError("estimate node id exceeds statistic size")
    pairs: set[tuple[int, int]] = set()
    for est in estimates:
        sub = est.subset
        for a in range(len(sub)):
            for b in range(a + 1, len(sub)):
                i, j = sorted((sub[a], sub[b]))
                pairs.add((i, j))
    edge_index = sorted(pairs)
    pos = {pair: idx for idx, pair in enumerate(edge_index)}
    marks = np.zeros((len(estimates), len(edge_index)), dtype=int)
    for t, est in enumerate(estimates):
        sub = est.subset
        for a in range(len(sub)):
            for b in range(a + 1, len(sub)):
                i, j = sub[a], sub[b]
                if i < j:
                    code = _mark_code(est.pattern, a, b)
                    marks[t, pos[(i, j)]] = code
                else:
                    code = _mark_code(est.pattern, b, a)
                    marks[t, pos[(j, i)]] = code
    return FeatureBundle(
        n=n,
        stat_kind=rho.kind,
        rho=rho.matrix,
        subsets=[list(est.subset) for est in estimates],
        edge_index=edge_index,
        marks=marks,
    )


def export_features(rho: GlobalStatistic, estimates, path) -> FeatureBundle:
    bundle = build_features(rho, estimates)
    Path(path).write_text(bundle.to_json())
    return bundle


def load_features(path) -> FeatureBundle:
    return FeatureBundle.from_json(Path(path).read_text())


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """Execute the full pipeline and write artifacts under cfg.out_dir."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = effective_workers(cfg.workers)

    # stage: generate or load data
    topo = TopologySpec(cfg.topology, cfg.n, cfg.expected_edges)
    mech = MechanismSpec(kind=cfg.mechanism)
    dag = sample_graph(topo, seed=cfg.seed)
    scm = build_scm(dag, mech, seed=cfg.seed + 1)
    if cfg.dataset_path:
        dataset = Dataset.read_csv(cfg.dataset_path)
        if dataset.n != cfg.n:
            raise DataError("cached dataset column count differs from config")
    else:
        dataset = sample_dataset(scm, cfg.m, cfg.regimes, seed=cfg.seed + 2)
        dataset.write_csv(out / "dataset.csv")
    (out / "truth.graph").write_text(to_text(dag))
    (out / "scm.json").write_text(scm.to_json())

    plan = BatchPlan(cfg.t_count, cfg.batch_size, cfg.subset_size)
    obs = dataset.observational()
    if obs.shape[0] < plan.batch_size:
        raise DataError("not enough observational rows for the batch size")
    batches = sample_batches(obs.shape[0], plan, seed=cfg.seed + 3)

    # stage: global statistic
    stat_rows = obs if cfg.stat_scope == "full" else obs[batches[0]]
    rho = compute_statistic(stat_rows, cfg.statistic)

    # stage: subsets + marginal estimates
    state = SelectionState.from_statistic(rho, strategy=cfg.strategy)
    subsets = sample_subsets(state, plan, seed=cfg.seed + 4)

    estimates = _run_estimates(obs, batches, subsets, cfg, workers)

    # stage: aggregate
    conflicts = 0
    if cfg.method == "resolve":
        pattern = resolve_marginals(estimates, cfg.n, propagation=cfg.propagation)
        conflicts = getattr(pattern, "orientation_conflicts", 0)
        scores = EdgeScores.from_pattern(pattern)
    elif cfg.method == "bootstrap_vote":
        scores = bootstrap_vote(estimates, cfg.n, cfg.undirected_weight)
        pattern = scores.to_pattern()
    elif cfg.method == "pc_full":
        oracle = FisherZOracle(obs, cfg.alpha)
        pattern, _ = pc(oracle, range(cfg.n), propagation=cfg.propagation)
        scores = EdgeScores.from_pattern(pattern)
    else:  # varsort
        scores = varsort(dataset)
        pattern = scores.to_pattern()

    # stage: evaluate + artifacts
    report = evaluate(scores, dag, threshold=cfg.threshold)
    (out / "pattern.graph").write_text(to_text(pattern))
    np.savetxt(out / "scores.csv", scores.score, delimiter=",")
    export_features(rho, estimates, out / "features.json")
    results = json.loads(report.to_json())
    results["orientation_conflicts"] = int(conflicts)
    # worker count and filesystem paths must not leak into results:
    # outputs are contractually identical across parallelism levels
    echo = json.loads(cfg.to_json())
    for key in ("workers", "out_dir", "dataset_path"):
        echo.pop(key, None)
    results["config"] = echo
    (out / "results.json").write_text(json.dumps(results, indent=1, sort_keys=True))
    return report


def _run_estimates(obs, batches, subsets, cfg, workers) -> list[MarginalEstimate]:
    """Marginal estimates for all subsets; parallel but order-stable."""

    def task(t: int) -> MarginalEstimate:
        rows = obs[np.ix_(batches[t + 1], subsets[t])]
        local = marginal_estimate(
            rows,
            subset=range(len(subsets[t])),
            alpha=cfg.alpha,
            propagation=cfg.propagation,
        )
        return MarginalEstimate(
            subset=list(subsets[t]), pattern=local.pattern, sepsets=local.sepsets
        )

    indices = range(len(subsets))
    if workers == 1:
        return [task(t) for t in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, indices))
