"""Graph-recovery evaluation metrics.

SHD over DAGs or implied CPDAGs, mean average precision, AUROC,
orientation accuracy, and thresholded precision/recall/F1. Diagonal
entries never influence any metric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np
from sklearn.metrics import average_precision_score, roc_auc_score

from .errors import ConfigError, DataError
from .graph import Dag, Pattern, cpdag_of, meek_closure
from .resolver import EdgeScores


def _as_pattern(g) -> Pattern:
    if isinstance(g, Dag):
        return Pattern.from_dag(g)
    if isinstance(g, Pattern):
        return g
    raise ConfigError(f"expected Dag or Pattern, got {type(g).__name__}")


def _as_cpdag(g) -> Pattern:
    if isinstance(g, Dag):
        return cpdag_of(g)
    if isinstance(g, Pattern):
        return meek_closure(g)
    raise ConfigError(f"expected Dag or Pattern, got {type(g).__name__}")


def shd(pred, truth, mode: str = "dag") -> int:
    """Per-pair edge-edit distance; any mark mismatch costs 1.

    mode "cpdag" converts both sides to their implied CPDAGs first.
    """
    if mode not in ("dag", "cpdag"):
        raise ConfigError(f"unknown shd mode: {mode!r}")
    conv = _as_cpdag if mode == "cpdag" else _as_pattern
    a, b = conv(pred), conv(truth)
    if a.n != b.n:
        raise ConfigError("graphs must have the same node count")
    dist = 0
    for i in range(a.n):
        for j in range(i + 1, a.n):
            if a.mark(i, j) is not b.mark(i, j):
                dist += 1
    return dist


def _offdiag_labels(scores: EdgeScores, truth: Dag):
    if scores.n != truth.n:
        raise ConfigError("score and truth sizes differ")
    mask = ~np.eye(scores.n, dtype=bool)
    return scores.score[mask], truth.adj[mask].astype(int)


def mean_average_precision(scores: EdgeScores, truth: Dag, average: str = "micro") -> float:
    """Average precision over the pooled off-diagonal edge ranking.

    "macro" averages per-node AP over target rows that contain at least
    one true edge.
    """
    if average not in ("micro", "macro"):
        raise ConfigError(f"unknown averaging: {average!r}")
    y_score, y_true = _offdiag_labels(scores, truth)
    if y_true.sum() == 0:
        raise DataError("mAP undefined: truth has no edges")
    if average == "micro":
        return float(average_precision_score(y_true, y_score))
    vals = []
    mask = ~np.eye(scores.n, dtype=bool)
    for i in range(scores.n):
        yt = truth.adj[i][mask[i]].astype(int)
        if yt.sum() == 0:
            continue
        vals.append(average_precision_score(yt, scores.score[i][mask[i]]))
    return float(np.mean(vals))


def auroc(scores: EdgeScores, truth: Dag) -> float:
    """Rank AUROC over off-diagonal pairs; ties get midrank."""
    y_score, y_true = _offdiag_labels(scores, truth)
    if y_true.sum() == 0 or y_true.sum() == len(y_true):
        raise DataError("AUROC undefined: labels are single-class")
    return float(roc_auc_score(y_true, y_score))


def orientation_accuracy(scores: EdgeScores, truth: Dag) -> float:
    """Fraction of true edges with score[i, j] strictly above score[j, i]."""
    edges = truth.edges()
    if not edges:
        raise DataError("orientation accuracy undefined: truth has no edges")
    hits = sum(1 for i, j in edges if scores.score[i, j] > scores.score[j, i])
    return hits / len(edges)


def threshold_scores(scores: EdgeScores, truth: Dag | None, policy) -> float:
    """Resolve a discretization threshold.

    policy is a float (used directly), "default" (0.5), or "quantile"
    (rate-matched to the true edge count; requires truth).
    """
    if isinstance(policy, (int, float)):
        return float(policy)
    if policy == "default":
        return 0.5
    if policy == "quantile":
        if truth is None:
            raise ConfigError("quantile threshold requires a truth graph")
        mask = ~np.eye(scores.n, dtype=bool)
        rate = truth.edge_count() / mask.sum()
        return float(np.quantile(scores.score[mask], 1.0 - rate))
    raise ConfigError(f"unknown threshold policy: {policy!r}")


@dataclass
class EvalReport:
    shd_dag: int
    shd_cpdag: int
    map: float | None
    auroc: float | None
    oa: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    edges_predicted: int
    edges_true: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    def to_tsv_row(self) -> str:
        fields = asdict(self)
        fmt = lambda v: "" if v is None else (f"{v:.6f}" if isinstance(v, float) else str(v))
        return "\t".join(fmt(fields[k]) for k in sorted(fields))


def evaluate(scores: EdgeScores, truth: Dag, threshold="default") -> EvalReport:
    """Full metric suite for continuous scores against a true DAG."""
    thr = threshold_scores(scores, truth, threshold)
    pred_pat = scores.to_pattern(thr)
    pred_adj = scores.score > thr
    np.fill_diagonal(pred_adj, False)
    edges_true = truth.edge_count()
    tp = int((pred_adj & truth.adj).sum())
    npred = int(pred_adj.sum())
    precision = tp / npred if npred else None
    recall = tp / edges_true if edges_true else None
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    some_neg = edges_true < truth.n * (truth.n - 1)
    return EvalReport(
        shd_dag=shd(pred_pat, truth, mode="dag"),
        shd_cpdag=shd(pred_pat, truth, mode="cpdag"),
        map=mean_average_precision(scores, truth) if edges_true else None,
        auroc=auroc(scores, truth) if edges_true and some_neg else None,
        oa=orientation_accuracy(scores, truth) if edges_true else None,
        precision=precision,
        recall=recall,
        f1=f1,
        edges_predicted=npred,
        edges_true=edges_true,
    )
