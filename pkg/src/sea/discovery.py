"""Constraint-based discovery on full variable sets or node subsets.

Implements the classic PC algorithm against a pluggable conditional
independence oracle, marginal estimation over subsets, and the
variance-sort regression baseline.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .graph import Dag, Pattern, SepSetMap, d_separated, meek_closure
from .scm import Dataset
from .stats import correlation_matrix, fisher_z_from_corr


class DSeparationOracle:
    """Answers i _||_ j | S by d-separation in a known DAG."""

    def __init__(self, dag: Dag):
        self.dag = dag

    def is_independent(self, i: int, j: int, s) -> bool:
        return d_separated(self.dag, i, j, s)


class FisherZOracle:
    """Fisher-z test over a fixed row set, correlations precomputed."""

    def __init__(self, values, alpha: float = 0.05):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise DataError("values must be 2-D")
        self.m = values.shape[0]
        self.alpha = alpha
        self.corr = correlation_matrix(values).matrix

    def is_independent(self, i: int, j: int, s) -> bool:
        res = fisher_z_from_corr(self.corr, self.m, i, j, s, self.alpha)
        return res.independent


def pc(
    oracle,
    nodes,
    max_cond: int | None = None,
    propagation: str = "meek4",
) -> tuple[Pattern, SepSetMap]:
    """PC algorithm over the given nodes against a CI oracle.

    Returns a pattern and separating sets in *local* indices (position
    within `nodes`); the oracle is queried with the global node ids.
    Deterministic: pairs iterate lexicographically and conditioning sets
    enumerate lexicographically over sorted current neighbors of i then
    of j; the first separating set found is recorded.
    """
    nodes = [int(v) for v in nodes]
    k = len(nodes)
    if k < 1:
        raise ConfigError("need at least one node")
    if max_cond is None:
        max_cond = k - 2
    if max_cond < 0 and k >= 2:
        raise ConfigError("max_cond must be >= 0")

    pat = Pattern.complete(k)
    seps = SepSetMap()

    # skeleton: conditioning sets of increasing size from current neighbors
    for level in range(0, max_cond + 1):
        removed_any = False
        for i, j in [(a, b) for a in range(k) for b in range(a + 1, k)]:
            if not pat.has_edge(i, j):
                continue
            sep = _find_sepset(oracle, nodes, pat, i, j, level)
            if sep is not None:
                pat.remove(i, j)
                seps.record(i, j, sep)
                removed_any = True
        max_nbrs = max((len(pat.neighbors(v)) for v in range(k)), default=0)
        if max_nbrs - 1 < level + 1 and not removed_any:
            break

    # v-structures: collider iff the middle node is absent from the sepset
    conflicts = 0
    for i, j in [(a, b) for a in range(k) for b in range(a + 1, k)]:
        if pat.has_edge(i, j):
            continue
        sep = seps.get(i, j)
        if sep is None:
            continue
        for mid in range(k):
            if mid in (i, j) or mid in sep:
                continue
            if pat.has_edge(i, mid) and pat.has_edge(j, mid):
                conflicts += _adopt_direction(pat, i, mid)
                conflicts += _adopt_direction(pat, j, mid)

    pat = meek_closure(pat, propagation)
    pat.orientation_conflicts = conflicts
    return pat, seps


def _find_sepset(oracle, nodes, pat: Pattern, i: int, j: int, level: int):
    tried: set[frozenset] = set()
    for anchor in (i, j):
        cands = [v for v in pat.neighbors(anchor) if v not in (i, j)]
        for combo in itertools.combinations(cands, level):
            key = frozenset(combo)
            if key in tried:
                continue
            tried.add(key)
            if oracle.is_independent(nodes[i], nodes[j], [nodes[v] for v in combo]):
                return combo
    return None


def _adopt_direction(pat: Pattern, src: int, dst: int) -> int:
    """Orient src -> dst; keep an existing opposite mark (first-seen wins)."""
    if pat.is_directed(dst, src):
        return 1
    pat.set_directed(src, dst)
    return 0


@dataclass
class MarginalEstimate:
    """PC output over a node subset, in local indices plus the global ids."""

    subset: list[int]
    pattern: Pattern
    sepsets: SepSetMap

    def __post_init__(self):
        if len(set(self.subset)) != len(self.subset):
            raise ConfigError("subset ids must be distinct")
        if self.pattern.n != len(self.subset):
            raise ConfigError("pattern size must equal subset size")


def marginal_estimate(
    data,
    subset,
    alpha: float = 0.05,
    max_cond: int | None = None,
    propagation: str = "meek4",
    observational_only: bool = True,
) -> MarginalEstimate:
    """Run PC with the Fisher-z oracle restricted to the subset's columns."""
    subset = [int(v) for v in subset]
    if len(subset) < 2:
        raise ConfigError("subset must contain at least 2 nodes")
    if isinstance(data, Dataset) and observational_only:
        rows = data.observational()
    else:
        rows = np.asarray(getattr(data, "values", data), dtype=float)
    if rows.shape[0] < len(subset) + 5:
        raise ConfigError(
            f"need at least k + 5 = {len(subset) + 5} rows, got {rows.shape[0]}"
        )
    oracle = FisherZOracle(rows[:, subset], alpha)
    pat, seps = pc(oracle, range(len(subset)), max_cond, propagation)
    return MarginalEstimate(subset=subset, pattern=pat, sepsets=seps)


def oracle_estimate(
    dag: Dag, subset, max_cond: int | None = None, propagation: str = "meek4"
) -> MarginalEstimate:
    """Marginal estimate against the d-separation oracle of a known DAG."""
    subset = [int(v) for v in subset]
    pat, seps = pc(DSeparationOracle(dag), subset, max_cond, propagation)
    return MarginalEstimate(subset=subset, pattern=pat, sepsets=seps)


def varsort(data, coef_threshold: float = 0.1):
    """Variance-sort baseline: order nodes by ascending marginal variance
    and regress each node on all its predecessors.

    Returns EdgeScores with score(i -> j) = min(1, |beta_ij| / threshold)
    for predecessors i of j, 0 elsewhere.
    """
    from .resolver import EdgeScores

    values = np.asarray(getattr(data, "values", data), dtype=float)
    m, n = values.shape
    if m < n + 2:
        raise ConfigError("varsort needs at least n + 2 rows")
    if coef_threshold <= 0:
        raise ConfigError("coef_threshold must be positive")
    score = np.zeros((n, n))
    order = np.argsort(values.var(axis=0), kind="stable")
    centered = values - values.mean(axis=0)
    for t in range(1, n):
        target = order[t]
        preds = order[:t]
        x = centered[:, preds]
        y = centered[:, target]
        beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
        if rank < len(preds):
            warnings.warn("rank-deficient regression; using ridge fallback")
            beta = np.linalg.solve(x.T @ x + 1e-6 * np.eye(len(preds)), x.T @ y)
        for p, b in zip(preds, beta):
            score[p, target] = min(1.0, abs(float(b)) / coef_threshold)
    return EdgeScores(n, score)
