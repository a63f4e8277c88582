"""Observation-batch and node-subset sampling with visit down-weighting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

STRATEGIES = ("random", "statistic_guided", "mixed")
DOWNWEIGHTS = ("sqrt", "linear")


@dataclass(frozen=True)
class BatchPlan:
    t_count: int
    batch_size: int
    subset_size: int

    def __post_init__(self):
        if self.t_count < 1:
            raise ConfigError("t_count must be >= 1")
        if self.subset_size < 2:
            raise ConfigError("subset_size must be >= 2")
        if self.batch_size < self.subset_size + 5:
            raise ConfigError("batch_size must be >= subset_size + 5")


@dataclass
class SelectionState:
    """Pair selection scores plus visit counts, both symmetric."""

    alpha: np.ndarray
    counts: np.ndarray = None
    strategy: str = "statistic_guided"

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        n = self.alpha.shape[0]
        if self.alpha.shape != (n, n):
            raise ConfigError("alpha must be square")
        if (self.alpha < 0).any():
            raise ConfigError("alpha entries must be nonnegative")
        if self.counts is None:
            self.counts = np.zeros((n, n), dtype=int)
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy: {self.strategy!r}")

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @classmethod
    def from_statistic(cls, stat, strategy: str = "statistic_guided") -> "SelectionState":
        """Scores are statistic magnitudes with the diagonal zeroed."""
        matrix = np.asarray(getattr(stat, "matrix", stat), dtype=float)
        a = np.abs(matrix)
        a = (a + a.T) / 2
        np.fill_diagonal(a, 0.0)
        return cls(alpha=a, strategy=strategy)

    @classmethod
    def uniform(cls, n: int, strategy: str = "random") -> "SelectionState":
        a = np.ones((n, n))
        np.fill_diagonal(a, 0.0)
        return cls(alpha=a, strategy=strategy)


def sample_batches(d, plan: BatchPlan, seed: int) -> list[np.ndarray]:
    """T+1 row-index sets of size b, each uniform without replacement.

    Batch 0 is reserved for the global statistic.
    """
    m = getattr(d, "m", None)
    if m is None:
        m = int(d)
    if plan.batch_size > m:
        raise ConfigError(f"batch_size {plan.batch_size} exceeds row count {m}")
    rng = np.random.default_rng(seed)
    return [
        np.sort(rng.choice(m, size=plan.batch_size, replace=False))
        for _ in range(plan.t_count + 1)
    ]


def _categorical(rng, weights: np.ndarray) -> int:
    """Inverse-CDF draw over ascending index; uniform fallback on zeros."""
    total = weights.sum()
    if total <= 0:
        weights = np.ones_like(weights)
        total = weights.sum()
    cdf = np.cumsum(weights / total)
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def sample_subsets(
    state: SelectionState,
    plan: BatchPlan,
    seed: int,
    downweight: str = "sqrt",
) -> list[list[int]]:
    """Greedy subset selection guided by down-weighted scores.

    Subsets grow one node at a time: the first node draws proportional to
    row sums of the effective scores, later nodes proportional to their
    summed connection to the subset so far. After each subset every pair
    within it increments its visit count. Strategy "mixed" uses the
    statistic scores for the first ceil(T/2) subsets and uniform scores
    after, with counts shared.
    """
    if downweight not in DOWNWEIGHTS:
        raise ConfigError(f"unknown downweight: {downweight!r}")
    n, k = state.n, plan.subset_size
    if k > n:
        raise ConfigError("subset_size exceeds node count")
    if state.alpha.sum() == 0:
        raise ConfigError("alpha must not be all-zero")
    rng = np.random.default_rng(seed)
    ones = np.ones((n, n)) - np.eye(n)
    guided_until = math.ceil(plan.t_count / 2)
    subsets = []
    for t in range(plan.t_count):
        if state.strategy == "random":
            base = ones
        elif state.strategy == "mixed" and t >= guided_until:
            base = ones
        else:
            base = state.alpha
        denom = np.maximum(state.counts, 1).astype(float)
        if downweight == "sqrt":
            denom = np.sqrt(denom)
        eff = base / denom
        chosen = [_categorical(rng, eff.sum(axis=1))]
        while len(chosen) < k:
            w = eff[chosen, :].sum(axis=0)
            w[chosen] = 0.0
            chosen.append(_categorical(rng, w))
        for a in range(k):
            for b in range(a + 1, k):
                i, j = chosen[a], chosen[b]
                state.counts[i, j] += 1
                state.counts[j, i] += 1
        subsets.append(chosen)
    return subsets
