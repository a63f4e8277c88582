"""Deterministic aggregation of marginal estimates.

`resolve_marginals` merges subset patterns into a single global pattern:
start from the complete undirected graph, delete any pair absent from
some estimate covering both endpoints, adopt v-structures whose skeleton
support survived, then optionally propagate orientations.

`bootstrap_vote` turns estimates into per-direction edge frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .graph import EdgeKind, Pattern, meek_closure


@dataclass
class EdgeScores:
    """n x n edge beliefs in [0, 1]; score[i, j] backs the edge i -> j."""

    n: int
    score: np.ndarray = None

    def __post_init__(self):
        if self.score is None:
            self.score = np.zeros((self.n, self.n))
        self.score = np.asarray(self.score, dtype=float)
        if self.score.shape != (self.n, self.n):
            raise ConfigError("score matrix shape must be (n, n)")
        if (self.score < 0).any() or (self.score > 1).any():
            raise ConfigError("scores must lie in [0, 1]")
        np.fill_diagonal(self.score, 0.0)

    @classmethod
    def from_pattern(cls, p: Pattern) -> "EdgeScores":
        """Directed marks map to 1/0, undirected to 0.5/0.5."""
        s = np.zeros((p.n, p.n))
        for i, j in p.pairs():
            kind = p.mark(i, j)
            if kind is EdgeKind.DIRECTED_IJ:
                s[i, j] = 1.0
            elif kind is EdgeKind.DIRECTED_JI:
                s[j, i] = 1.0
            else:
                s[i, j] = s[j, i] = 0.5
        return cls(p.n, s)

    def to_pattern(self, threshold: float = 0.5) -> Pattern:
        """Threshold scores into a pattern; mutual hits become undirected."""
        p = Pattern(self.n)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                a, b = self.score[i, j] > threshold, self.score[j, i] > threshold
                if a and b:
                    p.set_undirected(i, j)
                elif a:
                    p.set_directed(i, j)
                elif b:
                    p.set_directed(j, i)
        return p


def resolve_marginals(
    estimates,
    n: int,
    propagate: bool = True,
    propagation: str = "meek4",
) -> Pattern:
    """Merge marginal estimates into one pattern (deterministic).

    Pairs never covered by any estimate stay undirected. On contradictory
    inputs, adoption conflicts resolve first-seen; the count is attached
    as `orientation_conflicts` on the returned pattern.
    """
    estimates = list(estimates)
    if not estimates:
        raise ConfigError("estimates must be non-empty")
    for est in estimates:
        if any(v >= n or v < 0 for v in est.subset):
            raise ConfigError("estimate subset id out of range")

    merged = Pattern.complete(n)
    # skeleton pass: any absence among covering estimates deletes the pair
    for est in estimates:
        sub = est.subset
        k = len(sub)
        for a in range(k):
            for b in range(a + 1, k):
                if not est.pattern.has_edge(a, b):
                    merged.remove(sub[a], sub[b])

    # v-structure adoption: only where the surviving skeleton agrees
    conflicts = 0
    for est in estimates:
        sub = est.subset
        for a, b, c in est.pattern.v_structures():
            i, j, k = sub[a], sub[b], sub[c]
            if (
                merged.has_edge(i, j)
                and merged.has_edge(k, j)
                and not merged.has_edge(i, k)
            ):
                conflicts += _adopt(merged, i, j)
                conflicts += _adopt(merged, k, j)

    if propagate:
        prior = conflicts
        merged = meek_closure(merged, propagation)
        conflicts = prior
    merged.orientation_conflicts = conflicts
    return merged


def _adopt(p: Pattern, src: int, dst: int) -> int:
    if p.is_directed(dst, src):
        return 1
    p.set_directed(src, dst)
    return 0


def bootstrap_vote(estimates, n: int, undirected_weight: float = 0.0) -> EdgeScores:
    """Per-direction edge frequency across covering estimates.

    score[i, j] = (# estimates marking i -> j plus undirected_weight per
    undirected mark) / (# estimates containing both i and j). Pairs never
    co-sampled score 0.
    """
    estimates = list(estimates)
    if not estimates:
        raise ConfigError("estimates must be non-empty")
    if not 0.0 <= undirected_weight <= 1.0:
        raise ConfigError("undirected_weight must lie in [0, 1]")
    votes = np.zeros((n, n))
    cover = np.zeros((n, n))
    for est in estimates:
        sub = est.subset
        k = len(sub)
        for a in range(k):
            for b in range(a + 1, k):
                i, j = sub[a], sub[b]
                cover[i, j] += 1
                cover[j, i] += 1
                kind = est.pattern.mark(a, b)
                if kind is EdgeKind.DIRECTED_IJ:
                    votes[i, j] += 1
                elif kind is EdgeKind.DIRECTED_JI:
                    votes[j, i] += 1
                elif kind is EdgeKind.UNDIRECTED:
                    votes[i, j] += undirected_weight
                    votes[j, i] += undirected_weight
    score = np.divide(votes, cover, out=np.zeros_like(votes), where=cover > 0)
    return EdgeScores(n, np.clip(score, 0.0, 1.0))
