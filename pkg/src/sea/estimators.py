"""scikit-learn compatible estimator wrappers.

Each estimator consumes an (m, n) observation matrix via fit(X) and
exposes the learned structure as fitted attributes: `pattern_` (mixed
graph), `scores_` (n x n edge beliefs), and `n_features_in_`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .discovery import FisherZOracle, pc, varsort
from .pipeline import _run_estimates, ExperimentConfig
from .resolver import EdgeScores, bootstrap_vote, resolve_marginals
from .sampler import BatchPlan, SelectionState, sample_batches, sample_subsets
from .scm import Dataset
from .stats import compute_statistic


class _GraphDiscoveryMixin:
    def _validated(self, X) -> np.ndarray:
        return check_array(X, ensure_min_samples=2, ensure_min_features=2)

    def predict(self, X=None) -> np.ndarray:
        """Thresholded adjacency of the fitted scores (X is ignored)."""
        check_is_fitted(self, "scores_")
        adj = self.scores_.score > 0.5
        np.fill_diagonal(adj, False)
        return adj


class PCDiscovery(_GraphDiscoveryMixin, BaseEstimator):
    """Full-graph PC with the Fisher-z conditional independence test."""

    def __init__(self, alpha: float = 0.05, max_cond: int | None = None,
                 propagation: str = "meek4"):
        self.alpha = alpha
        self.max_cond = max_cond
        self.propagation = propagation

    def fit(self, X, y=None):
        X = self._validated(X)
        oracle = FisherZOracle(X, self.alpha)
        self.pattern_, self.sepsets_ = pc(
            oracle, range(X.shape[1]), self.max_cond, self.propagation
        )
        self.scores_ = EdgeScores.from_pattern(self.pattern_)
        self.n_features_in_ = X.shape[1]
        return self


class VarSortDiscovery(_GraphDiscoveryMixin, BaseEstimator):
    """Variance-sort + regression baseline."""

    def __init__(self, coef_threshold: float = 0.1):
        self.coef_threshold = coef_threshold

    def fit(self, X, y=None):
        X = self._validated(X)
        self.scores_ = varsort(X, self.coef_threshold)
        self.pattern_ = self.scores_.to_pattern()
        self.n_features_in_ = X.shape[1]
        return self


class SubsetAggregateDiscovery(_GraphDiscoveryMixin, BaseEstimator):
    """Sample-estimate-aggregate discovery over node subsets.

    Samples observation batches and statistic-guided node subsets, runs
    PC per subset, and merges the marginal estimates either with the
    deterministic resolver or by directed-frequency voting.
    """

    def __init__(
        self,
        t_count: int = 50,
        subset_size: int = 5,
        batch_size: int = 500,
        strategy: str = "mixed",
        statistic: str = "inverse_covariance",
        alpha: float = 0.05,
        method: str = "resolve",
        undirected_weight: float = 0.0,
        propagation: str = "meek4",
        workers: int = 1,
        seed: int = 0,
    ):
        self.t_count = t_count
        self.subset_size = subset_size
        self.batch_size = batch_size
        self.strategy = strategy
        self.statistic = statistic
        self.alpha = alpha
        self.method = method
        self.undirected_weight = undirected_weight
        self.propagation = propagation
        self.workers = workers
        self.seed = seed

    def fit(self, X, y=None):
        if isinstance(X, Dataset):
            obs = X.observational()
        else:
            obs = self._validated(X)
        n = obs.shape[1]
        plan = BatchPlan(self.t_count, min(self.batch_size, obs.shape[0]),
                         min(self.subset_size, n))
        batches = sample_batches(obs.shape[0], plan, seed=self.seed)
        self.statistic_ = compute_statistic(obs[batches[0]], self.statistic)
        state = SelectionState.from_statistic(self.statistic_, strategy=self.strategy)
        subsets = sample_subsets(state, plan, seed=self.seed + 1)
        cfg = ExperimentConfig(
            n=n, alpha=self.alpha, propagation=self.propagation,
            t_count=plan.t_count, subset_size=plan.subset_size,
            batch_size=plan.batch_size,
        )
        self.estimates_ = _run_estimates(obs, batches, subsets, cfg, self.workers)
        if self.method == "resolve":
            self.pattern_ = resolve_marginals(
                self.estimates_, n, propagation=self.propagation
            )
            self.scores_ = EdgeScores.from_pattern(self.pattern_)
        elif self.method == "bootstrap_vote":
            self.scores_ = bootstrap_vote(self.estimates_, n, self.undirected_weight)
            self.pattern_ = self.scores_.to_pattern()
        else:
            raise ValueError(f"unknown method: {self.method!r}")
        self.n_features_in_ = n
        return self
