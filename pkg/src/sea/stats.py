"""Global pairwise statistics and the Fisher-z conditional independence test."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as spstats
from sklearn.covariance import ledoit_wolf

from .errors import ConfigError, DataError, SingularCovarianceError

STATISTIC_KINDS = ("correlation", "inverse_covariance", "distance_correlation")

# Ledoit-Wolf shrinkage kicks in at this node count (or on ill-conditioning)
SHRINK_NODE_THRESHOLD = 100
SHRINK_COND_THRESHOLD = 1e8

DCOR_DEFAULT_CAP = 2000


@dataclass
class GlobalStatistic:
    kind: str
    matrix: np.ndarray
    degenerate_columns: list[int] = field(default_factory=list)


def _values(d) -> np.ndarray:
    v = np.asarray(getattr(d, "values", d), dtype=float)
    if v.ndim != 2 or v.shape[0] < 2:
        raise DataError("need a 2-D matrix with at least 2 rows")
    return v


def correlation_matrix(d) -> GlobalStatistic:
    """Pearson correlation per pair; constant columns yield 0 entries."""
    v = _values(d)
    std = v.std(axis=0)
    degenerate = [int(i) for i in np.flatnonzero(std == 0)]
    if degenerate:
        warnings.warn(f"constant columns {degenerate}: correlations set to 0")
        std = np.where(std == 0, 1.0, std)
    centered = (v - v.mean(axis=0)) / std
    c = centered.T @ centered / v.shape[0]
    np.fill_diagonal(c, 1.0)
    for i in degenerate:
        c[i, :] = 0.0
        c[:, i] = 0.0
        c[i, i] = 1.0
    c = np.clip((c + c.T) / 2, -1.0, 1.0)
    return GlobalStatistic("correlation", c, degenerate)


def inverse_covariance(d, shrink: str = "auto") -> GlobalStatistic:
    """Precision matrix of the sample covariance.

    shrink: "auto" applies Ledoit-Wolf when n >= 100 or the covariance is
    ill-conditioned; "always" / "never" force the choice.
    """
    if shrink not in ("auto", "always", "never"):
        raise ConfigError(f"unknown shrink policy: {shrink!r}")
    v = _values(d)
    n = v.shape[1]
    cov = np.cov(v, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    use_shrink = shrink == "always"
    if shrink == "auto":
        cond = np.linalg.cond(cov)
        use_shrink = n >= SHRINK_NODE_THRESHOLD or cond > SHRINK_COND_THRESHOLD
    if use_shrink:
        cov, _ = ledoit_wolf(v)
    try:
        prec = np.linalg.inv(cov)
    except np.linalg.LinAlgError as exc:
        if shrink == "never":
            raise SingularCovarianceError("sample covariance is singular") from exc
        cov, _ = ledoit_wolf(v)
        prec = np.linalg.inv(cov)
    prec = (prec + prec.T) / 2
    return GlobalStatistic("inverse_covariance", prec)


def _centered_distances(x: np.ndarray) -> np.ndarray:
    d = np.abs(x[:, None] - x[None, :])
    return d - d.mean(axis=0, keepdims=True) - d.mean(axis=1, keepdims=True) + d.mean()


def distance_correlation(d, cap: int = DCOR_DEFAULT_CAP) -> GlobalStatistic:
    """Pairwise sample distance correlation on at most cap rows.

    O(m^2) per pair, hence the row cap; rows beyond the cap are dropped
    deterministically (leading rows kept).
    """
    v = _values(d)
    if cap < 2:
        raise ConfigError("cap must be >= 2")
    v = v[: min(v.shape[0], cap)]
    n = v.shape[1]
    out = np.zeros((n, n))
    dvar = np.zeros(n)
    for i in range(n):
        a = _centered_distances(v[:, i])
        dvar[i] = (a * a).mean()
        del a
    # one centered matrix held per outer node; inner ones recomputed to
    # keep memory at O(cap^2) regardless of n
    for i in range(n):
        out[i, i] = 1.0 if dvar[i] > 0 else 0.0
        if dvar[i] == 0:
            continue
        a = _centered_distances(v[:, i])
        for j in range(i + 1, n):
            if dvar[j] == 0:
                continue
            b = _centered_distances(v[:, j])
            dcov2 = max((a * b).mean(), 0.0)
            out[i, j] = out[j, i] = np.sqrt(dcov2 / np.sqrt(dvar[i] * dvar[j]))
    degenerate = [int(i) for i in np.flatnonzero(dvar == 0)]
    return GlobalStatistic("distance_correlation", np.clip(out, 0.0, 1.0), degenerate)


def compute_statistic(d, kind: str, **kwargs) -> GlobalStatistic:
    if kind == "correlation":
        return correlation_matrix(d)
    if kind == "inverse_covariance":
        return inverse_covariance(d, **kwargs)
    if kind == "distance_correlation":
        return distance_correlation(d, **kwargs)
    raise ConfigError(f"unknown statistic kind: {kind!r}")


@dataclass(frozen=True)
class CiResult:
    statistic: float
    p_value: float
    independent: bool


def partial_correlation(corr: np.ndarray, i: int, j: int, s) -> float:
    """Partial correlation of (i, j) given s from a correlation matrix."""
    idx = [i, j, *sorted(s)]
    sub = corr[np.ix_(idx, idx)]
    prec = np.linalg.pinv(sub)
    denom = np.sqrt(prec[0, 0] * prec[1, 1])
    if denom == 0:
        return 0.0
    return float(np.clip(-prec[0, 1] / denom, -1.0, 1.0))


def fisher_z_from_corr(corr: np.ndarray, m: int, i: int, j: int, s, alpha: float) -> CiResult:
    """Fisher-z test given a precomputed correlation matrix over m rows."""
    s = sorted(set(int(v) for v in s))
    if i == j or i in s or j in s:
        raise ConfigError("i, j must be distinct and not in s")
    i, j = min(i, j), max(i, j)  # exact symmetry in the pair
    dof = m - len(s) - 3
    if dof <= 0:
        raise ConfigError(f"need more than |s| + 3 rows, got m={m}")
    r = partial_correlation(corr, i, j, s)
    if abs(r) >= 1.0:
        return CiResult(statistic=float("inf"), p_value=0.0, independent=False)
    z = 0.5 * np.log((1 + r) / (1 - r))
    stat = np.sqrt(dof) * abs(z)
    p = float(2 * spstats.norm.sf(stat))
    return CiResult(statistic=float(stat), p_value=p, independent=p > alpha)


def fisher_z_ci(d, i: int, j: int, s, alpha: float = 0.05) -> CiResult:
    """Fisher-z conditional independence test on raw data rows."""
    v = _values(d)
    corr = correlation_matrix(v).matrix
    return fisher_z_from_corr(corr, v.shape[0], i, j, s, alpha)
