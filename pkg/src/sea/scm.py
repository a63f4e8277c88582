"""Synthetic benchmark generation.

Random graph topologies, parametric causal mechanisms, and
observational / interventional sampling. Mechanisms:

- linear:           y = X W + E
- polynomial:       y = W0 + X W1 + X^2 W2   (noise per noise_mode)
- sigmoid:          y = sum_i W_i * sigmoid(X_i)   (noise per noise_mode)
- nn_nonadditive:   y = tanh([X, E] W_in) W_out
- nn_additive:      y = tanh(X W_in) W_out + E

Roots draw Uniform(root_low, root_high); noise is E = noise_scale *
N(0, sigma^2) with sigma^2 ~ Uniform(1, 2) per node; a perfect
intervention on node r replaces its mechanism with N(0, 1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .graph import Dag, topological_order

MECHANISM_KINDS = ("linear", "polynomial", "sigmoid", "nn_additive", "nn_nonadditive")
TOPOLOGY_KINDS = ("erdos_renyi", "scale_free")

OBSERVATIONAL = -1


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    n: int
    expected_edges: float

    def __post_init__(self):
        if self.kind not in TOPOLOGY_KINDS:
            raise ConfigError(f"unknown topology kind: {self.kind!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        max_e = self.n * (self.n - 1) / 2
        if not 0 <= self.expected_edges <= max_e:
            raise ConfigError(
                f"expected_edges must lie in [0, {max_e}], got {self.expected_edges}"
            )


@dataclass(frozen=True)
class MechanismSpec:
    """Parametric mechanism family for non-root nodes.

    noise_mode "auto" resolves to multiplicative noise for polynomial
    and sigmoid kinds, additive otherwise. Weight magnitudes for the
    linear/sigmoid/polynomial kinds draw Uniform(weight_low, weight_high)
    with random sign; NN weights draw Uniform(-1, 1).
    """

    kind: str = "linear"
    noise_scale: float = 0.4
    root_low: float = -2.0
    root_high: float = 2.0
    nn_hidden: int = 10
    noise_mode: str = "auto"  # auto | additive | multiplicative
    noise_kind: str = "gaussian"  # gaussian | uniform
    weight_low: float = 1.0
    weight_high: float = 2.0

    def __post_init__(self):
        if self.kind not in MECHANISM_KINDS:
            raise ConfigError(f"unknown mechanism kind: {self.kind!r}")
        if self.noise_scale <= 0:
            raise ConfigError("noise_scale must be positive")
        if self.root_low >= self.root_high:
            raise ConfigError("root_low must be < root_high")
        if self.nn_hidden < 1:
            raise ConfigError("nn_hidden must be >= 1")
        if self.noise_mode not in ("auto", "additive", "multiplicative"):
            raise ConfigError(f"unknown noise_mode: {self.noise_mode!r}")
        if self.noise_kind not in ("gaussian", "uniform"):
            raise ConfigError(f"unknown noise_kind: {self.noise_kind!r}")
        if not 0 < self.weight_low <= self.weight_high:
            raise ConfigError("need 0 < weight_low <= weight_high")

    def resolved_noise_mode(self) -> str:
        if self.noise_mode != "auto":
            return self.noise_mode
        return "multiplicative" if self.kind in ("polynomial", "sigmoid") else "additive"


def sample_graph(spec: TopologySpec, seed: int) -> Dag:
    """Random DAG per spec; edges oriented along a hidden random order."""
    rng = np.random.default_rng(seed)
    n = spec.n
    perm = rng.permutation(n)
    adj = np.zeros((n, n), dtype=bool)
    if spec.kind == "erdos_renyi":
        max_e = n * (n - 1) / 2
        p = spec.expected_edges / max_e if max_e else 0.0
        for a in range(n):
            for b in range(a + 1, n):
                if rng.random() < p:
                    adj[perm[a], perm[b]] = True
    else:  # scale_free: preferential attachment, earlier -> later
        m_att = max(1, round(spec.expected_edges / n)) if spec.expected_edges else 0
        deg = np.zeros(n)
        for v in range(1, n):
            k = min(m_att, v)
            if k == 0:
                continue
            targets: list[int] = []
            for _ in range(k):
                w = deg[:v] + 1.0
                w[targets] = 0.0
                w = w / w.sum()
                t = int(rng.choice(v, p=w))
                targets.append(t)
            for t in targets:
                adj[perm[t], perm[v]] = True
                deg[t] += 1
                deg[v] += 1
    return Dag(adj)


@dataclass
class NodeParams:
    """Drawn parameters for one node's mechanism."""

    sigma2: float
    weights: dict = field(default_factory=dict)


class Scm:
    """A Dag plus drawn mechanism parameters; generator of datasets."""

    def __init__(self, dag: Dag, mech: MechanismSpec, params: list[NodeParams]):
        if len(params) != dag.n:
            raise ConfigError("one parameter set per node required")
        self.dag = dag
        self.mech = mech
        self.params = params
        self.n = dag.n

    def to_json(self) -> str:
        def enc(w):
            return {k: np.asarray(v).tolist() for k, v in w.items()}

        doc = {
            "n": self.n,
            "edges": self.dag.edges(),
            "mechanism": vars(self.mech) | {},
            "sigma2": [p.sigma2 for p in self.params],
            "weights": [enc(p.weights) for p in self.params],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Scm":
        doc = json.loads(text)
        dag = Dag.from_edges(doc["n"], [tuple(e) for e in doc["edges"]])
        mech = MechanismSpec(**doc["mechanism"])
        params = [
            NodeParams(s2, {k: np.asarray(v) for k, v in w.items()})
            for s2, w in zip(doc["sigma2"], doc["weights"])
        ]
        return cls(dag, mech, params)


def build_scm(g: Dag, mech: MechanismSpec, seed: int) -> Scm:
    """Draw all mechanism parameters; deterministic per seed."""
    rng = np.random.default_rng(seed)
    params = []
    for v in range(g.n):
        npar = len(g.parents(v))
        sigma2 = float(rng.uniform(1.0, 2.0))
        w: dict = {}
        if npar > 0:
            if mech.kind == "linear":
                w["w"] = _signed_uniform(rng, mech, npar)
            elif mech.kind == "sigmoid":
                w["w"] = _signed_uniform(rng, mech, npar)
            elif mech.kind == "polynomial":
                w["w0"] = _signed_uniform(rng, mech, 1)
                w["w1"] = _signed_uniform(rng, mech, npar)
                w["w2"] = _signed_uniform(rng, mech, npar)
            elif mech.kind == "nn_additive":
                w["w_in"] = rng.uniform(-1, 1, size=(npar, mech.nn_hidden))
                w["w_out"] = rng.uniform(-1, 1, size=mech.nn_hidden)
            else:  # nn_nonadditive: noise enters as an extra input column
                w["w_in"] = rng.uniform(-1, 1, size=(npar + 1, mech.nn_hidden))
                w["w_out"] = rng.uniform(-1, 1, size=mech.nn_hidden)
        params.append(NodeParams(sigma2=sigma2, weights=w))
    return Scm(g, mech, params)


def _signed_uniform(rng, mech: MechanismSpec, size: int) -> np.ndarray:
    mag = rng.uniform(mech.weight_low, mech.weight_high, size=size)
    sign = rng.choice([-1.0, 1.0], size=size)
    return mag * sign


class Dataset:
    """m x n observation matrix with per-row intervention regimes.

    regime[r] == -1 marks an observational row; otherwise it holds the
    index of the intervened node.
    """

    def __init__(self, values, regime=None):
        v = np.asarray(values, dtype=float)
        if v.ndim != 2:
            raise DataError("values must be a 2-D matrix")
        if not np.isfinite(v).all():
            raise DataError("values must be finite")
        if regime is None:
            regime = np.full(v.shape[0], OBSERVATIONAL, dtype=int)
        regime = np.asarray(regime, dtype=int)
        if regime.shape != (v.shape[0],):
            raise DataError("regime must have one label per row")
        if ((regime < OBSERVATIONAL) | (regime >= v.shape[1])).any():
            raise DataError("regime labels must be -1 or a node index")
        self.values = v
        self.regime = regime
        self.m, self.n = v.shape

    def observational(self) -> np.ndarray:
        return self.values[self.regime == OBSERVATIONAL]

    def write_csv(self, path) -> None:
        path = Path(path)
        header = ",".join(f"x{i}" for i in range(self.n))
        np.savetxt(path, self.values, delimiter=",", header=header, comments="")
        regime_path(path).write_text(
            "\n".join(str(int(r)) for r in self.regime) + "\n"
        )

    @classmethod
    def read_csv(cls, path) -> "Dataset":
        path = Path(path)
        values = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        rp = regime_path(path)
        regime = None
        if rp.exists():
            regime = np.loadtxt(rp, dtype=int, ndmin=1)
        return cls(values, regime)


def regime_path(dataset_path) -> Path:
    """Sibling regime file for a dataset CSV."""
    p = Path(dataset_path)
    return p.with_suffix(p.suffix + ".regimes")


def _noise(rng, mech: MechanismSpec, sigma2: float, size: int) -> np.ndarray:
    if mech.noise_kind == "gaussian":
        e = rng.normal(0.0, math.sqrt(sigma2), size=size)
    else:  # uniform with matching variance sigma^2
        half = math.sqrt(3.0 * sigma2)
        e = rng.uniform(-half, half, size=size)
    return mech.noise_scale * e


def _mechanism_values(mech: MechanismSpec, w: dict, x: np.ndarray, e: np.ndarray):
    """Deterministic part (or full value for nn_nonadditive)."""
    if mech.kind == "linear":
        return x @ w["w"]
    if mech.kind == "sigmoid":
        return (1.0 / (1.0 + np.exp(-x))) @ w["w"]
    if mech.kind == "polynomial":
        return w["w0"][0] + x @ w["w1"] + (x**2) @ w["w2"]
    if mech.kind == "nn_additive":
        return np.tanh(x @ w["w_in"]) @ w["w_out"]
    # nn_nonadditive consumes the noise internally
    return np.tanh(np.hstack([x, e[:, None]]) @ w["w_in"]) @ w["w_out"]


def regime_schedule(m: int, n: int, plan: str) -> np.ndarray:
    """Per-row regime labels; equal split with remainder to observational."""
    if plan == "observational":
        return np.full(m, OBSERVATIONAL, dtype=int)
    if plan != "all_single_node":
        raise ConfigError(f"unknown regime plan: {plan!r}")
    if m < n + 1:
        raise ConfigError("all_single_node needs m >= n + 1 rows")
    per = m // (n + 1)
    labels = np.full(m, OBSERVATIONAL, dtype=int)
    pos = m - per * n  # leading block (with remainder) stays observational
    for node in range(n):
        labels[pos : pos + per] = node
        pos += per
    return labels


def sample_dataset(scm: Scm, m: int, regimes: str, seed: int) -> Dataset:
    """Sample m rows in topological order; deterministic per seed."""
    if m < 1:
        raise ConfigError("m must be >= 1")
    labels = regime_schedule(m, scm.n, regimes)
    rng = np.random.default_rng(seed)
    mech = scm.mech
    values = np.zeros((m, scm.n))
    order = topological_order(scm.dag)
    mode = mech.resolved_noise_mode()
    for v in order:
        parents = scm.dag.parents(v)
        e = _noise(rng, mech, scm.params[v].sigma2, m)
        if not parents:
            col = rng.uniform(mech.root_low, mech.root_high, size=m)
        else:
            x = values[:, parents]
            det = _mechanism_values(mech, scm.params[v].weights, x, e)
            if mech.kind == "nn_nonadditive":
                col = det
            elif mode == "additive":
                col = det + e
            else:
                col = det * e
        # perfect intervention: overwrite with N(0, 1), cutting parents
        hit = labels == v
        if hit.any():
            col = col.copy()
            col[hit] = rng.normal(0.0, 1.0, size=int(hit.sum()))
        values[:, v] = col
    return Dataset(values, labels)


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash; default seed for CLI outputs keyed by path."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h
