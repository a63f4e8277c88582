import json

import numpy as np
import pytest

from sea.errors import ConfigError, DataError
from sea.graph import Dag, Pattern, cpdag_of, enumerate_mec
from sea.metrics import (
    auroc,
    evaluate,
    mean_average_precision,
    orientation_accuracy,
    shd,
    threshold_scores,
)
from sea.resolver import EdgeScores

from conftest import random_dag_max_degree


def pooled_ap_bruteforce(score, adj):
    """Independent AP oracle: precision averaged at each positive hit."""
    mask = ~np.eye(score.shape[0], dtype=bool)
    pairs = sorted(zip(score[mask], adj[mask]), key=lambda t: -t[0])
    tp, seen, precisions = 0, 0, []
    for s, y in pairs:
        seen += 1
        if y:
            tp += 1
            precisions.append(tp / seen)
    return float(np.mean(precisions))


class TestShd:
    def test_identical(self, y_graph):
        assert shd(y_graph, y_graph) == 0

    def test_single_reversal(self):
        a = Dag.from_edges(3, [(0, 1), (1, 2)])
        b = Dag.from_edges(3, [(1, 0), (1, 2)])
        assert shd(a, b) == 1

    def test_extra_and_missing(self):
        a = Dag.from_edges(3, [(0, 1)])
        b = Dag.from_edges(3, [(1, 2)])
        assert shd(a, b) == 2

    def test_undirected_vs_directed_costs_one(self):
        p = Pattern(2)
        p.set_undirected(0, 1)
        assert shd(p, Dag.from_edges(2, [(0, 1)])) == 1

    def test_cpdag_mode_zero_within_equivalence_class(self):
        rng = np.random.default_rng(50)
        for _ in range(15):
            g = random_dag_max_degree(5, rng)
            pat = cpdag_of(g)
            for member in enumerate_mec(pat):
                assert shd(member, g, mode="cpdag") == 0

    def test_cpdag_mode_detects_different_class(self):
        chain = Dag.from_edges(3, [(0, 1), (1, 2)])
        collider = Dag.from_edges(3, [(0, 1), (2, 1)])
        assert shd(chain, collider, mode="cpdag") > 0

    def test_size_mismatch(self):
        with pytest.raises(ConfigError):
            shd(Dag.from_edges(2, []), Dag.from_edges(3, []))

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            shd(Dag.from_edges(2, []), Dag.from_edges(2, []), mode="pdag")


class TestMeanAveragePrecision:
    def test_perfect_scores(self, y_graph):
        s = np.zeros((4, 4))
        for i, j in y_graph.edges():
            s[i, j] = 1.0
        assert mean_average_precision(EdgeScores(4, s), y_graph) == pytest.approx(1.0)

    def test_two_node_hand_computed(self):
        g = Dag.from_edges(2, [(0, 1)])
        s = EdgeScores(2, np.array([[0, 0.3], [0.7, 0]]))
        # ranking: (1,0) wrong then (0,1) right, AP = 1/2
        assert mean_average_precision(s, g) == pytest.approx(0.5)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            g = random_dag_max_degree(5, rng)
            if not g.edges():
                continue
            s = EdgeScores(5, rng.random((5, 5)))
            assert mean_average_precision(s, g) == pytest.approx(
                pooled_ap_bruteforce(s.score, g.adj)
            )

    def test_random_scores_near_positive_rate(self):
        rng = np.random.default_rng(52)
        g = random_dag_max_degree(8, rng)
        rate = g.edge_count() / (8 * 7)
        vals = [
            mean_average_precision(EdgeScores(8, rng.random((8, 8))), g)
            for _ in range(300)
        ]
        # random-ranking AP is slightly biased above prevalence at this size
        assert rate - 0.02 < np.mean(vals) < rate + 0.1

    def test_macro_differs_when_rows_unbalanced(self):
        g = Dag.from_edges(3, [(0, 1), (0, 2)])
        s = EdgeScores(3, np.array([[0, 0.9, 0.1], [0, 0, 0.8], [0, 0, 0]]))
        micro = mean_average_precision(s, g, average="micro")
        macro = mean_average_precision(s, g, average="macro")
        assert micro != macro

    def test_no_edges_rejected(self):
        with pytest.raises(DataError):
            mean_average_precision(EdgeScores(3), Dag.from_edges(3, []))


class TestAuroc:
    def test_perfect_and_inverted(self, y_graph):
        s = np.zeros((4, 4))
        for i, j in y_graph.edges():
            s[i, j] = 1.0
        assert auroc(EdgeScores(4, s), y_graph) == pytest.approx(1.0)
        assert auroc(EdgeScores(4, 0.5 - 0.5 * s), y_graph) == pytest.approx(0.0)

    def test_uniform_scores_near_half(self):
        rng = np.random.default_rng(53)
        g = random_dag_max_degree(8, rng)
        vals = [auroc(EdgeScores(8, rng.random((8, 8))), g) for _ in range(300)]
        assert abs(np.mean(vals) - 0.5) < 0.02

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(54)
        g = random_dag_max_degree(6, rng)
        raw = rng.random((6, 6))
        a = auroc(EdgeScores(6, raw), g)
        b = auroc(EdgeScores(6, raw**3), g)
        assert a == pytest.approx(b)

    def test_diagonal_irrelevant(self):
        rng = np.random.default_rng(55)
        g = random_dag_max_degree(5, rng)
        raw = rng.random((5, 5))
        shifted = raw.copy()
        np.fill_diagonal(shifted, 0.0)
        assert auroc(EdgeScores(5, raw), g) == auroc(EdgeScores(5, shifted), g)

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            auroc(EdgeScores(3), Dag.from_edges(3, []))


class TestOrientationAccuracy:
    def test_all_correct(self, y_graph):
        s = np.zeros((4, 4))
        for i, j in y_graph.edges():
            s[i, j] = 1.0
        assert orientation_accuracy(EdgeScores(4, s), y_graph) == 1.0

    def test_ties_count_as_wrong(self):
        g = Dag.from_edges(2, [(0, 1)])
        s = EdgeScores(2, np.array([[0, 0.5], [0.5, 0]]))
        assert orientation_accuracy(s, g) == 0.0

    def test_partial(self):
        g = Dag.from_edges(3, [(0, 1), (1, 2)])
        s = EdgeScores(3, np.array([[0, 0.9, 0], [0.1, 0, 0.2], [0, 0.8, 0]]))
        assert orientation_accuracy(s, g) == pytest.approx(0.5)

    def test_no_edges_rejected(self):
        with pytest.raises(DataError):
            orientation_accuracy(EdgeScores(2), Dag.from_edges(2, []))


class TestThresholdPolicy:
    def test_float_passthrough(self):
        assert threshold_scores(EdgeScores(2), None, 0.3) == 0.3

    def test_default_is_half(self):
        assert threshold_scores(EdgeScores(2), None, "default") == 0.5

    def test_quantile_matches_edge_rate(self):
        rng = np.random.default_rng(56)
        g = random_dag_max_degree(6, rng)
        s = EdgeScores(6, rng.random((6, 6)))
        thr = threshold_scores(s, g, "quantile")
        mask = ~np.eye(6, dtype=bool)
        npred = (s.score[mask] > thr).sum()
        assert abs(npred - g.edge_count()) <= 1

    def test_quantile_requires_truth(self):
        with pytest.raises(ConfigError):
            threshold_scores(EdgeScores(2), None, "quantile")

    def test_unknown_policy(self):
        with pytest.raises(ConfigError):
            threshold_scores(EdgeScores(2), None, "otsu")


class TestEvaluate:
    def test_perfect_report(self, y_graph):
        s = np.zeros((4, 4))
        for i, j in y_graph.edges():
            s[i, j] = 1.0
        rep = evaluate(EdgeScores(4, s), y_graph)
        assert rep.shd_dag == 0
        assert rep.shd_cpdag == 0
        assert rep.map == pytest.approx(1.0)
        assert rep.precision == 1.0 and rep.recall == 1.0 and rep.f1 == 1.0
        assert rep.edges_predicted == rep.edges_true == 3

    def test_json_round_trip(self, y_graph):
        s = EdgeScores(4, np.random.default_rng(57).random((4, 4)))
        rep = evaluate(s, y_graph)
        decoded = json.loads(rep.to_json())
        assert decoded["edges_true"] == 3
        assert set(decoded) == {
            "shd_dag", "shd_cpdag", "map", "auroc", "oa",
            "precision", "recall", "f1", "edges_predicted", "edges_true",
        }

    def test_tsv_row_field_count(self, y_graph):
        s = EdgeScores(4, np.random.default_rng(58).random((4, 4)))
        assert len(evaluate(s, y_graph).to_tsv_row().split("\t")) == 10

    def test_empty_truth_fields_none(self):
        rep = evaluate(EdgeScores(3), Dag.from_edges(3, []))
        assert rep.map is None and rep.auroc is None and rep.oa is None
        assert rep.recall is None
