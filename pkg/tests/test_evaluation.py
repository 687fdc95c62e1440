import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.metrics import roc_auc_score

from shardembed.evaluation import (EvaluationError, LinkPredSplit, auc_from_scores, cosine_scores,
                                   format_report, link_prediction_auc, load_labels,
                                   make_linkpred_split, node_classification)
from shardembed.graph import Graph

from conftest import write_lines


def two_clusters(n=200, d=8, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(0, 0.1, (n, d))
    x[: n // 2, 0] += 10
    x[n // 2:, 0] -= 10
    labels = {i: {0 if i < n // 2 else 1} for i in range(n)}
    return x, labels


def test_separable_classes_score_perfectly():
    x, labels = two_clusters()
    micro, macro = node_classification(x, labels, train_fraction=0.5, normalize=False)
    assert micro == macro == 1.0


def test_random_embeddings_are_chance_level():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(1000, 16))
    labels = {i: {i % 2} for i in range(1000)}
    micro, _ = node_classification(x, labels, train_fraction=0.5, trials=10)
    assert micro == pytest.approx(0.5, abs=0.05)


def test_multilabel_f1_in_range():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(300, 8))
    labels = {i: set(rng.choice(4, size=rng.integers(1, 3), replace=False).tolist()) for i in range(300)}
    micro, macro = node_classification(x, labels, trials=3)
    assert 0 <= micro <= 1 and 0 <= macro <= 1


def test_classification_errors():
    with pytest.raises(EvaluationError, match="no labels"):
        node_classification(np.zeros((3, 2)), {})
    with pytest.raises(EvaluationError):
        node_classification(np.zeros((3, 2)), {0: {0}, 1: {0}})


def test_auc_examples():
    assert auc_from_scores([1.0, 1.0], [-1.0, -1.0]) == 1.0
    assert auc_from_scores([0.3] * 5, [0.3] * 7) == 0.5
    assert auc_from_scores([0.0], [1.0]) == 0.0
    with pytest.raises(EvaluationError, match="empty split"):
        auc_from_scores([], [0.1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=40),
       st.lists(st.integers(-20, 20), min_size=1, max_size=40))
def test_auc_matches_library_and_is_rank_based(pos, neg):
    pos, neg = np.array(pos, float), np.array(neg, float)
    y = np.r_[np.ones(len(pos)), np.zeros(len(neg))]
    if len(set(y)) == 2:
        assert auc_from_scores(pos, neg) == pytest.approx(roc_auc_score(y, np.r_[pos, neg]))
    assert auc_from_scores(np.exp(pos / 5), np.exp(neg / 5)) == pytest.approx(auc_from_scores(pos, neg))


def test_cosine_scores():
    x = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 3.0]])
    np.testing.assert_allclose(cosine_scores(x, [(0, 1), (0, 2)]), [1.0, 0.0])


def test_link_prediction_on_obvious_embeddings():
    x = np.array([[1.0, 0.0], [1.0, 0.1], [0.0, 1.0], [0.1, 1.0]])
    split = LinkPredSplit(np.array([(0, 1), (2, 3)]), np.array([(0, 2), (1, 3)]))
    assert link_prediction_auc(x, split) == 1.0
    with pytest.raises(EvaluationError, match="empty split"):
        link_prediction_auc(x, LinkPredSplit(np.zeros((0, 2), int), np.zeros((0, 2), int)))


def test_split_fraction_zero(triangle):
    split, reduced = make_linkpred_split(triangle, 0.0)
    assert len(split) == 0 and reduced is triangle


def test_split_triangle_third():
    g = Graph.from_edges([0, 1, 2, 3], [1, 2, 0, 0])
    tri = Graph.from_edges([0, 1, 2], [1, 2, 0])
    split, reduced = make_linkpred_split(tri, 1 / 3)
    assert len(split.positives) == 1 and reduced.edge_count == 2
    # a triangle has no non-edges to offer as negatives
    assert len(split.negatives) == 0
    split, reduced = make_linkpred_split(g, 1 / 4)
    assert len(split.negatives) == 1 and reduced.edge_count == 3


def test_split_rejects_full_holdout(triangle):
    with pytest.raises(EvaluationError):
        make_linkpred_split(triangle, 1.0)


def test_split_large_graph_membership():
    rng = np.random.default_rng(0)
    n = 20_000
    src = rng.integers(0, n, 130_000)
    dst = rng.integers(0, n, 130_000)
    g = Graph.from_edges(src, dst, node_count=n)
    keys = np.unique(np.minimum(src, dst) * n + np.maximum(src, dst))
    g = Graph.from_edges(*(np.divmod(keys[keys // n != keys % n][:100_000], n)), node_count=n)
    assert g.edge_count == 100_000
    split, reduced = make_linkpred_split(g, 1e-4, seed=5)
    assert len(split.positives) == len(split.negatives) == 10
    edges = {(int(u), int(v)) for u, v, _ in zip(*g.edges())}
    for u, v in split.negatives:
        assert (min(u, v), max(u, v)) not in edges
    for u, v in split.positives:
        assert (u, v) in edges
        assert v not in reduced.neighbors(u)
    assert reduced.edge_count == g.edge_count - 10


def test_split_keeps_every_node(karate_file):
    from shardembed.graph import load_edge_list
    g = load_edge_list(karate_file)
    for seed in range(20):
        _, reduced = make_linkpred_split(g, 0.2, seed=seed)
        assert np.all(reduced.degree > 0)
    with pytest.raises(EvaluationError, match="isolating"):
        make_linkpred_split(Graph.from_edges([0, 2], [1, 3]), 0.5)


def test_split_round_trip(tmp_path):
    g = Graph.from_edges([0, 1, 2, 3, 0], [1, 2, 3, 0, 2], labels=list("abcd"))
    split, _ = make_linkpred_split(g, 0.4, seed=1)
    split.save(tmp_path / "s.tsv", g.labels)
    back = LinkPredSplit.load(tmp_path / "s.tsv", g.label_index())
    np.testing.assert_array_equal(back.positives, split.positives)
    np.testing.assert_array_equal(back.negatives, split.negatives)


def test_load_labels(tmp_path):
    path = write_lines(tmp_path / "labels", ["a\tx", "b\ty", "a\ty"])
    assert load_labels(path, {"a": 0, "b": 1}) == {0: {0, 1}, 1: {1}}
    with pytest.raises(EvaluationError, match="not in the embeddings"):
        load_labels(write_lines(tmp_path / "bad", ["zz\tx"]), {"a": 0})
    with pytest.raises(EvaluationError, match="no labels"):
        load_labels(write_lines(tmp_path / "empty", ["# nothing"]), {"a": 0})


def test_format_report():
    assert format_report({"micro_f1": 1.0, "trials": 3}) == "micro_f1=1.000000\ntrials=3"
