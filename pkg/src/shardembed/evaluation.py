"""Node classification and link prediction protocols."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import f1_score
from sklearn.multiclass import OneVsRestClassifier
from sklearn.preprocessing import MultiLabelBinarizer

from .graph import Graph, GraphValidationError

logger = logging.getLogger(__name__)

MAX_SPLIT_ATTEMPTS = 100


class EvaluationError(ValueError):
    pass


def load_labels(path, label_index: dict[str, int]) -> dict[int, set[int]]:
    """Read ``node_label<TAB>class`` lines; a node may appear on several lines.

    Class names are mapped to dense ids in first-seen order.
    """
    classes: dict[str, int] = {}
    labels: dict[int, set[int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t") if "\t" in line else line.split()
            if len(fields) != 2:
                raise EvaluationError(f"{path}:{lineno}: expected 'node<TAB>class'")
            node, cls = fields[0].strip(), fields[1].strip()
            if node not in label_index:
                raise EvaluationError(f"{path}:{lineno}: node {node!r} is not in the embeddings")
            labels.setdefault(label_index[node], set()).add(classes.setdefault(cls, len(classes)))
    if not labels:
        raise EvaluationError(f"{path}: no labels")
    return labels


def normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms == 0, 1.0, norms)


def _split(nodes, y, train_fraction, rng):
    n_train = max(1, int(round(train_fraction * len(nodes))))
    for _ in range(MAX_SPLIT_ATTEMPTS):
        perm = rng.permutation(len(nodes))
        train, test = perm[:n_train], perm[n_train:]
        if y[train].sum(axis=0).all():
            return train, test
    raise EvaluationError("could not draw a training split covering every class")


def node_classification(embeddings, labels: dict[int, set[int]], train_fraction: float = 0.1,
                        trials: int = 10, normalize: bool = True, seed: int = 0,
                        C: float = 10.0) -> tuple[float, float]:
    """Mean Micro-/Macro-F1 of one-vs-rest logistic regression over ``trials`` splits.

    A test node with ``k`` true labels is assigned its ``k`` highest-scoring
    classes. ``C`` is the inverse L2 penalty of each binary classifier.
    """
    if not labels:
        raise EvaluationError("no labels")
    if not 0 < train_fraction < 1:
        raise EvaluationError("train_fraction must lie in (0, 1)")
    nodes = np.array(sorted(labels))
    x = np.asarray(embeddings, dtype=np.float64)[nodes]
    if normalize:
        x = normalize_rows(x)
    mlb = MultiLabelBinarizer()
    y = mlb.fit_transform([sorted(labels[v]) for v in nodes])
    if y.shape[1] < 2:
        raise EvaluationError("need at least two classes")
    rng = np.random.default_rng(seed)
    micro, macro = [], []
    for _ in range(trials):
        train, test = _split(nodes, y, train_fraction, rng)
        clf = OneVsRestClassifier(LogisticRegression(C=C, max_iter=2000))
        clf.fit(x[train], y[train])
        scores = clf.decision_function(x[test])
        pred = np.zeros_like(y[test])
        for row, k in enumerate(y[test].sum(axis=1)):
            pred[row, np.argsort(-scores[row], kind="stable")[:k]] = 1
        micro.append(f1_score(y[test], pred, average="micro", zero_division=0))
        macro.append(f1_score(y[test], pred, average="macro", zero_division=0))
    return float(np.mean(micro)), float(np.mean(macro))


@dataclass
class LinkPredSplit:
    positives: np.ndarray
    negatives: np.ndarray

    def __len__(self):
        return len(self.positives)

    def save(self, path, labels=None):
        """``src<TAB>dst<TAB>1|0`` lines, positives first."""
        name = (lambda i: labels[i]) if labels is not None else str
        with open(path, "w", encoding="utf-8") as fh:
            for arr, flag in ((self.positives, 1), (self.negatives, 0)):
                for u, v in arr:
                    fh.write(f"{name(u)}\t{name(v)}\t{flag}\n")

    @classmethod
    def load(cls, path, label_index: dict[str, int]) -> "LinkPredSplit":
        pos, neg = [], []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                fields = line.split("\t") if "\t" in line else line.split()
                if len(fields) != 3 or fields[2] not in ("0", "1"):
                    raise EvaluationError(f"{path}:{lineno}: expected 'src<TAB>dst<TAB>0|1'")
                try:
                    pair = (label_index[fields[0]], label_index[fields[1]])
                except KeyError as exc:
                    raise EvaluationError(f"{path}:{lineno}: unknown node {exc.args[0]!r}") from None
                (pos if fields[2] == "1" else neg).append(pair)
        return cls(np.array(pos, dtype=np.int64).reshape(-1, 2),
                   np.array(neg, dtype=np.int64).reshape(-1, 2))


def make_linkpred_split(g: Graph, holdout_fraction: float, seed: int = 0):
    """Hold out edges and pair them with as many uniformly drawn non-edges.

    Returns ``(split, reduced_graph)``. Negatives are distinct unordered
    pairs that are not edges of the full graph. Held-out edges never leave
    a node without neighbors, so the reduced graph keeps every node. A graph
    with too few non-edges gets fewer negatives than positives.
    """
    if not 0 <= holdout_fraction < 1:
        raise EvaluationError("holdout fraction must lie in [0, 1)")
    src, dst, w = g.edges()
    k = int(round(holdout_fraction * len(src)))
    empty = np.zeros((0, 2), dtype=np.int64)
    if k == 0:
        return LinkPredSplit(empty, empty.copy()), g
    rng = np.random.default_rng(seed)
    # visit edges in random order, skipping any whose removal would isolate a node
    remaining = np.bincount(np.concatenate([src, dst]), minlength=g.node_count)
    held = []
    for e in rng.permutation(len(src)):
        u, v = src[e], dst[e]
        if remaining[u] > 1 and remaining[v] > 1:
            remaining[u] -= 1
            remaining[v] -= 1
            held.append(e)
            if len(held) == k:
                break
    if len(held) < k:
        raise EvaluationError(f"only {len(held)} edges can be held out without isolating a node")
    held = np.array(held, dtype=np.int64)
    keep = np.ones(len(src), dtype=bool)
    keep[held] = False
    positives = np.stack([src[held], dst[held]], axis=1).astype(np.int64)

    n = g.node_count
    existing = set((src.astype(np.int64) * n + dst).tolist())
    k_neg = min(k, n * (n - 1) // 2 - len(existing))
    if k_neg < k:
        logger.warning("only %d non-edges available for %d held-out edges", k_neg, k)
    chosen: list[tuple[int, int]] = []
    seen = set()
    while len(chosen) < k_neg:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        a, b = (u, v) if u < v else (v, u)
        key = int(a) * n + int(b)
        if key in existing or key in seen:
            continue
        seen.add(key)
        chosen.append((int(u), int(v)))
    negatives = np.array(chosen, dtype=np.int64).reshape(-1, 2)
    try:
        reduced = g.with_edges(src[keep], dst[keep], w[keep])
    except GraphValidationError:
        raise EvaluationError("holdout removes every edge") from None
    return LinkPredSplit(positives, negatives), reduced


def cosine_scores(embeddings, pairs) -> np.ndarray:
    x = normalize_rows(np.asarray(embeddings, dtype=np.float64))
    pairs = np.asarray(pairs).reshape(-1, 2)
    return np.einsum("ij,ij->i", x[pairs[:, 0]], x[pairs[:, 1]])


def auc_from_scores(pos_scores, neg_scores) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    pos_scores = np.asarray(pos_scores, dtype=np.float64)
    neg_scores = np.asarray(neg_scores, dtype=np.float64)
    if len(pos_scores) == 0 or len(neg_scores) == 0:
        raise EvaluationError("empty split")
    ranks = rankdata(np.concatenate([pos_scores, neg_scores]))
    n_pos, n_neg = len(pos_scores), len(neg_scores)
    return float((ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def link_prediction_auc(embeddings, split: LinkPredSplit) -> float:
    if len(split.positives) == 0 or len(split.negatives) == 0:
        raise EvaluationError("empty split")
    return auc_from_scores(cosine_scores(embeddings, split.positives),
                           cosine_scores(embeddings, split.negatives))


def format_report(metrics: dict) -> str:
    return "\n".join(f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}"
                     for k, v in metrics.items())


def write_report_json(metrics: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
