"""Graph ingestion, degree statistics and alias samplers."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

logger = logging.getLogger(__name__)

NODE_DTYPE = np.int32


class GraphFormatError(ValueError):
    """A line of an edge-list file could not be parsed."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class GraphValidationError(ValueError):
    pass


@dataclass(frozen=True)
class AliasTable:
    """Walker/Vose alias table. ``prob[i]`` is the chance of keeping slot ``i``."""

    prob: np.ndarray
    alias: np.ndarray

    @property
    def size(self) -> int:
        return len(self.prob)

    def implied_probabilities(self) -> np.ndarray:
        """Exact outcome distribution encoded by the table."""
        n = self.size
        mass = self.prob / n
        np.add.at(mass, self.alias, (1.0 - self.prob) / n)
        return mass

    def draw(self, rng: np.random.Generator, size: int | None = None):
        if size is None:
            return int(alias_draw(self.prob, self.alias, rng.random()))
        u = rng.random(size)
        return alias_draw_many(self.prob, self.alias, u)


def build_alias(weights) -> AliasTable:
    """Build an alias table for a nonnegative weight vector.

    Small and large worklists are drained in ascending index order, so the
    table is a pure function of ``weights``.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise GraphValidationError("alias weights must be a non-empty vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise GraphValidationError("alias weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise GraphValidationError("alias weights are all zero")

    n = len(w)
    scaled = w / total * n
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=NODE_DTYPE)
    small = deque(i for i in range(n) if scaled[i] < 1.0)
    large = deque(i for i in range(n) if scaled[i] >= 1.0)
    while small and large:
        s = small.popleft()
        l = large[0]
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        if scaled[l] < 1.0:
            large.popleft()
            small.append(l)
    # leftovers carry mass 1 up to rounding
    for i in small:
        prob[i] = 1.0
    for i in large:
        prob[i] = 1.0
    return AliasTable(prob=prob, alias=alias)


@numba.njit(nogil=True, cache=True)
def alias_draw(prob, alias, u):
    # a single uniform picks the slot and the acceptance coin
    n = prob.shape[0]
    x = u * n
    i = int(x)
    if i >= n:
        i = n - 1
    if x - i < prob[i]:
        return i
    return alias[i]


@numba.njit(nogil=True, cache=True)
def alias_draw_many(prob, alias, u):
    out = np.empty(u.shape[0], dtype=np.int64)
    for k in range(u.shape[0]):
        out[k] = alias_draw(prob, alias, u[k])
    return out


@dataclass
class Graph:
    """Undirected weighted graph in CSR form with sorted neighbor lists."""

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    labels: list[str] = field(default_factory=list)
    self_loops_dropped: int = 0

    def __post_init__(self):
        self.degree = np.zeros(self.node_count, dtype=np.float64)
        np.add.at(
            self.degree,
            np.repeat(np.arange(self.node_count), np.diff(self.indptr)),
            self.weights,
        )
        if not self.labels:
            self.labels = [str(i) for i in range(self.node_count)]
        self._walk_tables = None

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def neighbor_weights(self, v: int) -> np.ndarray:
        return self.weights[self.indptr[v]:self.indptr[v + 1]]

    def edges(self):
        """Each undirected edge once as ``(u, v, w)`` arrays with ``u < v``."""
        src = np.repeat(np.arange(self.node_count, dtype=NODE_DTYPE), np.diff(self.indptr))
        keep = src < self.indices
        return src[keep], self.indices[keep], self.weights[keep]

    def label_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def walk_tables(self):
        """Per-node alias tables over incident edges, flattened along CSR.

        Returns ``(prob, alias)`` where ``alias`` holds offsets local to the
        owning node's neighbor list.
        """
        if self._walk_tables is None:
            prob = np.ones(len(self.indices), dtype=np.float64)
            alias = np.zeros(len(self.indices), dtype=NODE_DTYPE)
            for v in range(self.node_count):
                lo, hi = self.indptr[v], self.indptr[v + 1]
                if hi - lo > 1 and not np.all(self.weights[lo:hi] == self.weights[lo]):
                    table = build_alias(self.weights[lo:hi])
                    prob[lo:hi] = table.prob
                    alias[lo:hi] = table.alias
                else:
                    alias[lo:hi] = np.arange(hi - lo)
            self._walk_tables = (prob, alias)
        return self._walk_tables

    def with_edges(self, src, dst, weights=None) -> "Graph":
        """A graph on the same node set and labels with a new edge set."""
        g = Graph.from_edges(src, dst, weights, node_count=self.node_count, sum_duplicates=True)
        g.labels = list(self.labels)
        return g

    @classmethod
    def from_edges(cls, src, dst, weights=None, node_count=None, labels=None,
                   sum_duplicates=True) -> "Graph":
        """Symmetrize an edge array into a Graph.

        Duplicate undirected edges are merged: weights are summed when
        ``sum_duplicates`` is set, otherwise the edge keeps weight of its
        first occurrence. Self-loops are dropped.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if weights is None:
            w = np.ones(len(src), dtype=np.float64)
        else:
            w = np.asarray(weights, dtype=np.float64)
        if len(src) != len(dst) or len(src) != len(w):
            raise GraphValidationError("edge arrays differ in length")
        if np.any(w < 0):
            raise GraphValidationError("negative edge weight")
        if node_count is None:
            node_count = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= node_count):
            raise GraphValidationError("node id out of range")

        loops = src == dst
        n_loops = int(loops.sum())
        if n_loops:
            logger.warning("dropped %d self-loop(s)", n_loops)
        src, dst, w = src[~loops], dst[~loops], w[~loops]
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        key = lo * node_count + hi
        uniq, first, inverse = np.unique(key, return_index=True, return_inverse=True)
        if sum_duplicates:
            merged = np.bincount(inverse, weights=w, minlength=len(uniq))
        else:
            merged = w[first]
        keep = merged > 0
        uniq, merged = uniq[keep], merged[keep]
        if node_count == 0 or len(uniq) == 0:
            raise GraphValidationError("graph has no edges")

        u, v = uniq // node_count, uniq % node_count
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        vals = np.concatenate([merged, merged])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=node_count), out=indptr[1:])
        return cls(
            indptr=indptr,
            indices=cols.astype(NODE_DTYPE),
            weights=vals,
            labels=list(labels) if labels is not None else [],
            self_loops_dropped=n_loops,
        )


def _split_fields(line: str) -> list[str]:
    if "\t" in line:
        return [f.strip() for f in line.split("\t") if f.strip() != ""]
    return line.split()


def load_edge_list(path, weighted: bool = False) -> Graph:
    """Read a tab- or space-separated edge list.

    Labels are mapped to dense ids in first-seen order. In weighted mode
    duplicate edges (either direction) have their weights summed; unweighted
    input is treated as an edge set, so repeats collapse to weight 1.
    """
    path = Path(path)
    ids: dict[str, int] = {}
    src, dst, wts = [], [], []
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = _split_fields(line)
            if len(fields) not in (2, 3):
                raise GraphFormatError(path, lineno, f"expected 2 or 3 fields, got {len(fields)}")
            for label in fields[:2]:
                if any(ch.isspace() for ch in label):
                    raise GraphFormatError(path, lineno, f"node label {label!r} contains whitespace")
            weight = 1.0
            if len(fields) == 3:
                try:
                    weight = float(fields[2])
                except ValueError:
                    raise GraphFormatError(path, lineno, f"bad weight {fields[2]!r}") from None
                if weight < 0 or not np.isfinite(weight):
                    raise GraphValidationError(f"{path}:{lineno}: invalid edge weight {weight}")
            if not weighted:
                weight = 1.0
            a = ids.setdefault(fields[0], len(ids))
            b = ids.setdefault(fields[1], len(ids))
            src.append(a)
            dst.append(b)
            wts.append(weight)
    if not src:
        raise GraphValidationError(f"{path}: empty graph")
    return Graph.from_edges(
        src, dst, wts, node_count=len(ids), labels=list(ids), sum_duplicates=weighted
    )


def write_label_map(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, label in enumerate(g.labels):
            fh.write(f"{label}\t{i}\n")


def degree_noise_weights(g: Graph, power: float = 0.75) -> np.ndarray:
    if power < 0:
        raise GraphValidationError("power must be nonnegative")
    out = np.power(g.degree, power)
    out[g.degree == 0] = 0.0
    return out
