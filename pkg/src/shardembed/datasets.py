"""Synthetic graphs for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .graph import Graph


def stochastic_block_model(sizes, p_in: float, p_out: float, seed: int = 0):
    """Undirected SBM. Returns ``(graph, community)`` with one community id per node."""
    rng = np.random.default_rng(seed)
    sizes = [int(s) for s in sizes]
    community = np.repeat(np.arange(len(sizes)), sizes)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    src, dst = [], []
    # per block pair: binomial edge count, then that many distinct pairs
    for a in range(len(sizes)):
        for b in range(a, len(sizes)):
            if a == b:
                possible = sizes[a] * (sizes[a] - 1) // 2
            else:
                possible = sizes[a] * sizes[b]
            m = rng.binomial(possible, p_in if a == b else p_out)
            picks = rng.choice(possible, size=m, replace=False)
            if a == b:
                iu, ju = np.triu_indices(sizes[a], k=1)
                i, j = iu[picks], ju[picks]
            else:
                i, j = np.divmod(picks, sizes[b])
            src.append(starts[a] + i)
            dst.append(starts[b] + j)
    g = Graph.from_edges(np.concatenate(src), np.concatenate(dst), node_count=len(community))
    return g, community


def chung_lu(node_count: int, edge_count: int, exponent: float = 2.5, seed: int = 0) -> Graph:
    """Power-law random graph: endpoints drawn proportionally to expected degree.

    The result has slightly fewer than ``edge_count`` edges after dropping
    duplicates and self-loops.
    """
    rng = np.random.default_rng(seed)
    weights = (np.arange(node_count) + 1.0) ** (-1.0 / (exponent - 1.0))
    weights /= weights.sum()
    src = rng.choice(node_count, size=edge_count, p=weights)
    dst = rng.choice(node_count, size=edge_count, p=weights)
    return Graph.from_edges(src, dst, node_count=node_count, sum_duplicates=False)
