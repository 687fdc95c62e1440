"""Online augmentation: random-walk edge samples generated straight into a pool."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .graph import AliasTable, Graph, GraphValidationError, alias_draw, build_alias
from .partition import SamplePool


@dataclass
class SamplerConfig:
    walk_length: int = 40
    augmentation_distance: int = 2
    pool_capacity: int = 100_000
    sampler_threads: int = 1
    rng_seed: int = 0

    def validate(self):
        if self.walk_length < 1:
            raise ValueError("walk_length must be >= 1")
        if not 1 <= self.augmentation_distance <= self.walk_length:
            raise ValueError("augmentation distance must lie in [1, walk_length]")
        if self.sampler_threads < 1:
            raise ValueError("need at least one sampler thread")
        if self.pool_capacity < 1 or self.pool_capacity % self.sampler_threads:
            raise ValueError(
                f"pool capacity {self.pool_capacity} is not a positive multiple of "
                f"{self.sampler_threads} sampler threads"
            )


@numba.njit(nogil=True, cache=True)
def _walk(indptr, indices, walk_prob, walk_alias, start, length, rng, out):
    out[0] = start
    cur = start
    for t in range(1, length + 1):
        lo = indptr[cur]
        hi = indptr[cur + 1]
        if hi == lo:
            return t
        k = alias_draw(walk_prob[lo:hi], walk_alias[lo:hi], rng.random())
        cur = indices[lo + k]
        out[t] = cur
    return length + 1


@numba.njit(nogil=True, cache=True)
def _fill(indptr, indices, walk_prob, walk_alias, dep_prob, dep_alias,
          walk_length, s, out, rng):
    cap = out.shape[0]
    walk = np.empty(walk_length + 1, dtype=np.int64)
    k = 0
    while k < cap:
        start = alias_draw(dep_prob, dep_alias, rng.random())
        m = _walk(indptr, indices, walk_prob, walk_alias, start, walk_length, rng, walk)
        for i in range(m):
            for j in range(i + 1, min(i + s, m - 1) + 1):
                if walk[i] != walk[j]:
                    out[k, 0] = walk[i]
                    out[k, 1] = walk[j]
                    k += 1
                    if k == cap:
                        return


@numba.njit(nogil=True, cache=True)
def _pseudo_shuffle(src, s, out):
    m = src.shape[0]
    offsets = np.empty(s, dtype=np.int64)
    pos = 0
    for b in range(s):
        offsets[b] = pos
        pos += (m - b + s - 1) // s
    for k in range(m):
        dest = offsets[k % s] + k // s
        out[dest, 0] = src[k, 0]
        out[dest, 1] = src[k, 1]


def pseudo_shuffle(samples, s: int) -> np.ndarray:
    """Scatter sample ``k`` to block ``k mod s`` and concatenate the blocks.

    Walk-derived neighbors land ``s`` apart, while each block is still
    written sequentially.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    arr = np.asarray(samples)
    if arr.size == 0:
        return arr.reshape(-1, 2).copy()
    arr = arr.reshape(-1, 2)
    out = np.empty_like(arr)
    _pseudo_shuffle(arr, s, out)
    return out


def pairs_within_distance(walk, s: int) -> np.ndarray:
    """Ordered pairs ``(walk[i], walk[j])`` with ``0 < j - i <= s``, skipping self-pairs."""
    if s < 1:
        raise ValueError("s must be >= 1")
    pairs = [
        (walk[i], walk[j])
        for i in range(len(walk))
        for j in range(i + 1, min(i + s, len(walk) - 1) + 1)
        if walk[i] != walk[j]
    ]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def departure_table(g: Graph) -> AliasTable:
    return build_alias(g.degree)


def sample_departure(g: Graph, table: AliasTable, rng: np.random.Generator) -> int:
    """Draw a walk start with probability proportional to degree."""
    return int(alias_draw(table.prob, table.alias, rng.random()))


def random_walk(g: Graph, start: int, length: int, rng: np.random.Generator) -> np.ndarray:
    if g.indptr[start + 1] == g.indptr[start]:
        raise ValueError(f"node {start} is isolated")
    prob, alias = g.walk_tables()
    out = np.empty(length + 1, dtype=np.int64)
    m = _walk(g.indptr, g.indices, prob, alias, start, length, rng, out)
    return out[:m]


class Sampler:
    """Owns one RNG stream per sampler thread; successive fills continue the streams."""

    def __init__(self, g: Graph, cfg: SamplerConfig):
        cfg.validate()
        if g.edge_count == 0:
            raise GraphValidationError("cannot sample from a graph without edges")
        self.graph = g
        self.cfg = cfg
        self.departure = departure_table(g)
        self.walk_prob, self.walk_alias = g.walk_tables()
        self.rngs = [np.random.default_rng(cfg.rng_seed + t) for t in range(cfg.sampler_threads)]
        self._executor = None

    def _fill_segment(self, t: int, segment: np.ndarray):
        g, cfg = self.graph, self.cfg
        raw = np.empty_like(segment)
        _fill(g.indptr, g.indices, self.walk_prob, self.walk_alias,
              self.departure.prob, self.departure.alias,
              cfg.walk_length, cfg.augmentation_distance, raw, self.rngs[t])
        _pseudo_shuffle(raw, cfg.augmentation_distance, segment)

    def fill(self, pool: SamplePool) -> SamplePool:
        if pool.capacity != self.cfg.pool_capacity:
            raise ValueError("pool capacity does not match sampler configuration")
        pool.begin_fill()
        threads = self.cfg.sampler_threads
        seg = pool.capacity // threads
        segments = [pool.samples[t * seg:(t + 1) * seg] for t in range(threads)]
        if threads == 1:
            self._fill_segment(0, segments[0])
        else:
            if self._executor is None:
                self._executor = ThreadPoolExecutor(threads, thread_name_prefix="sampler")
            futures = [self._executor.submit(self._fill_segment, t, segments[t]) for t in range(threads)]
            for f in futures:
                f.result()
        pool.finish_fill(pool.capacity)
        return pool

    def close(self):
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None


def fill_pool_parallel(g: Graph, cfg: SamplerConfig) -> SamplePool:
    sampler = Sampler(g, cfg)
    try:
        return sampler.fill(SamplePool(cfg.pool_capacity))
    finally:
        sampler.close()


def adjacent_shared_node_rate(samples) -> float:
    """Fraction of consecutive sample pairs that have a node in common."""
    s = np.asarray(samples).reshape(-1, 2)
    if len(s) < 2:
        return 0.0
    a, b = s[:-1], s[1:]
    shared = ((a[:, 0] == b[:, 0]) | (a[:, 0] == b[:, 1])
              | (a[:, 1] == b[:, 0]) | (a[:, 1] == b[:, 1]))
    return float(shared.mean())
