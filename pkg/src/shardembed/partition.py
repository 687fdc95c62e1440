"""Degree-guided zig-zag partitioning and grid bucketing of sample pools."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

from .graph import GraphValidationError, NODE_DTYPE


@dataclass(frozen=True)
class Partitioning:
    num_parts: int
    part_of: np.ndarray
    members: tuple

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self.members])

    def local_index(self) -> np.ndarray:
        """Row position of each node inside its own part."""
        local = np.empty(len(self.part_of), dtype=np.int64)
        for m in self.members:
            local[m] = np.arange(len(m))
        return local


def zigzag_order(n: int, count: int) -> np.ndarray:
    """Part ids 0..n-1, n-1..0, 0..n-1, ... truncated to ``count`` entries."""
    period = np.concatenate([np.arange(n), np.arange(n)[::-1]])
    reps = -(-count // len(period))
    return np.tile(period, reps)[:count]


def zigzag_partition(degrees, n: int) -> Partitioning:
    """Sort nodes by descending degree (ties by id) and deal them out in
    boustrophedon order, so every part gets a similar share of heavy nodes."""
    degrees = np.asarray(degrees, dtype=np.float64)
    count = len(degrees)
    if n < 1:
        raise GraphValidationError("need at least one partition")
    if n > count:
        raise GraphValidationError(f"{n} partitions for {count} nodes")
    # lexsort: last key is primary
    order = np.lexsort((np.arange(count), -degrees))
    part_of = np.empty(count, dtype=NODE_DTYPE)
    part_of[order] = zigzag_order(n, count)
    members = tuple(np.flatnonzero(part_of == p).astype(NODE_DTYPE) for p in range(n))
    return Partitioning(num_parts=n, part_of=part_of, members=members)


class PoolState(enum.Enum):
    FILLING = "filling"
    READY = "ready"
    CONSUMED = "consumed"


class PoolStateError(RuntimeError):
    pass


class SamplePool:
    """Fixed-capacity buffer of (source, target) samples.

    After :func:`redistribute` the samples are grouped by grid block and
    ``block_offsets[i * n + j]`` marks where block ``(i, j)`` starts.
    """

    def __init__(self, capacity: int):
        self.capacity = int(capacity)
        self.samples = np.zeros((self.capacity, 2), dtype=NODE_DTYPE)
        self.length = 0
        self.num_parts = None
        self.block_offsets = None
        self.state = PoolState.CONSUMED

    @classmethod
    def from_samples(cls, samples) -> "SamplePool":
        arr = np.asarray(samples, dtype=NODE_DTYPE).reshape(-1, 2)
        pool = cls(len(arr))
        pool.samples[:] = arr
        pool.length = len(arr)
        pool.state = PoolState.READY
        return pool

    def _expect(self, *states):
        if self.state not in states:
            raise PoolStateError(f"pool is {self.state.value}, expected {[s.value for s in states]}")

    def begin_fill(self):
        self._expect(PoolState.CONSUMED)
        self.state = PoolState.FILLING
        self.length = 0
        self.num_parts = None
        self.block_offsets = None

    def finish_fill(self, length: int):
        self._expect(PoolState.FILLING)
        self.length = int(length)
        self.state = PoolState.READY

    def release(self):
        self._expect(PoolState.READY)
        self.state = PoolState.CONSUMED

    def view(self) -> np.ndarray:
        """Valid samples; refuses to expose a pool that is still being filled."""
        self._expect(PoolState.READY)
        return self.samples[:self.length]

    def segment(self, start: int, stop: int) -> "SamplePool":
        """A ready pool sharing memory with ``samples[start:stop]``."""
        data = self.view()[start:stop]
        seg = SamplePool.__new__(SamplePool)
        seg.capacity = len(data)
        seg.samples = data
        seg.length = len(data)
        seg.num_parts = None
        seg.block_offsets = None
        seg.state = PoolState.READY
        return seg

    def block(self, vid: int, cid: int) -> np.ndarray:
        if self.block_offsets is None:
            raise PoolStateError("pool has not been redistributed")
        k = vid * self.num_parts + cid
        return self.view()[self.block_offsets[k]:self.block_offsets[k + 1]]

    def block_sizes(self) -> np.ndarray:
        return np.diff(self.block_offsets).reshape(self.num_parts, self.num_parts)

    def dump(self, path) -> None:
        """Write valid samples as little-endian int32 pairs."""
        self.view().astype("<i4").tofile(path)


@numba.njit(nogil=True, cache=True)
def _bucket(samples, part_src, part_dst, n, out, offsets):
    m = samples.shape[0]
    counts = np.zeros(n * n, dtype=np.int64)
    for k in range(m):
        counts[part_src[samples[k, 0]] * n + part_dst[samples[k, 1]]] += 1
    offsets[0] = 0
    for b in range(n * n):
        offsets[b + 1] = offsets[b] + counts[b]
    cursor = offsets[:-1].copy()
    for k in range(m):
        b = part_src[samples[k, 0]] * n + part_dst[samples[k, 1]]
        out[cursor[b], 0] = samples[k, 0]
        out[cursor[b], 1] = samples[k, 1]
        cursor[b] += 1


def redistribute(pool: SamplePool, vertex_parts: Partitioning,
                 context_parts: Partitioning | None = None) -> SamplePool:
    """Group samples contiguously by (source part, target part), stably."""
    context_parts = context_parts or vertex_parts
    if context_parts.num_parts != vertex_parts.num_parts:
        raise ValueError("vertex and context partitionings disagree on part count")
    n = vertex_parts.num_parts
    data = pool.view()
    out = np.empty_like(data)
    offsets = np.zeros(n * n + 1, dtype=np.int64)
    _bucket(data, vertex_parts.part_of, context_parts.part_of, n, out, offsets)
    data[:] = out
    pool.num_parts = n
    pool.block_offsets = offsets
    return pool
