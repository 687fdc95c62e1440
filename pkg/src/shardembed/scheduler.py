"""Episode orchestration: orthogonal block assignment across parallel workers."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .partition import Partitioning, SamplePool, redistribute
from .trainer import BlockStats, EmbeddingStore, ShardNoise, TrainConfig, train_block

EPISODE_SIZE_PER_NODE = 200


class EpisodeSchedule:
    """Rotating Latin-square assignment of grid blocks to workers.

    With ``w`` workers and ``n >= w`` parts, each offset's ``n`` orthogonal
    blocks are handed out in subgroups of ``w``. In pinned-context mode each
    worker keeps context part ``i`` and the vertex parts rotate instead.
    """

    def __init__(self, num_parts: int, num_workers: int, pinned_context: bool = False):
        if num_parts < 1 or num_workers < 1:
            raise ValueError("need at least one part and one worker")
        if pinned_context and num_workers < num_parts:
            raise ValueError("pinned context needs one worker per partition")
        self.num_parts = num_parts
        self.num_workers = num_workers
        self.pinned_context = pinned_context
        self.offset = 0
        self._group = 0

    @property
    def active_workers(self) -> int:
        return min(self.num_workers, self.num_parts)

    @property
    def groups_per_offset(self) -> int:
        return math.ceil(self.num_parts / self.active_workers)

    @property
    def steps_per_episode(self) -> int:
        return self.num_parts * self.groups_per_offset

    def next_assignment(self) -> list[tuple[int, int, int]]:
        """``[(worker, vid, cid), ...]`` for the next concurrent step."""
        n, w = self.num_parts, self.active_workers
        lo = self._group * w
        out = []
        for i in range(lo, min(lo + w, n)):
            rotated = (i + self.offset) % n
            if self.pinned_context:
                out.append((i - lo, rotated, i))
            else:
                out.append((i - lo, i, rotated))
        check_orthogonal(out)
        self._group += 1
        if self._group == self.groups_per_offset:
            self._group = 0
            self.offset = (self.offset + 1) % n
        return out


def check_orthogonal(assignment):
    vids = [a[1] for a in assignment]
    cids = [a[2] for a in assignment]
    if len(set(vids)) != len(vids) or len(set(cids)) != len(cids):
        raise AssertionError(f"non-orthogonal assignment {assignment}")


def plan_training(g: Graph, cfg: TrainConfig) -> tuple[int, list[int]]:
    """Total positive samples (``epochs * |E|``) and the sizes of each episode."""
    total = cfg.epochs * g.edge_count
    size = episode_size_for(g, cfg)
    full, rest = divmod(total, size)
    return total, [size] * full + ([rest] if rest else [])


def episode_size_for(g: Graph, cfg: TrainConfig) -> int:
    if cfg.episode_size is not None:
        return cfg.episode_size
    return EPISODE_SIZE_PER_NODE * g.node_count


@dataclass
class EpisodeStats:
    index: int
    lr: float
    block: BlockStats = field(default_factory=BlockStats)
    wall_time: float = 0.0
    step_times: list = field(default_factory=list)

    @property
    def positives(self) -> int:
        return self.block.positives


class EpisodeRunner:
    """Trains redistributed pools against an embedding store.

    Blocks in one step run concurrently on a thread pool (the kernels
    release the GIL); a barrier separates steps. In ``copy_shards`` mode each
    worker trains on gathered copies of its shards, which are scattered back
    afterwards, mimicking device-memory transfers.
    """

    def __init__(self, store: EmbeddingStore, noise: ShardNoise, cfg: TrainConfig,
                 vertex_parts: Partitioning, context_parts: Partitioning | None = None,
                 num_workers: int = 1, pinned_context: bool = False,
                 copy_shards: bool = False, transfer_chunk: int | None = None):
        self.store = store
        self.noise = noise
        self.cfg = cfg
        self.vertex_parts = vertex_parts
        self.context_parts = context_parts or vertex_parts
        self.schedule = EpisodeSchedule(vertex_parts.num_parts, num_workers, pinned_context)
        self.copy_shards = copy_shards
        self.transfer_chunk = transfer_chunk
        self.episodes_run = 0
        self._executor = None
        if copy_shards:
            self._vertex_local = self.vertex_parts.local_index()
            self._context_local = self.context_parts.local_index()
        if self.schedule.active_workers > 1:
            self._executor = ThreadPoolExecutor(self.schedule.active_workers,
                                                thread_name_prefix="worker")

    def block_rng(self, episode: int, vid: int, cid: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, episode, vid, cid])

    def _chunks(self, samples):
        step = self.transfer_chunk or len(samples) or 1
        for lo in range(0, len(samples), step):
            yield samples[lo:lo + step]

    def train_one(self, pool: SamplePool, vid: int, cid: int, lr: float, episode: int) -> BlockStats:
        samples = pool.block(vid, cid)
        rng = self.block_rng(episode, vid, cid)
        table = self.noise.tables[cid]
        stats = BlockStats()
        if not self.copy_shards:
            ids = self.noise.ids(cid)
            for chunk in self._chunks(samples):
                stats += train_block(chunk, self.store.vertex, self.store.context,
                                     table, ids, self.cfg, lr, rng)
            return stats
        vrows = self.vertex_parts.members[vid]
        crows = self.context_parts.members[cid]
        vshard = self.store.vertex[vrows]
        cshard = self.store.context[crows]
        local = np.empty_like(samples)
        local[:, 0] = self._vertex_local[samples[:, 0]]
        local[:, 1] = self._context_local[samples[:, 1]]
        # noise table slots already enumerate the context part in member order
        ids = np.arange(len(crows))
        for chunk in self._chunks(local):
            stats += train_block(chunk, vshard, cshard, table, ids, self.cfg, lr, rng)
        self.store.vertex[vrows] = vshard
        self.store.context[crows] = cshard
        return stats

    def run_episode(self, pool: SamplePool, lr: float, on_step=None) -> EpisodeStats:
        """Redistribute ``pool`` and train every grid block exactly once.

        ``on_step(assignment, store)`` is called after each barrier.
        """
        t0 = time.perf_counter()
        episode = self.episodes_run
        self.episodes_run += 1
        redistribute(pool, self.vertex_parts, self.context_parts)
        stats = EpisodeStats(index=episode, lr=lr)
        for _ in range(self.schedule.steps_per_episode):
            assignment = self.schedule.next_assignment()
            ts = time.perf_counter()
            if self._executor is None or len(assignment) == 1:
                results = [self.train_one(pool, vid, cid, lr, episode) for _, vid, cid in assignment]
            else:
                futures = [self._executor.submit(self.train_one, pool, vid, cid, lr, episode)
                           for _, vid, cid in assignment]
                results = [f.result() for f in futures]
            for r in results:
                stats.block += r
            stats.step_times.append(time.perf_counter() - ts)
            if on_step is not None:
                on_step(assignment, self.store)
        stats.wall_time = time.perf_counter() - t0
        return stats

    def close(self):
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

