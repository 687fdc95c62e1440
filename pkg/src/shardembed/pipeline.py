"""Producer/consumer collaboration: samplers fill one pool while workers train the other."""

from __future__ import annotations

import logging
import math
import queue
import sys
import threading
import time
from dataclasses import dataclass, field

from .graph import Graph
from .partition import Partitioning, SamplePool, zigzag_partition
from .sampler import Sampler, SamplerConfig
from .scheduler import EpisodeRunner, episode_size_for, plan_training
from .trainer import EmbeddingStore, ShardNoise, TrainConfig, lr_at

logger = logging.getLogger(__name__)


class DoubleBuffer:
    """Two pools exchanged through a pair of one-way handoff queues.

    A pool is owned by exactly one side at a time: producers only see pools
    obtained from :meth:`acquire_free`, the trainer only those obtained from
    :meth:`acquire_ready`.
    """

    def __init__(self, capacity: int):
        self.pools = (SamplePool(capacity), SamplePool(capacity))
        self._free: queue.Queue = queue.Queue()
        self._ready: queue.Queue = queue.Queue()
        for pool in self.pools:
            self._free.put(pool)
        self.producer_index = 0
        self.consumer_index = 1

    def acquire_free(self):
        pool = self._free.get()
        if pool is not None:
            self.producer_index = self.pools.index(pool)
        return pool

    def publish(self, item):
        """Hand a filled pool (or an exception, or ``None`` at shutdown) to the trainer."""
        self._ready.put(item)

    def acquire_ready(self):
        item = self._ready.get()
        if isinstance(item, SamplePool):
            self.consumer_index = self.pools.index(item)
        return item

    def recycle(self, pool):
        pool.release()
        self._free.put(pool)

    def stop_producer(self):
        self._free.put(None)


@dataclass
class RunReport:
    total_samples: int = 0
    samples_trained: int = 0
    pools: int = 0
    episodes: int = 0
    collaborate: bool = True
    interrupted: bool = False
    wall_time: float = 0.0
    fill_times: list = field(default_factory=list)
    train_times: list = field(default_factory=list)
    consumer_wait: list = field(default_factory=list)
    loss_timeline: list = field(default_factory=list)
    throughput_timeline: list = field(default_factory=list)

    @property
    def train_time(self) -> float:
        return sum(self.train_times)

    @property
    def fill_time(self) -> float:
        return sum(self.fill_times)

    @property
    def trainer_idle(self) -> float:
        return sum(self.consumer_wait)

    @property
    def samples_per_sec(self) -> float:
        return self.samples_trained / self.train_time if self.train_time else 0.0


def stderr_progress(report: RunReport, edge_count: int, lr: float, loss, rate: float):
    epoch = report.samples_trained / edge_count
    loss_txt = f"{loss:.4f}" if loss is not None else "nan"
    print(f"epoch={epoch:.2f} samples/sec={rate:.0f} lr={lr:.6f} loss={loss_txt}",
          file=sys.stderr, flush=True)


def run(g: Graph, sampler_cfg: SamplerConfig, train_cfg: TrainConfig,
        num_parts: int = 1, num_workers: int = 1, *,
        pinned_context: bool = False, copy_shards: bool = False,
        collaborate: bool = True, store: EmbeddingStore | None = None,
        partitions: tuple[Partitioning, Partitioning] | None = None,
        stop_event: threading.Event | None = None, progress=None,
        producer_slowdown: float = 1.0, on_pool=None):
    """Train embeddings for ``g`` and return ``(store, report)``.

    Pools are filled by the sampler and drained in episodes of at most
    the configured episode size. With ``collaborate`` the sampler runs on a
    producer thread against a second pool; otherwise fill and train alternate
    on the calling thread over an identical sample stream.

    ``producer_slowdown`` stretches each fill by sleeping, for measuring
    backpressure. Setting ``stop_event`` ends the run at the next episode
    boundary.
    """
    train_cfg.validate()
    sampler_cfg.validate()
    total, _ = plan_training(g, train_cfg)
    episode_size = episode_size_for(g, train_cfg)
    capacity = sampler_cfg.pool_capacity
    n_pools = math.ceil(total / capacity)

    if partitions is None:
        parts = zigzag_partition(g.degree, num_parts)
        partitions = (parts, parts)
    vertex_parts, context_parts = partitions
    if store is None:
        store = EmbeddingStore.initialize(g.node_count, train_cfg.dim, train_cfg.seed)
    noise = ShardNoise(g, context_parts, train_cfg.noise_power)
    runner = EpisodeRunner(store, noise, train_cfg, vertex_parts, context_parts,
                           num_workers=num_workers, pinned_context=pinned_context,
                           copy_shards=copy_shards)
    sampler = Sampler(g, sampler_cfg)
    report = RunReport(total_samples=total, collaborate=collaborate)
    stop_event = stop_event or threading.Event()

    def fill(pool):
        t0 = time.perf_counter()
        sampler.fill(pool)
        elapsed = time.perf_counter() - t0
        if producer_slowdown > 1.0:
            time.sleep(elapsed * (producer_slowdown - 1.0))
        report.fill_times.append(time.perf_counter() - t0)
        if on_pool is not None:
            on_pool(pool)

    def consume(pool):
        t0 = time.perf_counter()
        take = min(pool.length, total - report.samples_trained)
        for lo in range(0, take, episode_size):
            if stop_event.is_set():
                report.interrupted = True
                break
            lr = lr_at(report.samples_trained, total, train_cfg)
            stats = runner.run_episode(pool.segment(lo, min(lo + episode_size, take)), lr)
            report.samples_trained += stats.positives
            report.episodes += 1
            rate = stats.positives / stats.wall_time if stats.wall_time else 0.0
            report.loss_timeline.append((report.samples_trained, stats.block.mean_loss))
            report.throughput_timeline.append((report.samples_trained, rate))
            if progress is not None:
                progress(report, g.edge_count, lr, stats.block.mean_loss, rate)
        report.pools += 1
        report.train_times.append(time.perf_counter() - t0)

    start = time.perf_counter()
    try:
        if collaborate:
            _run_overlapped(fill, consume, capacity, n_pools, report, stop_event)
        else:
            pool = SamplePool(capacity)
            for _ in range(n_pools):
                if stop_event.is_set():
                    report.interrupted = True
                    break
                fill(pool)
                report.consumer_wait.append(0.0)
                consume(pool)
                pool.release()
                if report.interrupted:
                    break
    finally:
        runner.close()
        sampler.close()
    report.wall_time = time.perf_counter() - start
    return store, report


def _run_overlapped(fill, consume, capacity, n_pools, report, stop_event):
    buffers = DoubleBuffer(capacity)

    def producer():
        try:
            for _ in range(n_pools):
                pool = buffers.acquire_free()
                if pool is None:
                    return
                fill(pool)
                buffers.publish(pool)
        except BaseException as exc:  # surfaced on the consumer side
            buffers.publish(exc)

    thread = threading.Thread(target=producer, name="producer", daemon=True)
    thread.start()
    try:
        for _ in range(n_pools):
            if stop_event.is_set():
                report.interrupted = True
                break
            t0 = time.perf_counter()
            item = buffers.acquire_ready()
            report.consumer_wait.append(time.perf_counter() - t0)
            if isinstance(item, BaseException):
                raise item
            consume(item)
            buffers.recycle(item)
            if report.interrupted:
                break
    finally:
        buffers.stop_producer()
        thread.join()
