"""Desk-scale experiments: shuffle variants, episode size, worker scaling.

    python benchmarks/desk_scale.py [shuffle|episode|scaling ...]

Prints one ``key=value`` line per measurement.
"""

import sys
import time

import numpy as np

from shardembed.config import RunConfig
from shardembed.datasets import chung_lu, stochastic_block_model
from shardembed.evaluation import node_classification
from shardembed.partition import SamplePool, zigzag_partition
from shardembed.pipeline import run
from shardembed.sampler import Sampler, SamplerConfig, _fill, pseudo_shuffle
from shardembed.scheduler import EpisodeRunner, plan_training
from shardembed.trainer import EmbeddingStore, ShardNoise, TrainConfig, lr_at


def sbm():
    g, community = stochastic_block_model([100] * 10, 0.1, 0.01, seed=0)
    return g, {i: {int(c)} for i, c in enumerate(community)}


def raw_pool(g, cfg: SamplerConfig, rng):
    sampler = Sampler(g, cfg)
    out = np.empty((cfg.pool_capacity, 2), dtype=np.int32)
    _fill(g.indptr, g.indices, sampler.walk_prob, sampler.walk_alias, sampler.departure.prob,
          sampler.departure.alias, cfg.walk_length, cfg.augmentation_distance, out, rng)
    return out


def shuffle_variants(epochs_list=(100, 200)):
    for epochs in epochs_list:
        _shuffle_variants(epochs)


def _shuffle_variants(epochs):
    g, labels = sbm()
    tcfg = TrainConfig(epochs=epochs)
    total, sizes = plan_training(g, tcfg)
    scfg = SamplerConfig(pool_capacity=total)
    stream = raw_pool(g, scfg, np.random.default_rng(0))
    variants = {
        "none": stream,
        "pseudo": pseudo_shuffle(stream, scfg.augmentation_distance),
        "random": stream[np.random.default_rng(1).permutation(len(stream))],
    }
    parts = zigzag_partition(g.degree, 1)
    for name, samples in variants.items():
        store = EmbeddingStore.initialize(g.node_count, tcfg.dim, tcfg.seed)
        runner = EpisodeRunner(store, ShardNoise(g, parts), tcfg, parts)
        done = 0
        t0 = time.perf_counter()
        for size in sizes:
            runner.run_episode(SamplePool.from_samples(samples[done:done + size]), lr_at(done, total, tcfg))
            done += size
        micro, _ = node_classification(store.vertex, labels)
        print(f"epochs={epochs} shuffle={name} micro_f1={micro:.4f} train_time={time.perf_counter() - t0:.3f}")


def episode_sizes():
    g, labels = sbm()
    for size in (10_000, 20_000, 50_000, 100_000, 200_000, 1_000_000):
        cfg = RunConfig(epochs=200, episode_size=size, partitions=4, workers=4)
        store, report = run(g, cfg.sampler_config(g.node_count), cfg.train_config(), 4, 4)
        micro, _ = node_classification(store.vertex, labels)
        print(f"episode_size={size} micro_f1={micro:.4f} episodes={report.episodes} "
              f"train_time={report.train_time:.3f}")


def scaling():
    g = chung_lu(100_000, 1_050_000, seed=10)
    base = None
    for workers in (1, 2, 4, 8):
        cfg = RunConfig(epochs=2, partitions=workers, workers=workers, samplers=workers)
        _, report = run(g, cfg.sampler_config(g.node_count), cfg.train_config(), workers, workers)
        base = base or report.samples_per_sec
        print(f"workers={workers} samples_per_sec={report.samples_per_sec:.0f} "
              f"speedup={report.samples_per_sec / base:.2f}")


EXPERIMENTS = {"shuffle": shuffle_variants, "episode": episode_sizes, "scaling": scaling}

if __name__ == "__main__":
    for name in sys.argv[1:] or list(EXPERIMENTS):
        EXPERIMENTS[name]()
