"""Parallel node-embedding training with block-orthogonal shards."""

from .graph import AliasTable, Graph, build_alias, degree_noise_weights, load_edge_list
from .partition import Partitioning, SamplePool, redistribute, zigzag_partition
from .pipeline import RunReport, run
from .sampler import SamplerConfig, fill_pool_parallel, pseudo_shuffle
from .scheduler import EpisodeRunner, EpisodeSchedule, plan_training
from .trainer import EmbeddingStore, ShardNoise, TrainConfig, lr_at, sgns_update, train_block

__version__ = "0.1.0"

__all__ = [
    "AliasTable", "Graph", "build_alias", "degree_noise_weights", "load_edge_list",
    "Partitioning", "SamplePool", "redistribute", "zigzag_partition",
    "RunReport", "run",
    "SamplerConfig", "fill_pool_parallel", "pseudo_shuffle",
    "EpisodeRunner", "EpisodeSchedule", "plan_training",
    "EmbeddingStore", "ShardNoise", "TrainConfig", "lr_at", "sgns_update", "train_block",
]
