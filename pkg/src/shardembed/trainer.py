"""Skip-gram negative-sampling updates on one grid block."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .graph import AliasTable, Graph, GraphValidationError, alias_draw, build_alias, degree_noise_weights
from .partition import Partitioning

LOGIT_CLAMP = 10.0
MAX_RESAMPLE = 8


@dataclass
class TrainConfig:
    dim: int = 128
    negatives: int = 1
    neg_scale: float = 5.0
    lr: float = 0.025
    lr_floor_ratio: float = 1e-4
    epochs: int = 2000
    episode_size: int | None = None  # None: 200 * node_count
    noise_power: float = 0.75
    seed: int = 0

    def validate(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.lr <= 0 or not 0 < self.lr_floor_ratio <= 1:
            raise ValueError("learning rate and floor ratio must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.episode_size is not None and self.episode_size < 1:
            raise ValueError("episode_size must be >= 1")


class EmbeddingStore:
    """Vertex and context matrices, one row per node."""

    def __init__(self, vertex: np.ndarray, context: np.ndarray):
        if vertex.shape != context.shape:
            raise ValueError("vertex and context shapes differ")
        self.vertex = vertex
        self.context = context

    @classmethod
    def initialize(cls, node_count: int, dim: int, seed: int = 0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        half = 0.5 / dim
        vertex = rng.uniform(-half, half, size=(node_count, dim)).astype(dtype)
        context = np.zeros((node_count, dim), dtype=dtype)
        return cls(vertex, context)

    @property
    def dim(self) -> int:
        return self.vertex.shape[1]

    @property
    def node_count(self) -> int:
        return self.vertex.shape[0]

    def copy(self) -> "EmbeddingStore":
        return EmbeddingStore(self.vertex.copy(), self.context.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.vertex).all() and np.isfinite(self.context).all())


class ShardNoise:
    """Per-part negative samplers, each restricted to its part's members."""

    def __init__(self, g: Graph, parts: Partitioning, power: float = 0.75):
        weights = degree_noise_weights(g, power)
        self.parts = parts
        self.tables: list[AliasTable] = []
        for p, members in enumerate(parts.members):
            try:
                self.tables.append(build_alias(weights[members]))
            except GraphValidationError:
                raise GraphValidationError(f"partition {p} contains only isolated nodes") from None

    def ids(self, part: int) -> np.ndarray:
        return self.parts.members[part]


@dataclass
class BlockStats:
    positives: int = 0
    negatives: int = 0
    loss_sum: float = 0.0

    @property
    def mean_loss(self) -> float | None:
        """Mean of positive-plus-negatives loss per positive sample."""
        return self.loss_sum / self.positives if self.positives else None

    def __iadd__(self, other: "BlockStats"):
        self.positives += other.positives
        self.negatives += other.negatives
        self.loss_sum += other.loss_sum
        return self


@numba.njit(nogil=True, cache=True)
def _update(vertex, context, u, v, label, lr, scale, scratch):
    # scratch pins the arithmetic to the matrices' dtype
    dim = vertex.shape[1]
    scratch[0] = 0
    x = scratch[0]
    for k in range(dim):
        x += vertex[u, k] * context[v, k]
    logit = min(max(float(x), -LOGIT_CLAMP), LOGIT_CLAMP)
    p = 1.0 / (1.0 + math.exp(-logit))
    scratch[0] = (label - p) * lr * scale
    g = scratch[0]
    for k in range(dim):
        a = vertex[u, k]
        b = context[v, k]
        vertex[u, k] = a + g * b
        context[v, k] = b + g * a
    if label > 0:
        return -math.log(p)
    return -math.log(1.0 - p)


@numba.njit(nogil=True, cache=True)
def _train_block(vertex, context, samples, noise_prob, noise_alias, noise_ids,
                 negatives, neg_scale, lr, rng):
    scratch = np.empty(1, dtype=vertex.dtype)
    loss = 0.0
    n_neg = 0
    for k in range(samples.shape[0]):
        u = samples[k, 0]
        v = samples[k, 1]
        loss += _update(vertex, context, u, v, 1.0, lr, 1.0, scratch)
        for _ in range(negatives):
            t = -1
            for _attempt in range(MAX_RESAMPLE + 1):
                t = noise_ids[alias_draw(noise_prob, noise_alias, rng.random())]
                if t != v:
                    break
            if t == v:
                continue
            loss += _update(vertex, context, u, t, 0.0, lr, neg_scale, scratch)
            n_neg += 1
    return loss, n_neg


def sgns_update(vertex_row, context_row, label: int, lr: float, grad_scale: float = 1.0):
    """One logistic step on a (vertex, context) pair.

    Both rows move simultaneously from their pre-update values. Returns
    ``(new_vertex_row, new_context_row, loss)``; inputs are not modified.
    """
    v = np.array(vertex_row, copy=True).reshape(1, -1)
    c = np.array(context_row, copy=True).reshape(1, -1)
    if v.dtype.kind != "f":
        v = v.astype(np.float64)
        c = c.astype(np.float64)
    loss = _update(v, c, 0, 0, float(label), float(lr), float(grad_scale), np.empty(1, v.dtype))
    return v[0], c[0], loss


def sgns_loss(vertex_row, context_row, label: int) -> float:
    x = float(np.dot(vertex_row, context_row))
    x = min(max(x, -LOGIT_CLAMP), LOGIT_CLAMP)
    p = 1.0 / (1.0 + math.exp(-x))
    return -math.log(p) if label else -math.log(1.0 - p)


def train_block(samples, vertex, context, noise: AliasTable, noise_ids, cfg: TrainConfig,
                lr: float, rng: np.random.Generator) -> BlockStats:
    """Train positives in order, each followed by ``cfg.negatives`` shard-local negatives.

    ``samples`` index rows of ``vertex``/``context``; ``noise_ids`` maps a
    noise-table slot to a context row.
    """
    samples = np.asarray(samples).reshape(-1, 2)
    if len(samples) == 0:
        return BlockStats()
    loss, n_neg = _train_block(vertex, context, samples, noise.prob, noise.alias,
                               np.asarray(noise_ids), cfg.negatives, float(cfg.neg_scale),
                               float(lr), rng)
    return BlockStats(positives=len(samples), negatives=int(n_neg), loss_sum=float(loss))


def lr_at(samples_done: int, total_samples: int, cfg: TrainConfig) -> float:
    if total_samples <= 0:
        return cfg.lr
    return cfg.lr * max(1.0 - samples_done / total_samples, cfg.lr_floor_ratio)
