"""Run configuration with a flat ``key = value`` text form."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

from .sampler import SamplerConfig
from .scheduler import EPISODE_SIZE_PER_NODE
from .trainer import TrainConfig


@dataclass
class RunConfig:
    input: str | None = None
    output: str | None = None
    weighted: bool = False
    dim: int = 128
    epochs: int = 2000
    walk_length: int = 40
    aug_distance: int = 2
    negatives: int = 1
    neg_scale: float = 5.0
    lr: float = 0.025
    episode_size: int | None = None
    pool_size: int | None = None
    partitions: int = 1
    workers: int = 1
    samplers: int = 1
    seed: int = 0
    pinned_context: bool = False
    normalize_output: bool = False
    which: str = "vertex"
    collaborate: bool = True

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {'auto' if value is None else value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls().updated(parse_text(text))

    def updated(self, values: dict) -> "RunConfig":
        known = {f.name: f for f in fields(self)}
        changes = {}
        for key, raw in values.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            changes[key] = _coerce(known[key], raw)
        return dataclasses.replace(self, **changes)

    def resolved_episode_size(self, node_count: int) -> int:
        return self.episode_size or EPISODE_SIZE_PER_NODE * node_count

    def resolved_pool_size(self, node_count: int) -> int:
        size = self.pool_size or self.resolved_episode_size(node_count)
        if self.pool_size is None:
            # round down to a whole number of per-sampler segments
            size = max(self.samplers, size - size % self.samplers)
        return size

    def sampler_config(self, node_count: int) -> SamplerConfig:
        return SamplerConfig(
            walk_length=self.walk_length,
            augmentation_distance=self.aug_distance,
            pool_capacity=self.resolved_pool_size(node_count),
            sampler_threads=self.samplers,
            rng_seed=self.seed,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            dim=self.dim,
            negatives=self.negatives,
            neg_scale=self.neg_scale,
            lr=self.lr,
            epochs=self.epochs,
            episode_size=self.episode_size,
            seed=self.seed,
        )


def parse_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _coerce(f, raw):
    if not isinstance(raw, str):
        return raw
    if raw in ("auto", "None", ""):
        return None
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    if kind.startswith("bool"):
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"{f.name}: not a boolean: {raw!r}")
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw
