"""Text embedding files: a ``node_count dim`` header, then ``label v1 ... vd`` rows."""

from __future__ import annotations

import numpy as np

from .evaluation import normalize_rows
from .trainer import EmbeddingStore


class EmbeddingFormatError(ValueError):
    pass


def select_matrix(store: EmbeddingStore, which: str = "vertex") -> np.ndarray:
    if which == "vertex":
        return store.vertex
    if which == "context":
        return store.context
    if which == "both":
        return np.hstack([store.vertex, store.context])
    raise ValueError(f"unknown matrix {which!r}")


def write_embeddings(store: EmbeddingStore, labels, path, which: str = "vertex",
                     normalize: bool = False) -> None:
    matrix = select_matrix(store, which)
    if len(labels) != len(matrix):
        raise EmbeddingFormatError("label count does not match embedding rows")
    if normalize:
        matrix = normalize_rows(matrix.astype(np.float64))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for label, row in zip(labels, matrix):
            if not label or any(ch.isspace() for ch in label):
                raise EmbeddingFormatError(f"node label {label!r} is empty or contains whitespace")
            fh.write(label + " " + " ".join(f"{x:.6g}" for x in row) + "\n")


def read_embeddings(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or not all(h.isdigit() for h in header):
            raise EmbeddingFormatError(f"{path}: bad header, expected 'node_count dim'")
        count, dim = int(header[0]), int(header[1])
        labels = []
        matrix = np.empty((count, dim), dtype=np.float64)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected a label and {dim} values, got {len(fields)} fields "
                    "(labels may not contain whitespace)"
                )
            if len(labels) == count:
                raise EmbeddingFormatError(f"{path}: more rows than the header's {count}")
            matrix[len(labels)] = [float(x) for x in fields[1:]]
            labels.append(fields[0])
    if len(labels) != count:
        raise EmbeddingFormatError(f"{path}: header promises {count} rows, found {len(labels)}")
    return labels, matrix
