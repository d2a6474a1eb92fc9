"""Rewrite interval queries over positions as queries over partition buckets.

Under the uniformity assumption a query picks up each bucket in proportion
to how much of it the query covers, so the rewritten query is exact on any
estimate produced by uniform expansion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, Interval, Partition, Workload


@dataclass(frozen=True)
class TransformedWorkload:
    """Workload rewritten against a partition; one row per source query."""

    matrix: np.ndarray
    source: Workload
    partition: Partition

    def __post_init__(self) -> None:
        arr = np.asarray(self.matrix, dtype=np.float64)
        if arr.shape != (self.source.m, self.partition.k):
            raise DimensionError(
                f"matrix shape {arr.shape} does not match m={self.source.m}, k={self.partition.k}"
            )
        object.__setattr__(self, "matrix", arr)
        self.matrix.setflags(write=False)


def transform_query(q: Interval, partition: Partition) -> np.ndarray:
    """Coefficients of q over the buckets: covered fraction of each bucket."""
    if not q.valid_for(partition.n):
        raise DimensionError(f"query {q} outside domain [1, {partition.n}]")
    los = np.fromiter((b.lo for b in partition), dtype=np.int64, count=partition.k)
    his = np.fromiter((b.hi for b in partition), dtype=np.int64, count=partition.k)
    overlap = np.minimum(q.hi, his) - np.maximum(q.lo, los) + 1
    np.clip(overlap, 0, None, out=overlap)
    return overlap / (his - los + 1)


def transform_workload(W: Workload, partition: Partition) -> TransformedWorkload:
    rows = np.empty((W.m, partition.k), dtype=np.float64)
    for i, q in enumerate(W):
        rows[i] = transform_query(q, partition)
    return TransformedWorkload(matrix=rows, source=W, partition=partition)
