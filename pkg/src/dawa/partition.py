"""Stage 1: choose a low-cost interval partition of the domain privately.

A bucket's cost is its internal deviation from uniformity plus the 1/eps2
noise price a bucket will pay in stage 2.  All deviations are computed as
exact integer numerators over a single rational factor, so a cost entry is
one float division away from the exact value and the sliding-window scan
reproduces the direct per-bucket computation bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DataVector,
    Interval,
    ParameterError,
    Partition,
    RngStream,
    laplace_sample,
)
from .devtree import DeviationTree

# One count added or removed changes a bucket's deviation by at most 2.
BUCKET_COST_SENSITIVITY = 2.0


@dataclass(frozen=True)
class PartitionParams:
    """Knobs for the private partition stage.

    per_bucket_noise is a placeholder for a refinement that scales noise to
    interval-specific sensitivities; it is not implemented and must stay off.
    """

    eps1: float
    eps2: float
    mode: str = "pow2"
    delta_bcost: float = BUCKET_COST_SENSITIVITY
    per_bucket_noise: bool = False

    def __post_init__(self) -> None:
        for name in ("eps1", "eps2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive and finite, got {v}")
        if self.mode not in ("all", "pow2"):
            raise ParameterError(f"mode must be 'all' or 'pow2', got {self.mode!r}")
        if self.delta_bcost <= 0:
            raise ParameterError("delta_bcost must be positive")


@dataclass(frozen=True)
class CostTable:
    """Noisy or exact costs for candidate buckets, keyed by (lo, hi)."""

    n: int
    mode: str
    entries: dict[tuple[int, int], float]
    lengths: tuple[int, ...]

    def cost(self, lo: int, hi: int) -> float:
        return self.entries[(lo, hi)]

    def __len__(self) -> int:
        return len(self.entries)


def candidate_lengths(n: int, mode: str) -> tuple[int, ...]:
    if n < 1:
        raise ParameterError(f"domain size must be >= 1, got {n}")
    if mode == "all":
        return tuple(range(1, n + 1))
    if mode == "pow2":
        out = []
        length = 1
        while length <= n:
            out.append(length)
            length *= 2
        return tuple(out)
    raise ParameterError(f"mode must be 'all' or 'pow2', got {mode!r}")


def _dev_numerator(values: list[int], total: int, length: int) -> int:
    """Sum of (v*length - total) over v with v*length >= total, exactly."""
    acc = 0
    for v in values:
        scaled = v * length - total
        if scaled >= 0:
            acc += scaled
    return acc


def bucket_dev(x: DataVector, b: Interval) -> float:
    """Total absolute deviation of the bucket's counts from their mean.

    Equal to twice the one-sided deviation above the mean; the integer
    numerator is exact and only the final division rounds.
    """
    if not b.valid_for(x.n):
        raise ParameterError(f"bucket {b} outside domain of size {x.n}")
    values = [int(v) for v in x.counts[b.lo - 1 : b.hi]]
    total = sum(values)
    num = _dev_numerator(values, total, b.length)
    return (2 * num) / b.length


def bucket_cost(x: DataVector, b: Interval, eps2: float) -> float:
    """Deviation plus the stage-2 noise price of carrying one more bucket."""
    if eps2 <= 0:
        raise ParameterError(f"eps2 must be positive, got {eps2}")
    return bucket_dev(x, b) + 1.0 / eps2

def partition_cost(x: DataVector, buckets: "Partition | list[Interval]", eps2: float) -> float:
    """Sum of bucket costs, accumulated left to right."""
    total = 0.0
    for b in buckets:
        total += bucket_cost(x, b, eps2)
    return total


def costs_size_k(x: DataVector, eps2: float, length: int) -> dict[tuple[int, int], float]:
    """Exact costs of every bucket of the given length, via one sliding window."""
    n = x.n
    if not 1 <= length <= n:
        raise ParameterError(f"length must be in [1, {n}], got {length}")
    if eps2 <= 0:
        raise ParameterError(f"eps2 must be positive, got {eps2}")
    values = [int(v) for v in x.counts]
    noise_price = 1.0 / eps2
    out: dict[tuple[int, int], float] = {}
    if length == 1:
        for j in range(1, n + 1):
            out[(j, j)] = 0.0 + noise_price
        return out
    tree = DeviationTree(values[:length])
    total = sum(values[:length])
    lo = 1
    while True:
        hi = lo + length - 1
        num = tree.above_scaled(total, length)
        out[(lo, hi)] = (2 * num) / length + noise_price
        if hi == n:
            break
        tree.remove(values[lo - 1])
        tree.insert(values[hi])
        total += values[hi] - values[lo - 1]
        lo += 1
    return out


def all_costs(x: DataVector, eps2: float, mode: str = "pow2") -> CostTable:
    """Exact cost table over all candidate buckets for the given mode."""
    lengths = candidate_lengths(x.n, mode)
    entries: dict[tuple[int, int], float] = {}
    for length in lengths:
        entries.update(costs_size_k(x, eps2, length))
    return CostTable(n=x.n, mode=mode, entries=entries, lengths=lengths)


def perturb_costs(
    table: CostTable,
    eps1: float,
    rng: RngStream,
    delta_bcost: float = BUCKET_COST_SENSITIVITY,
) -> CostTable:
    """Add Laplace(2*delta_bcost/eps1) noise to every cost entry.

    The factor 2 on the sensitivity pays for reusing each count in the
    costs of overlapping candidate buckets.
    """
    if eps1 <= 0:
        raise ParameterError(f"eps1 must be positive, got {eps1}")
    keys = list(table.entries.keys())
    noise = laplace_sample(2.0 * delta_bcost / eps1, rng, size=len(keys))
    entries = {key: table.entries[key] + float(z) for key, z in zip(keys, noise)}
    return CostTable(n=table.n, mode=table.mode, entries=entries, lengths=table.lengths)


def least_cost_partition(table: CostTable, n: int) -> Partition:
    """Minimize total bucket cost over partitions drawn from the table.

    Dynamic program over right endpoints; candidate lengths are scanned
    longest first with strict improvement, so among equal-cost partitions
    the one with the longer final bucket wins.
    """
    if n != table.n:
        raise ParameterError(f"table covers [1, {table.n}], asked for [1, {n}]")
    entries = table.entries
    lengths_desc = sorted(table.lengths, reverse=True)
    best = [math.inf] * (n + 1)
    best[0] = 0.0
    pick = [0] * (n + 1)
    for j in range(1, n + 1):
        bj = math.inf
        pj = 0
        for length in lengths_desc:
            if length > j:
                continue
            lo = j - length + 1
            c = best[lo - 1] + entries[(lo, j)]
            if c < bj:
                bj = c
                pj = length
        best[j] = bj
        pick[j] = pj
    buckets = []
    j = n
    while j > 0:
        length = pick[j]
        buckets.append(Interval(j - length + 1, j))
        j -= length
    return Partition(tuple(reversed(buckets)))


def exact_partition(x: DataVector, eps2: float, mode: str = "pow2") -> Partition:
    """Noise-free least-cost partition; not private, for oracles and debugging."""
    table = all_costs(x, eps2, mode)
    return least_cost_partition(table, x.n)


def private_partition(x: DataVector, params: PartitionParams, rng: RngStream) -> Partition:
    """Choose a partition under eps1-differential privacy.

    Computes exact candidate costs, perturbs each with Laplace noise scaled
    to twice the per-entry sensitivity, then solves the least-cost dynamic
    program on the noisy table.
    """
    if params.per_bucket_noise:
        raise NotImplementedError(
            "per-bucket noise scaling is not specified precisely enough to implement"
        )
    table = all_costs(x, params.eps2, params.mode)
    noisy = perturb_costs(table, params.eps1, rng, delta_bcost=params.delta_bcost)
    return least_cost_partition(noisy, x.n)


def utility_bound(
    n: int,
    num_candidates: int,
    delta: float,
    eps1: float,
    delta_bcost: float = BUCKET_COST_SENSITIVITY,
) -> float:
    """Additive gap to the optimal partition cost, holding except with
    probability delta."""
    if n < 1 or num_candidates < 1:
        raise ParameterError("n and num_candidates must be >= 1")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if eps1 <= 0:
        raise ParameterError(f"eps1 must be positive, got {eps1}")
    return 4.0 * delta_bcost * n * math.log(num_candidates / delta) / eps1
