"""Brute-force and dense reference computations backing the test suite.

Everything here recomputes results by the most direct method available and
shares no code path with the implementations under test beyond the shared
primitive definitions (bucket costs, matrix shapes).
"""
from __future__ import annotations

import numpy as np

from .core import DataVector, Interval, ParameterError, Partition, SingularStrategyError
from .estimation import TreeNode, subtree_nodes
from .partition import bucket_cost
from .transform import TransformedWorkload

BRUTE_FORCE_MAX_N = 12


def oracle_brute_partition(x: DataVector, eps2: float) -> tuple[Partition, float]:
    """Exact least-cost partition by enumerating all 2^(n-1) bucketings.

    Costs accumulate left to right over each candidate's buckets, matching
    the dynamic program's summation order so optimal costs compare exactly.
    """
    n = x.n
    if n > BRUTE_FORCE_MAX_N:
        raise ParameterError(f"brute force capped at n={BRUTE_FORCE_MAX_N}, got {n}")
    cost_of: dict[tuple[int, int], float] = {}

    def cached_cost(lo: int, hi: int) -> float:
        key = (lo, hi)
        if key not in cost_of:
            cost_of[key] = bucket_cost(x, Interval(lo, hi), eps2)
        return cost_of[key]

    best_cost = np.inf
    best: "tuple[Interval, ...] | None" = None
    for mask in range(1 << (n - 1)):
        total = 0.0
        buckets = []
        lo = 1
        for j in range(1, n + 1):
            if j == n or (mask >> (j - 1)) & 1:
                total += cached_cost(lo, j)
                buckets.append(Interval(lo, j))
                lo = j + 1
        if total < best_cost:
            best_cost = total
            best = tuple(buckets)
    return Partition(best), float(best_cost)


def oracle_dense_stage2(
    What: "TransformedWorkload | np.ndarray",
    Y: np.ndarray,
    scalings: np.ndarray,
    eps2: float,
) -> float:
    """Expected total squared workload error, from explicit dense matrices."""
    matrix = What.matrix if isinstance(What, TransformedWorkload) else np.asarray(What, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    scalings = np.asarray(scalings, dtype=np.float64)
    if eps2 <= 0:
        raise ParameterError(f"eps2 must be positive, got {eps2}")
    scaled = scalings[:, None] * Y
    gram = scaled.T @ scaled
    try:
        inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as err:
        raise SingularStrategyError(f"strategy Gram is singular: {err}") from None
    return (2.0 / eps2**2) * float(np.sum((matrix.T @ matrix) * inv))


def _subtree_rows(node: TreeNode) -> tuple[np.ndarray, np.ndarray]:
    """Indicator rows and current scalings of a subtree, over its own span."""
    nodes = list(subtree_nodes(node))
    span = node.hi - node.lo + 1
    rows = np.zeros((len(nodes), span))
    scalings = np.empty(len(nodes))
    for i, p in enumerate(nodes):
        rows[i, p.lo - node.lo : p.hi - node.lo + 1] = 1.0
        scalings[i] = p.scaling
    return rows, scalings


def dense_scaling_objective(
    What: "TransformedWorkload | np.ndarray",
    node: TreeNode,
    lam: float,
    mu: float,
) -> float:
    """Direct evaluation of the greedy weight-search objective at one node.

    Builds the node's subtree strategy explicitly: the node takes weight lam,
    every descendant's current scaling is discounted by (1 - lam), and the
    target matrix blends the node's workload Gram with the block-diagonal of
    its children's workload Grams.
    """
    matrix = What.matrix if isinstance(What, TransformedWorkload) else np.asarray(What, dtype=np.float64)
    if node.is_leaf():
        raise ParameterError("objective is defined for internal nodes only")
    rows, scalings = _subtree_rows(node)
    scalings = scalings * (1.0 - lam)
    scalings[0] = lam
    scaled = scalings[:, None] * rows
    gram = scaled.T @ scaled
    try:
        inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as err:
        raise SingularStrategyError(f"subtree Gram is singular: {err}") from None
    Wq = matrix[:, node.lo - 1 : node.hi]
    target = mu * (Wq.T @ Wq)
    off = 1.0 - mu
    for child in node.children:
        Wc = matrix[:, child.lo - 1 : child.hi]
        a = child.lo - node.lo
        b = child.hi - node.lo + 1
        target[a:b, a:b] += off * (Wc.T @ Wc)
    return float(np.sum(target * inv))


def dense_ols(rows: np.ndarray, scalings: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Weighted least-squares solve by lstsq on the explicit design matrix."""
    design = np.asarray(scalings)[:, None] * np.asarray(rows, dtype=np.float64)
    solution, *_ = np.linalg.lstsq(design, np.asarray(values, dtype=np.float64), rcond=None)
    return solution
