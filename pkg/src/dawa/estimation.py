"""Stage 2: workload-aware noisy measurement of bucket counts.

Bucket counts are measured through a hierarchy of interval sums, each
scaled by a weight chosen greedily to suit the (transformed) workload, then
reconciled by ordinary least squares.  Weights obey a unit-sensitivity
constraint: the scalings covering any single bucket sum to at most 1, so
each noisy answer costs Laplace(1/eps2) regardless of how many are taken.

The greedy pass keeps, per subtree, the inverse of the scaled strategy's
Gram matrix together with a few low-rank summaries of it.  Raising the
weight of a parent node is a rank-one change to its subtree Gram, so the
objective can be scanned in constant time per candidate weight and the
inverse updated without refactorizing.  Caches reflect the scalings at the
moment a node was processed; ancestors account for their own later scaling,
and only the root cache (which has no ancestors) stays current to the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DataVector,
    DimensionError,
    Histogram,
    Interval,
    ParameterError,
    Partition,
    RngStream,
    SingularStrategyError,
    Workload,
    laplace_sample,
)
from .transform import TransformedWorkload, transform_workload

# Parent weights may approach but never reach 1; at 1 the children's
# effective scalings vanish and the Gram loses rank.
LAMBDA_CAP = 1.0 - 1e-6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class TreeNode:
    """One interval sum over bucket positions [lo, hi]."""

    __slots__ = ("lo", "hi", "depth", "children", "scaling", "cache")

    def __init__(self, lo: int, hi: int, children: "tuple[TreeNode, ...]" = ()):
        self.lo = lo
        self.hi = hi
        self.depth = 0
        self.children = children
        self.scaling = 1.0 if not children else 0.0
        self.cache: "NodeCache | None" = None

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def is_leaf(self) -> bool:
        return not self.children

    def __repr__(self) -> str:
        return f"TreeNode([{self.lo},{self.hi}], depth={self.depth}, c={self.scaling:.4g})"


@dataclass
class NodeCache:
    """Inverse-Gram summaries for one subtree.

    inv_gram is the inverse of the subtree strategy's Gram matrix; ones_sol
    solves Gram @ v = 1 and ones_quad is its total.  wl_image maps ones_sol
    through the subtree's workload columns; its squared norm and err_trace
    (workload error contribution) are kept so the parent's weight search
    never touches a matrix.
    """

    inv_gram: np.ndarray
    err_trace: float
    ones_sol: np.ndarray
    ones_quad: float
    wl_image: np.ndarray
    wl_image_norm2: float


@dataclass(frozen=True)
class QueryTree:
    """Interval-sum hierarchy over k bucket positions with branching t."""

    root: TreeNode
    levels: tuple[tuple[TreeNode, ...], ...]
    k: int
    t: int

    @property
    def leaves(self) -> tuple[TreeNode, ...]:
        return self.levels[-1]

    def nodes(self):
        """All nodes in level order, root first, left to right."""
        for level in self.levels:
            yield from level

    def num_nodes(self) -> int:
        return sum(len(level) for level in self.levels)


def build_query_tree(k: int, t: int = 2) -> QueryTree:
    """Complete-as-possible t-ary tree whose leaves are the unit intervals.

    Trailing nodes on each level may hold fewer than t children; all leaves
    sit on the deepest level.
    """
    if k < 1:
        raise ParameterError(f"need k >= 1, got {k}")
    if t < 2:
        raise ParameterError(f"need branching t >= 2, got {t}")
    level = [TreeNode(j, j) for j in range(1, k + 1)]
    levels = [tuple(level)]
    while len(level) > 1:
        level = [
            TreeNode(group[0].lo, group[-1].hi, tuple(group))
            for group in (level[i : i + t] for i in range(0, len(level), t))
        ]
        levels.append(tuple(level))
    levels.reverse()
    for depth, lev in enumerate(levels):
        for node in lev:
            node.depth = depth
    return QueryTree(root=levels[0][0], levels=tuple(levels), k=k, t=t)


def subtree_nodes(node: TreeNode):
    """Pre-order walk of the subtree rooted at node."""
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children))


def decay_factor(t: int, depth: int) -> float:
    """Weight on a node's own workload term; deeper nodes defer to ancestors."""
    return float(t) ** (-depth / 2.0)


def leaf_cover_sums(tree: QueryTree) -> np.ndarray:
    """Per bucket position, the sum of scalings of nodes covering it."""
    cover = np.zeros(tree.k)
    for node in tree.nodes():
        cover[node.lo - 1 : node.hi] += node.scaling
    return cover


def _block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    at = 0
    for b in blocks:
        s = b.shape[0]
        out[at : at + s, at : at + s] = b
        at += s
    return out


def _child_scalars(node: TreeNode) -> tuple[float, float, float, float, np.ndarray]:
    """Aggregate the children's cache summaries for the weight search."""
    trace_sum = 0.0
    quad_sum = 0.0
    norm2_sum = 0.0
    image_sum = None
    for child in node.children:
        cache = child.cache
        if cache is None:
            raise ParameterError("children caches missing; process levels bottom-up")
        trace_sum += cache.err_trace
        quad_sum += cache.ones_quad
        norm2_sum += cache.wl_image_norm2
        image_sum = cache.wl_image.copy() if image_sum is None else image_sum + cache.wl_image
    image2 = float(image_sum @ image_sum)
    return trace_sum, quad_sum, image2, norm2_sum, image_sum


def _objective(trace_sum: float, quad_sum: float, image2: float, norm2_sum: float,
               mu: float, lam: float) -> float:
    if lam == 0.0:
        return trace_sum
    g2 = (1.0 - lam) ** 2
    lam2 = lam * lam
    beta = lam2 / (g2 * (g2 + lam2 * quad_sum))
    return trace_sum / g2 - beta * (mu * image2 + (1.0 - mu) * norm2_sum)


def objective_at_lambda(node: TreeNode, lam: float, mu: float) -> float:
    """Workload error proxy if node takes weight lam and discounts its subtree.

    The proxy blends the node's own error term (weight mu) with the
    children's block-diagonal terms (weight 1 - mu); at the root mu is 1 and
    the proxy is the exact strategy error up to the 2/eps2^2 factor.
    """
    if node.is_leaf():
        raise ParameterError("objective is defined for internal nodes only")
    if not 0.0 <= lam <= LAMBDA_CAP:
        raise ParameterError(f"lam must lie in [0, {LAMBDA_CAP}], got {lam}")
    if not 0.0 <= mu <= 1.0:
        raise ParameterError(f"mu must lie in [0, 1], got {mu}")
    trace_sum, quad_sum, image2, norm2_sum, _ = _child_scalars(node)
    return _objective(trace_sum, quad_sum, image2, norm2_sum, mu, lam)


def _golden_min(f, a: float, b: float, tol: float) -> float:
    c = b - (b - a) * _INVPHI
    d = a + (b - a) * _INVPHI
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INVPHI
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INVPHI
            fd = f(d)
    return (a + b) / 2.0


GRID_POINTS = 33


def optimize_lambda(node: TreeNode, mu: float, tol: float = 1e-6) -> float:
    """Minimize the weight-search objective over [0, LAMBDA_CAP].

    A coarse grid scan brackets the minimum, golden-section refines it, and
    both endpoints are checked explicitly.  Ties go to 0 so that workloads
    already served by the children leave the subtree untouched.
    """
    if node.is_leaf():
        raise ParameterError("weights are searched at internal nodes only")
    trace_sum, quad_sum, image2, norm2_sum, _ = _child_scalars(node)

    def f(lam: float) -> float:
        return _objective(trace_sum, quad_sum, image2, norm2_sum, mu, lam)

    grid = np.linspace(0.0, LAMBDA_CAP, GRID_POINTS)
    values = [f(lam) for lam in grid]
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, GRID_POINTS - 1)]
    lam_mid = _golden_min(f, lo, hi, tol)
    f0, fmid, fcap = f(0.0), f(lam_mid), f(LAMBDA_CAP)
    if f0 <= fmid and f0 <= fcap:
        return 0.0
    if fmid <= fcap:
        return float(lam_mid)
    return LAMBDA_CAP


def _leaf_cache(column: np.ndarray) -> NodeCache:
    norm2 = float(column @ column)
    return NodeCache(
        inv_gram=np.ones((1, 1)),
        err_trace=norm2,
        ones_sol=np.ones(1),
        ones_quad=1.0,
        wl_image=column.copy(),
        wl_image_norm2=norm2,
    )


def _combined_cache(node: TreeNode, lam: float) -> NodeCache:
    trace_sum, quad_sum, image2, norm2_sum, image_sum = _child_scalars(node)
    w = np.concatenate([child.cache.ones_sol for child in node.children])
    bd = _block_diag([child.cache.inv_gram for child in node.children])
    if lam == 0.0:
        return NodeCache(
            inv_gram=bd,
            err_trace=trace_sum,
            ones_sol=w,
            ones_quad=quad_sum,
            wl_image=image_sum,
            wl_image_norm2=image2,
        )
    g2 = (1.0 - lam) ** 2
    lam2 = lam * lam
    denom = g2 + lam2 * quad_sum
    beta = lam2 / (g2 * denom)
    return NodeCache(
        inv_gram=bd / g2 - beta * np.outer(w, w),
        err_trace=trace_sum / g2 - beta * image2,
        ones_sol=w / denom,
        ones_quad=quad_sum / denom,
        wl_image=image_sum / denom,
        wl_image_norm2=image2 / (denom * denom),
    )


def greedy_scale(What: "TransformedWorkload | np.ndarray", tree: QueryTree) -> QueryTree:
    """Choose node scalings for the workload, bottom-up, one weight at a time.

    Leaves start at scaling 1 and internal nodes at 0.  Each internal node
    picks the weight minimizing its objective and discounts its whole
    subtree by the complement, preserving the unit cover sum per position.
    Mutates and returns the tree.
    """
    matrix = What.matrix if isinstance(What, TransformedWorkload) else np.asarray(What, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != tree.k:
        raise DimensionError(f"workload matrix shape {matrix.shape} does not match k={tree.k}")
    for i, leaf in enumerate(tree.leaves):
        leaf.scaling = 1.0
        leaf.cache = _leaf_cache(matrix[:, i])
    for level in reversed(tree.levels[:-1]):
        for node in level:
            if len(node.children) == 1:
                node.scaling = 0.0
                node.cache = node.children[0].cache
                continue
            mu = decay_factor(tree.t, node.depth)
            lam = optimize_lambda(node, mu)
            node.scaling = lam
            if lam > 0.0:
                discount = 1.0 - lam
                for desc in subtree_nodes(node):
                    if desc is not node:
                        desc.scaling *= discount
            node.cache = _combined_cache(node, lam)
    return tree


@dataclass(frozen=True)
class Measurement:
    """One noisy scaled interval sum over bucket positions."""

    interval: Interval
    scaling: float
    value: float


def measure(bucket_counts: np.ndarray, tree: QueryTree, eps2: float, rng: RngStream) -> list[Measurement]:
    """Noisy answers for every node with positive scaling, in level order.

    Each answer is scaling * true_sum + Laplace(1/eps2); nodes with zero
    scaling are skipped entirely and consume no randomness.
    """
    counts = np.asarray(bucket_counts, dtype=np.float64)
    if counts.shape != (tree.k,):
        raise DimensionError(f"expected {tree.k} bucket counts, got shape {counts.shape}")
    if eps2 <= 0:
        raise ParameterError(f"eps2 must be positive, got {eps2}")
    prefix = np.concatenate(([0.0], np.cumsum(counts)))
    active = [node for node in tree.nodes() if node.scaling > 0.0]
    noise = laplace_sample(1.0 / eps2, rng, size=len(active))
    out = []
    for node, z in zip(active, noise):
        true = prefix[node.hi] - prefix[node.lo - 1]
        out.append(Measurement(interval=node.interval, scaling=node.scaling,
                               value=node.scaling * true + float(z)))
    return out


def ols_infer(tree: QueryTree, measurements: list[Measurement]) -> np.ndarray:
    """Least-squares bucket estimate from scaled noisy interval sums.

    Solves the normal equations of the scaled strategy.  When the tree was
    scaled by greedy_scale the root cache already holds the inverse Gram;
    otherwise the Gram is assembled from the scalings and factorized here.
    """
    z = np.zeros(tree.k)
    for meas in measurements:
        z[meas.interval.lo - 1 : meas.interval.hi] += meas.scaling * meas.value
    root_cache = tree.root.cache
    if root_cache is not None and root_cache.inv_gram.shape == (tree.k, tree.k):
        return root_cache.inv_gram @ z
    gram = np.zeros((tree.k, tree.k))
    for node in tree.nodes():
        if node.scaling != 0.0:
            gram[node.lo - 1 : node.hi, node.lo - 1 : node.hi] += node.scaling**2
    try:
        return np.linalg.solve(gram, z)
    except np.linalg.LinAlgError as err:
        raise SingularStrategyError(f"strategy does not determine every bucket: {err}") from None


def scaling_vector(tree: QueryTree) -> np.ndarray:
    """Scalings of all nodes in level order; aligns with strategy_matrix."""
    return np.fromiter((node.scaling for node in tree.nodes()), dtype=np.float64,
                       count=tree.num_nodes())


def strategy_matrix(tree: QueryTree) -> np.ndarray:
    """Dense 0/1 interval-indicator rows of all nodes in level order."""
    rows = np.zeros((tree.num_nodes(), tree.k))
    for i, node in enumerate(tree.nodes()):
        rows[i, node.lo - 1 : node.hi] = 1.0
    return rows


def strategy_error(What: "TransformedWorkload | np.ndarray", tree: QueryTree, eps2: float) -> float:
    """Expected total squared workload error of the scaled strategy.

    Dense evaluation from first principles: 2/eps2^2 times the trace of the
    workload Gram against the inverse strategy Gram.  Used as the reference
    the incremental path is checked against.
    """
    matrix = What.matrix if isinstance(What, TransformedWorkload) else np.asarray(What, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != tree.k:
        raise DimensionError(f"workload matrix shape {matrix.shape} does not match k={tree.k}")
    if eps2 <= 0:
        raise ParameterError(f"eps2 must be positive, got {eps2}")
    gram = np.zeros((tree.k, tree.k))
    for node in tree.nodes():
        if node.scaling != 0.0:
            gram[node.lo - 1 : node.hi, node.lo - 1 : node.hi] += node.scaling**2
    try:
        inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as err:
        raise SingularStrategyError(f"strategy Gram is singular: {err}") from None
    return (2.0 / eps2**2) * float(np.sum((matrix.T @ matrix) * inv))


def estimate_buckets(
    partition: Partition,
    W: Workload,
    x: DataVector,
    eps2: float,
    t: int,
    rng: RngStream,
) -> Histogram:
    """Full stage 2: transform, scale greedily, measure, reconcile."""
    if partition.n != x.n:
        raise DimensionError(f"partition covers [1, {partition.n}] but data has n={x.n}")
    if W.max_hi() > x.n:
        raise DimensionError(f"workload reaches {W.max_hi()} but data has n={x.n}")
    What = transform_workload(W, partition)
    tree = build_query_tree(partition.k, t)
    greedy_scale(What, tree)
    prefix = np.concatenate(([0], np.cumsum(x.counts)))
    los = np.fromiter((b.lo for b in partition), dtype=np.int64, count=partition.k)
    his = np.fromiter((b.hi for b in partition), dtype=np.int64, count=partition.k)
    counts = (prefix[his] - prefix[los - 1]).astype(np.float64)
    measurements = measure(counts, tree, eps2, rng)
    stats = ols_infer(tree, measurements)
    return Histogram(partition=partition, stats=stats)
