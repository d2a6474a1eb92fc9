"""Height-balanced multiset with subtree sums for one-sided deviation queries.

The tree stores window contents during the sliding-window cost scan.  Each
node keeps one distinct value with a multiplicity counter plus the sum and
count of its whole subtree, so the total deviation above a threshold comes
from a single root-to-leaf walk: at each node either every element on the
right contributes (value >= threshold) or none on the left does.
"""
from __future__ import annotations


class _Node:
    __slots__ = ("value", "mult", "height", "left", "right", "sum", "count")

    def __init__(self, value: int):
        self.value = value
        self.mult = 1
        self.height = 1
        self.left: "_Node | None" = None
        self.right: "_Node | None" = None
        self.sum = value
        self.count = 1


def _update(node: _Node) -> None:
    lh = node.left.height if node.left else 0
    rh = node.right.height if node.right else 0
    node.height = (lh if lh > rh else rh) + 1
    s = node.value * node.mult
    c = node.mult
    if node.left:
        s += node.left.sum
        c += node.left.count
    if node.right:
        s += node.right.sum
        c += node.right.count
    node.sum = s
    node.count = c


def _balance_factor(node: _Node) -> int:
    lh = node.left.height if node.left else 0
    rh = node.right.height if node.right else 0
    return lh - rh


def _rotate_right(node: _Node) -> _Node:
    pivot = node.left
    node.left = pivot.right
    pivot.right = node
    _update(node)
    _update(pivot)
    return pivot


def _rotate_left(node: _Node) -> _Node:
    pivot = node.right
    node.right = pivot.left
    pivot.left = node
    _update(node)
    _update(pivot)
    return pivot


def _rebalance(node: _Node) -> _Node:
    bf = _balance_factor(node)
    if bf > 1:
        if _balance_factor(node.left) < 0:
            node.left = _rotate_left(node.left)
        return _rotate_right(node)
    if bf < -1:
        if _balance_factor(node.right) > 0:
            node.right = _rotate_right(node.right)
        return _rotate_left(node)
    return node


def _insert(node: "_Node | None", value: int) -> _Node:
    if node is None:
        return _Node(value)
    if value < node.value:
        node.left = _insert(node.left, value)
    elif value > node.value:
        node.right = _insert(node.right, value)
    else:
        node.mult += 1
    _update(node)
    return _rebalance(node)


def _min_node(node: _Node) -> _Node:
    while node.left:
        node = node.left
    return node


def _remove(node: "_Node | None", value: int, whole: bool = False) -> "_Node | None":
    if node is None:
        raise KeyError(value)
    if value < node.value:
        node.left = _remove(node.left, value, whole)
    elif value > node.value:
        node.right = _remove(node.right, value, whole)
    else:
        if node.mult > 1 and not whole:
            node.mult -= 1
        elif node.left is None:
            return node.right
        elif node.right is None:
            return node.left
        else:
            succ = _min_node(node.right)
            node.value = succ.value
            node.mult = succ.mult
            node.right = _remove(node.right, succ.value, whole=True)
    _update(node)
    return _rebalance(node)


class DeviationTree:
    """Multiset of window values supporting exact one-sided deviation sums."""

    __slots__ = ("_root",)

    def __init__(self, values=()):
        self._root: "_Node | None" = None
        for v in values:
            self.insert(v)

    def insert(self, value: int) -> None:
        self._root = _insert(self._root, int(value))

    def remove(self, value: int) -> None:
        """Remove one occurrence; raises KeyError if the value is absent."""
        self._root = _remove(self._root, int(value))

    @property
    def size(self) -> int:
        return self._root.count if self._root else 0

    @property
    def total(self) -> int:
        return self._root.sum if self._root else 0

    def __len__(self) -> int:
        return self.size

    def above(self, threshold: float) -> float:
        """Sum of (value - threshold) over elements with value >= threshold."""
        acc = 0.0
        node = self._root
        while node is not None:
            if node.value < threshold:
                node = node.right
            else:
                r = node.right
                if r is not None:
                    acc += r.sum - r.count * threshold
                acc += node.mult * (node.value - threshold)
                node = node.left
        return acc

    def above_scaled(self, total: int, length: int) -> int:
        """Integer numerator of the deviation above the mean total/length.

        Returns sum of (value*length - total) over elements with
        value*length >= total, computed in exact integer arithmetic.
        """
        acc = 0
        node = self._root
        while node is not None:
            if node.value * length < total:
                node = node.right
            else:
                r = node.right
                if r is not None:
                    acc += r.sum * length - r.count * total
                acc += node.mult * (node.value * length - total)
                node = node.left
        return acc

    def __iter__(self):
        """Values in ascending order, each repeated by its multiplicity."""
        stack, node = [], self._root
        while stack or node:
            while node:
                stack.append(node)
                node = node.left
            node = stack.pop()
            for _ in range(node.mult):
                yield node.value
            node = node.right

    def check_invariants(self) -> None:
        """Verify ordering, balance, and cached aggregates; test hook."""

        def walk(node):
            if node is None:
                return 0, 0, 0
            assert node.mult >= 1
            lh, ls, lc = walk(node.left)
            rh, rs, rc = walk(node.right)
            if node.left:
                assert node.left.value < node.value
            if node.right:
                assert node.right.value > node.value
            assert abs(lh - rh) <= 1
            assert node.height == max(lh, rh) + 1
            assert node.sum == ls + rs + node.value * node.mult
            assert node.count == lc + rc + node.mult
            return node.height, node.sum, node.count

        walk(self._root)
