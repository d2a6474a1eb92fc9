"""Order-statistics multiset: balance, exact sums, threshold queries."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dawa.devtree import DeviationTree


def brute_above(values, threshold):
    return float(sum(v - threshold for v in values if v >= threshold))


def brute_above_scaled(values, total, length):
    return sum(v * length - total for v in values if v * length >= total)


class TestBasicOps:
    def test_insert_size_total(self):
        t = DeviationTree()
        for v in [5, 3, 5, 1]:
            t.insert(v)
        assert t.size == 4
        assert len(t) == 4
        assert t.total == 14

    def test_iteration_sorted_with_multiplicity(self):
        t = DeviationTree()
        for v in [5, 3, 5, 1, 3, 3]:
            t.insert(v)
        assert list(t) == [1, 3, 3, 3, 5, 5]

    def test_remove(self):
        t = DeviationTree()
        for v in [5, 3, 5]:
            t.insert(v)
        t.remove(5)
        assert list(t) == [3, 5]
        t.remove(5)
        t.remove(3)
        assert t.size == 0

    def test_remove_absent_raises(self):
        t = DeviationTree()
        t.insert(2)
        with pytest.raises(KeyError):
            t.remove(7)
        t.remove(2)
        with pytest.raises(KeyError):
            t.remove(2)

    def test_empty_queries(self):
        t = DeviationTree()
        assert t.size == 0
        assert t.total == 0
        assert t.above(0.0) == 0.0
        assert t.above_scaled(0, 1) == 0


class TestAbove:
    def test_hand_example(self):
        t = DeviationTree()
        for v in [1, 0, 2, 0]:  # bucket [4,7] of the worked example
            t.insert(v)
        # mean 0.75; deviation above: (1-.75)+(2-.75) = 1.5; dev = 2*1.5 = 3
        assert t.above(0.75) == pytest.approx(1.5)
        assert t.above_scaled(3, 4) == 6  # exact numerator: dev = 2*6/4 = 3

    @given(
        st.lists(st.integers(0, 30), min_size=1, max_size=50),
        st.floats(-1, 31, allow_nan=False),
    )
    def test_above_matches_brute(self, values, threshold):
        t = DeviationTree()
        for v in values:
            t.insert(v)
        assert t.above(threshold) == pytest.approx(brute_above(values, threshold))

    @given(st.lists(st.integers(0, 30), min_size=1, max_size=50))
    def test_above_scaled_matches_brute(self, values):
        t = DeviationTree()
        for v in values:
            t.insert(v)
        total, length = sum(values), len(values)
        assert t.above_scaled(total, length) == brute_above_scaled(values, total, length)

    @given(st.lists(st.integers(0, 10), min_size=1, max_size=30))
    def test_above_scaled_is_exact_integer(self, values):
        t = DeviationTree()
        for v in values:
            t.insert(v)
        got = t.above_scaled(sum(values), len(values))
        assert isinstance(got, int)


class TestInvariantsUnderChurn:
    @given(
        st.lists(
            st.tuples(st.sampled_from(["ins", "del"]), st.integers(0, 8)),
            min_size=1,
            max_size=120,
        )
    )
    def test_mirror_multiset(self, ops):
        t = DeviationTree()
        mirror = []
        for op, v in ops:
            if op == "ins":
                t.insert(v)
                mirror.append(v)
            elif mirror:
                # delete something actually present to keep the mirror honest
                u = mirror.pop(np.random.default_rng(v).integers(len(mirror) + 1) % len(mirror))
                t.remove(u)
        t.check_invariants()
        assert list(t) == sorted(mirror)
        assert t.size == len(mirror)
        assert t.total == sum(mirror)

    def test_sequential_churn_stays_balanced(self):
        t = DeviationTree()
        for v in range(256):  # ascending insert is the classic degenerate case
            t.insert(v)
        t.check_invariants()
        for v in range(0, 256, 2):
            t.remove(v)
        t.check_invariants()
        assert t.size == 128
