"""Synthetic workload and data generators: shapes, determinism, validation."""

import numpy as np
import pytest

from dawa.core import ParameterError
from dawa.generators import DATA_KINDS, WORKLOAD_KINDS, gen_synthetic_data, gen_workload


class TestWorkloads:
    def test_identity(self):
        W = gen_workload("identity", 8, seed=0)
        assert [(q.lo, q.hi) for q in W.queries] == [(j, j) for j in range(1, 9)]

    def test_uniform_bounds_and_count(self):
        W = gen_workload("uniform", 100, seed=1, num_queries=250)
        assert W.m == 250
        for q in W.queries:
            assert 1 <= q.lo <= q.hi <= 100

    def test_uniform_default_count(self):
        assert gen_workload("uniform", 64, seed=1).m == 2000

    @pytest.mark.parametrize("kind", ["clustered", "large_clustered"])
    def test_clustered_shape(self, kind):
        W = gen_workload(kind, 2048, seed=4, num_clusters=3, queries_per_cluster=50)
        assert W.m == 150
        for q in W.queries:
            assert 1 <= q.lo <= q.hi <= 2048

    def test_large_variant_asks_wider_queries(self):
        tight = gen_workload("clustered", 4096, seed=7)
        wide = gen_workload("large_clustered", 4096, seed=7)
        mean_len = lambda W: float(np.mean([q.length for q in W.queries]))
        assert mean_len(tight) * 2 < mean_len(wide)

    def test_deterministic(self):
        a = gen_workload("uniform", 50, seed=9, num_queries=20)
        b = gen_workload("uniform", 50, seed=9, num_queries=20)
        assert a.queries == b.queries
        c = gen_workload("uniform", 50, seed=10, num_queries=20)
        assert a.queries != c.queries

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            gen_workload("zipf", 10, seed=0)

    def test_unknown_param(self):
        with pytest.raises(ParameterError):
            gen_workload("uniform", 10, seed=0, shape=3)

    def test_kinds_registry(self):
        for kind in WORKLOAD_KINDS:
            W = gen_workload(kind, 256, seed=0)
            assert W.m >= 1


class TestData:
    def test_constant(self):
        x = gen_synthetic_data("constant", 12, seed=0, value=7)
        assert np.all(x.counts == 7)

    def test_constant_default(self):
        x = gen_synthetic_data("constant", 12, seed=0)
        assert np.all(x.counts == x.counts[0])

    def test_piecewise_has_exact_segments(self):
        for seed in range(5):
            x = gen_synthetic_data("piecewise_constant", 256, seed=seed, segments=8)
            changes = int(np.sum(np.diff(x.counts) != 0))
            # 8 runs means exactly 7 level changes
            assert changes == 7

    def test_piecewise_total_near_target(self):
        x = gen_synthetic_data("piecewise_constant", 512, seed=3, segments=8)
        # levels are drawn around an average of 10 per position
        assert 0.5 * 10 * 512 <= x.total() <= 2.0 * 10 * 512

    def test_heavy_tail_properties(self):
        x = gen_synthetic_data("heavy_tail", 1000, seed=1)
        assert np.all(x.counts >= 0)
        # heavy tail: the max dwarfs the median
        assert x.counts.max() > 10 * max(1, int(np.median(x.counts)))

    def test_deterministic(self):
        a = gen_synthetic_data("heavy_tail", 64, seed=5)
        b = gen_synthetic_data("heavy_tail", 64, seed=5)
        assert np.array_equal(a.counts, b.counts)
        c = gen_synthetic_data("heavy_tail", 64, seed=6)
        assert not np.array_equal(a.counts, c.counts)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            gen_synthetic_data("gaussian", 10, seed=0)

    def test_unknown_param(self):
        with pytest.raises(ParameterError):
            gen_synthetic_data("constant", 10, seed=0, mean=4)

    def test_kinds_registry(self):
        for kind in DATA_KINDS:
            x = gen_synthetic_data(kind, 128, seed=0)
            assert x.n == 128
            assert np.all(x.counts >= 0)
