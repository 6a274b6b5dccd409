"""
解析缓存、执行器、配置与工具函数测试
"""

import numpy as np
import pytest

from app.config import get_settings, settings
from app.core.cache import AnalyticCache, analytic_cache, generate_cache_key
from app.core.netmodel import transmission_pmf_vector
from app.core.replication import ReplicationRunner
from app.core.utils import mean_and_stderr, parse_grid, spawn_generator


def test_lru_eviction():
    cache = AnalyticCache(max_size=2)
    cache.set("a", 1)
    cache.set("b", 2)
    assert cache.get("a") == 1
    cache.set("c", 3)
    assert "b" not in cache
    assert len(cache) == 2
    stats = cache.get_stats()
    assert stats["evictions"] == 1 and stats["hits"] == 1


def test_cached_arrays_are_read_only():
    cache = AnalyticCache(max_size=4)
    cache.set("x", np.zeros(3))
    with pytest.raises(ValueError):
        cache.get("x")[0] = 1.0


def test_cache_key_depends_on_parameters(default_arm):
    geometry = default_arm.server.geometry
    assert generate_cache_key("f", geometry, 0.7) == generate_cache_key("f", geometry, 0.7)
    assert generate_cache_key("f", geometry, 0.7) != generate_cache_key("f", geometry, 0.8)


def test_pmf_vector_is_cached(default_arm):
    geometry = default_arm.server.geometry
    first = transmission_pmf_vector(geometry, 0.65)
    hits = analytic_cache.hits
    second = transmission_pmf_vector(geometry, 0.65)
    assert second is first
    assert analytic_cache.hits == hits + 1


def _square(x):
    return x * x


def test_runner_preserves_order():
    runner = ReplicationRunner(parallelism=1, show_progress=False)
    assert runner.map(_square, [3, 1, 2]) == [9, 1, 4]
    assert runner.get_stats()["completed_tasks"] == 3


def test_streams_are_reproducible_and_distinct():
    a = spawn_generator(1, 0, "env").random(3)
    b = spawn_generator(1, 0, "env").random(3)
    c = spawn_generator(1, 0, "policy", "UCB1").random(3)
    d = spawn_generator(1, 1, "env").random(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_parse_grid():
    assert parse_grid("0.6, 0.8,0.6") == [0.6, 0.8]
    assert parse_grid("500,1000", int) == [500, 1000]
    assert parse_grid(None) is None
    with pytest.raises(ValueError):
        parse_grid(" , ")


def test_mean_and_stderr():
    samples = np.array([[1.0, 4.0], [3.0, 4.0], [5.0, 4.0]])
    mean, stderr = mean_and_stderr(samples)
    np.testing.assert_allclose(mean, [3.0, 4.0])
    np.testing.assert_allclose(stderr, [2.0 / np.sqrt(3), 0.0])
    mean, stderr = mean_and_stderr(np.array([[2.0, 7.0]]))
    np.testing.assert_array_equal(stderr, [0.0, 0.0])


def test_settings_accessor_is_shared():
    assert get_settings() is get_settings()
    assert get_settings() is settings
    assert get_settings().regret_mode in ("pseudo", "empirical")
