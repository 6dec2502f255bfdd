import numpy as np

from services.geometry.core.trajectory_cache import TrajectoryCache


def _builder(calls):
    def build(sigmas):
        calls.append(list(sigmas))
        return [f"traj({s:g})" for s in sigmas]

    return build


def test_builds_only_missing_parameters():
    calls = []
    cache = TrajectoryCache(max_size=32)
    assert cache.get_or_build([0.0, 1.0], _builder(calls)) == ["traj(0)", "traj(1)"]
    assert cache.get_or_build([1.0, 2.0, 0.0], _builder(calls)) == ["traj(1)", "traj(2)", "traj(0)"]
    assert calls == [[0.0, 1.0], [2.0]]
    assert cache.builds == 2
    assert len(cache) == 3


def test_keys_are_rounded():
    cache = TrajectoryCache(max_size=32, decimals=6)
    cache.set(0.1 + 1e-9, "a")
    assert 0.1 in cache
    assert cache.get(0.1) == "a"


def test_lru_eviction():
    calls = []
    cache = TrajectoryCache(max_size=2)
    cache.get_or_build(np.array([0.0, 1.0]), _builder(calls))
    cache.get(0.0)
    cache.get_or_build([2.0], _builder(calls))
    assert 0.0 in cache
    assert 1.0 not in cache
    cache.clear()
    assert len(cache) == 0
