#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)

# pylint: disable=redefined-outer-name,protected-access
"""Tests for Cache controller."""
from concurrent.futures import ThreadPoolExecutor
import os

import pytest

from spin_expansion.cache import Cache


@pytest.fixture()
def cache_entries():
    """Fill in a cache through its memo interface."""
    cache = Cache({"domain": "weights"})
    res = {}

    for _ in range(6):
        key = os.urandom(4).hex()
        content = os.urandom(7).hex()
        cache.setdefault(key, lambda content=content: content)
        res[key] = content

    return cache, res


def test__get_key():
    """Cache controller tests."""
    assert Cache()._get_key("key") == "key"
    assert Cache({"domain": "dmn"})._get_key("key") == ("dmn", "key")
    assert Cache({"domain": "dmn"})._get_key(("a", 1)) == ("dmn", ("a", 1))


def test_read_cache(cache_entries):
    """Cache controller tests."""
    cache, res = cache_entries
    assert (cache.hits, cache.misses) == (0, len(res))

    for key, content in res.items():
        assert cache.read_cache(key) == content
    for _ in range(4):
        assert cache.read_cache(os.urandom(3).hex()) is None

    assert cache.hits == len(res)
    assert cache.misses == len(res) + 4
    assert len(cache) == len(res)


def test_setdefault():
    """Cache controller tests."""
    cache = Cache()
    calls = []

    def factory():
        calls.append(1)
        return {"value": len(calls)}

    first = cache.setdefault("key", factory)
    second = cache.setdefault("key", factory)

    assert first is second
    assert first == {"value": 1}
    assert len(calls) == 1
    assert (cache.hits, cache.misses) == (1, 1)


def test_setdefault_keeps_first_value():
    """Cache controller tests."""
    cache = Cache()
    cache.setdefault("key", lambda: "first")

    assert cache.setdefault("key", lambda: "second") == "first"
    assert len(cache) == 1


def test_setdefault_threads():
    """Cache controller tests."""
    cache = Cache()

    with ThreadPoolExecutor(max_workers=8) as pool:
        values = list(
            pool.map(lambda i: cache.setdefault(i % 5, lambda: object()), range(200))
        )

    assert len(cache) == 5
    for i, value in enumerate(values):
        assert value is cache.read_cache(i % 5)
    assert cache.hits + cache.misses == 200 + 200
