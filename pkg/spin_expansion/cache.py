#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Cache controller."""

from collections.abc import Callable, Hashable
import logging
import threading
from typing import Any, Dict, Optional

_LOGGER = logging.getLogger(__name__)


class Cache:
    """In-memory memo shared by weight and marginal computations.

    Safe for concurrent use; `setdefault` is insert-if-absent, so a value
    computed twice on a race keeps whichever was stored first.
    """

    def __init__(self, params: Optional[Dict[str, Any]] = None):
        """Initialize cache."""
        _LOGGER.debug("Initializing cache")
        params = params or {}

        self._domain = params.get("domain")
        self._lock = threading.Lock()
        self._store: Dict[Hashable, Any] = {}
        self._hits = 0
        self._misses = 0

    def _get_key(self, key: Hashable) -> Hashable:
        """Get namespaced key."""
        if self._domain:
            return (self._domain, key)
        return key

    @property
    def hits(self) -> int:
        """Return number of successful lookups."""
        return self._hits

    @property
    def misses(self) -> int:
        """Return number of failed lookups."""
        return self._misses

    def __len__(self) -> int:
        """Return number of stored entries."""
        return len(self._store)

    def read_cache(self, key: Hashable) -> Optional[Any]:
        """Read cached data."""
        with self._lock:
            content = self._store.get(self._get_key(key))
            if content is None:
                self._misses += 1
            else:
                self._hits += 1
        return content

    def setdefault(self, key: Hashable, factory: Callable[[], Any]) -> Any:
        """Return the cached value, computing and storing it if absent."""
        cached = self.read_cache(key)
        if cached is not None:
            return cached

        content = factory()
        with self._lock:
            return self._store.setdefault(self._get_key(key), content)
