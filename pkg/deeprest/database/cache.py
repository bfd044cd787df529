"""
In-memory cache with TTL for loaded models
Avoids re-parsing and re-validating model containers on repeated requests
"""
import time
from threading import Lock
from typing import Any, Dict, Optional, Tuple

from deeprest.core.config import get_settings


class TTLCache:
    """
    Thread-safe in-memory cache with TTL (Time To Live)
    """
    def __init__(self, ttl_seconds: int = 60):
        self.ttl = ttl_seconds
        self._cache: Dict[str, Tuple[Any, float]] = {}
        self._lock = Lock()

    def get(self, key: str) -> Optional[Any]:
        """Get value from cache if not expired"""
        with self._lock:
            if key in self._cache:
                value, expiry = self._cache[key]
                if time.monotonic() < expiry:
                    return value
                # Expired, remove it
                del self._cache[key]
            return None

    def set(self, key: str, value: Any):
        """Set value in cache with TTL, dropping entries that have expired"""
        with self._lock:
            now = time.monotonic()
            expired = [k for k, (_, expiry) in self._cache.items() if expiry <= now]
            for k in expired:
                del self._cache[k]
            self._cache[key] = (value, now + self.ttl)

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)

    def invalidate(self, key: str):
        """Remove key from cache"""
        with self._lock:
            self._cache.pop(key, None)

    def clear(self):
        """Clear all cache entries"""
        with self._lock:
            self._cache.clear()


_model_cache: Optional[TTLCache] = None


def get_model_cache() -> TTLCache:
    global _model_cache
    if _model_cache is None:
        _model_cache = TTLCache(ttl_seconds=get_settings().model_cache_ttl)
    return _model_cache
