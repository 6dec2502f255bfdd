"""
Trajectory Cache - LRU cache of transported fiber-parameter trajectories.

Transports dominate runtime, so every fibered Lagrangian keeps the
trajectories it has already integrated, keyed by the (rounded) fiber
parameter. Missing parameters are integrated together in one vectorised batch.
"""

import logging
import threading
from typing import Callable, Generic, Iterable, Optional, TypeVar

import numpy as np
from cachetools import LRUCache

from services.geometry.config import config

logger = logging.getLogger("lglab.trajectory_cache")

T = TypeVar("T")


class TrajectoryCache(Generic[T]):
    """
    LRU cache keyed by fiber parameter.

    Note: experiments may evaluate the same Lagrangian from several worker
    threads, so every access goes through a lock. Batches are built while the
    lock is held; two workers never integrate the same parameter twice.
    """

    def __init__(self, max_size: Optional[int] = None, decimals: int = 12):
        """
        Args:
            max_size: Maximum number of trajectories (default: TRAJECTORY_CACHE_SIZE)
            decimals: rounding applied to parameters before they become keys
        """
        self.max_size = max_size or config.TRAJECTORY_CACHE_SIZE
        self.decimals = decimals
        self._cache: LRUCache = LRUCache(maxsize=self.max_size)
        self._lock = threading.RLock()
        self.builds = 0

        logger.debug(f"TrajectoryCache initialized: max_size={self.max_size}")

    def key(self, sigma: float) -> float:
        return round(float(sigma), self.decimals)

    def get(self, sigma: float) -> Optional[T]:
        with self._lock:
            return self._cache.get(self.key(sigma))

    def set(self, sigma: float, value: T) -> None:
        with self._lock:
            self._cache[self.key(sigma)] = value

    def get_or_build(
        self, sigmas: Iterable[float], builder: Callable[[np.ndarray], list[T]]
    ) -> list[T]:
        """
        Return cached trajectories, integrating the missing ones in one batch.

        Args:
            sigmas: fiber parameters
            builder: maps an array of missing parameters to their trajectories
        """
        keys = [self.key(s) for s in sigmas]
        with self._lock:
            found = {k: self._cache.get(k) for k in keys}
            missing = sorted({k for k, v in found.items() if v is None})
            if missing:
                built = builder(np.asarray(missing, dtype=float))
                self.builds += 1
                for k, value in zip(missing, built):
                    self._cache[k] = value
                    found[k] = value
                logger.debug(
                    "built %d trajectories", len(missing), extra={"cached": len(self._cache)}
                )
            return [found[k] for k in keys]

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)

    def __contains__(self, sigma: float) -> bool:
        with self._lock:
            return self.key(sigma) in self._cache
