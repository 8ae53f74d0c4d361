"""
Кэш собственных значений отдельных выборок ансамбля.

Содержит общий интерфейс и две реализации:
- InMemorySampleCache — для одиночного процесса;
- RedisSampleCache — общий кэш с TTL для повторных прогонов.

Значения хранятся как JSON-списки пар [re, im]; repr float в JSON
восстанавливается бит-в-бит, поэтому прогон из кэша совпадает с обычным.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np
from redis.asyncio import Redis

from src.pseudospec.services.arithmetic import FLOAT


@dataclass(frozen=True)
class CacheSettings:
    """Настройки хранения выборок."""

    ttl_seconds: int = 60 * 60 * 24 * 7  # неделя по умолчанию


class SampleCache(Protocol):
    """Контракт кэша выборок: ключ ансамбля + номер выборки."""

    async def get(self, key: str, index: int) -> np.ndarray | None: ...

    async def set(self, key: str, index: int, eigenvalues: np.ndarray) -> None: ...

    async def aclose(self) -> None: ...


def encode_eigenvalues(values: np.ndarray) -> str:
    return json.dumps([[float(v.real), float(v.imag)] for v in values])


def decode_eigenvalues(raw: str) -> np.ndarray:
    pairs = json.loads(raw)
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def ensemble_key(params: Any, tilde_delta: complex, master_seed: int) -> str:
    """Ключ ансамбля: все входы, от которых зависят собственные значения."""
    b = ",".join(repr(FLOAT.to_complex(c)) for c in params.b_coeffs)
    return (
        f"ensemble:n={params.n}:t={params.t}:b=[{b}]:delta={FLOAT.to_complex(params.delta)!r}"
        f":tilde={FLOAT.to_complex(tilde_delta)!r}:seed={master_seed}"
    )


class InMemorySampleCache(SampleCache):
    """Словарь в памяти процесса с TTL на ключ ансамбля."""

    def __init__(self, settings: CacheSettings) -> None:
        self._settings = settings
        self._store: dict[str, dict[int, str]] = {}
        self._expires_at: dict[str, float] = {}

    async def get(self, key: str, index: int) -> np.ndarray | None:
        if not self._cleanup_and_check(key):
            return None
        raw = self._store[key].get(index)
        return None if raw is None else decode_eigenvalues(raw)

    async def set(self, key: str, index: int, eigenvalues: np.ndarray) -> None:
        if not self._cleanup_and_check(key):
            self._store[key] = {}
        self._store[key][index] = encode_eigenvalues(eigenvalues)
        self._expires_at[key] = self._now() + self._settings.ttl_seconds

    async def aclose(self) -> None:
        return

    def _cleanup_and_check(self, key: str) -> bool:
        expires_at = self._expires_at.get(key)
        if expires_at is None:
            return False
        if expires_at < self._now():
            self._store.pop(key, None)
            self._expires_at.pop(key, None)
            return False
        return True

    @staticmethod
    def _now() -> float:
        return time.monotonic()


class RedisSampleCache(SampleCache):
    """
    Кэш в Redis: один хеш на ансамбль, поле — номер выборки.

    TTL обновляется при каждой записи.
    """

    def __init__(self, redis: Redis, settings: CacheSettings) -> None:
        self._redis = redis
        self._settings = settings
        self._key_prefix = "pseudospec:"

    async def get(self, key: str, index: int) -> np.ndarray | None:
        raw = await self._redis.hget(self._key(key), str(index))
        if raw is None:
            return None
        try:
            return decode_eigenvalues(raw)
        except (json.JSONDecodeError, TypeError, ValueError):
            return None

    async def set(self, key: str, index: int, eigenvalues: np.ndarray) -> None:
        full_key = self._key(key)
        await self._redis.hset(full_key, str(index), encode_eigenvalues(eigenvalues))
        ttl = self._settings.ttl_seconds
        if ttl > 0:
            await self._redis.expire(full_key, ttl)

    async def aclose(self) -> None:
        close = getattr(self._redis, "aclose", None)
        if callable(close):
            await close()
            return
        self._redis.close()

    def _key(self, key: str) -> str:
        return f"{self._key_prefix}{key}"


def build_sample_cache(
    backend: str,
    settings: CacheSettings,
    redis_url: str | None = None,
) -> SampleCache:
    """
    Фабрика кэша.

    backend: "redis" или "memory". Если указан redis без URL,
    используется InMemory.
    """
    if backend.lower() == "redis" and redis_url:
        client = Redis.from_url(redis_url, encoding="utf-8", decode_responses=True)
        return RedisSampleCache(client, settings)
    return InMemorySampleCache(settings)
