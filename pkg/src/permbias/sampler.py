"""Random permutations with bias via exponential (Gumbel) keys.

Each object gets an independent key ``log(-log U) - log(q_i)``, the log of an
exponential variate with rate ``q_i``, and sorting the keys in ascending order
yields a ranking distributed as the permutation-with-bias law.

Reproducibility across any amount of parallelism comes from addressing the
uniforms by replication index. Replication ``m`` of a batch reads Philox
counter blocks ``[m*b, (m+1)*b)`` with ``b = ceil(n / 4)``, under a key derived
from the master seed. A chunk of replications is therefore a single contiguous
draw, and chunk boundaries never change which uniforms a replication sees.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DegenerateUniform
from .model import PreferenceLike, as_weights, reduced_loglik_rows

DEFAULT_CHUNK = 1 << 16

_MASK64 = (1 << 64) - 1
# Top 52 bits, offset by half a step: the result lies in [2**-53, 1 - 2**-53],
# both ends exactly representable, so log(-log(u)) is always finite.
_SHIFT = np.uint64(12)
_SCALE = 2.0**-52


def philox_key(master_seed: int) -> np.ndarray:
    """128-bit Philox key derived from an arbitrary integer seed."""
    ss = np.random.SeedSequence(int(master_seed) & _MASK64)
    return ss.generate_state(2, np.uint64)


def derive_seed(master_seed: int, index: int) -> int:
    """Independent 64-bit child seed, e.g. one per season of a report."""
    ss = np.random.SeedSequence(int(master_seed) & _MASK64, spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def to_unit(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words into the open unit interval."""
    return ((np.asarray(raw, dtype=np.uint64) >> _SHIFT).astype(np.float64) + 0.5) * _SCALE


def _blocks(n: int) -> int:
    return (n + 3) // 4


def uniform_block(key: np.ndarray, start: int, count: int, n: int) -> np.ndarray:
    """Uniforms of replications ``start .. start+count-1``, shape ``(count, n)``."""
    b = _blocks(n)
    bitgen = np.random.Philox(key=key, counter=start * b)
    raw = bitgen.random_raw(count * 4 * b).reshape(count, 4 * b)[:, :n]
    return to_unit(raw)


@dataclass(frozen=True)
class RngStream:
    """The uniforms of one replication: ``(master_seed, stream_index)``."""

    master_seed: int
    stream_index: int

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError(f"stream_index must be non-negative, got {self.stream_index}")

    def uniforms(self, n: int) -> np.ndarray:
        return uniform_block(philox_key(self.master_seed), self.stream_index, 1, n)[0]


@dataclass(frozen=True, eq=False)
class KeyedDraw:
    keys: np.ndarray
    perm: np.ndarray


def _keys_from_uniforms(u: np.ndarray, log_q: np.ndarray) -> np.ndarray:
    keys = np.log(-np.log(u)) - log_q
    if not np.isfinite(keys).all():
        raise DegenerateUniform("non-finite sampling key; uniform hit an endpoint")
    return keys


def _order(keys: np.ndarray) -> np.ndarray:
    # stable sort: equal keys keep ascending index order
    return np.argsort(keys, axis=-1, kind="stable").astype(np.intp)


def draw_keys(q: PreferenceLike, rng: RngStream) -> KeyedDraw:
    w = as_weights(q)
    keys = _keys_from_uniforms(rng.uniforms(w.size), np.log(w))
    return KeyedDraw(keys=keys, perm=_order(keys))


def sample_permutation(q: PreferenceLike, rng: RngStream) -> np.ndarray:
    """One ranking (rank 1 first) drawn from the permutation-with-bias law."""
    return draw_keys(q, rng).perm


def _chunk(w: np.ndarray, log_q: np.ndarray, key: np.ndarray, start: int, count: int):
    u = uniform_block(key, start, count, w.size)
    perms = _order(_keys_from_uniforms(u, log_q))
    return perms, reduced_loglik_rows(w, perms)


def chunk_starts(m_count: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(s, min(chunk_size, m_count - s)) for s in range(0, m_count, chunk_size)]


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def map_chunks(fn, m_count: int, chunk_size: int, threads: int | None):
    """Apply ``fn(start, count)`` to every chunk; results come back in chunk order."""
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    spans = chunk_starts(m_count, chunk_size)
    workers = min(resolve_threads(threads), len(spans))
    if workers == 1:
        return [fn(s, c) for s, c in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sc: fn(*sc), spans))


def iter_batch(
    q: PreferenceLike, m_count: int, master_seed: int, chunk_size: int = DEFAULT_CHUNK
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(perms, ells)`` chunks of a batch in replication order."""
    if m_count < 1:
        raise ValueError(f"m_count must be >= 1, got {m_count}")
    w = as_weights(q)
    log_q, key = np.log(w), philox_key(master_seed)
    for start, count in chunk_starts(m_count, chunk_size):
        yield _chunk(w, log_q, key, start, count)


def sample_batch(
    q: PreferenceLike,
    m_count: int,
    master_seed: int,
    threads: int | None = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``m_count`` i.i.d. rankings and their reduced log-likelihoods.

    Returns ``(perms, ells)`` with shapes ``(m_count, n)`` and ``(m_count,)``.
    Row ``m`` equals ``sample_permutation(q, RngStream(master_seed, m))``, so
    the output does not depend on ``threads`` or ``chunk_size``.
    """
    if m_count < 1:
        raise ValueError(f"m_count must be >= 1, got {m_count}")
    w = as_weights(q)
    log_q, key = np.log(w), philox_key(master_seed)
    parts = map_chunks(lambda s, c: _chunk(w, log_q, key, s, c), m_count, chunk_size, threads)
    return np.concatenate([p for p, _ in parts]), np.concatenate([e for _, e in parts])
