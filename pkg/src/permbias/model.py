"""The permutation-with-bias law.

Objects ``0..n-1`` carry strictly positive preference weights ``q``. A ranking
is built by repeatedly drawing one of the remaining objects with probability
proportional to its weight, so the probability of an ordering ``p`` (rank 1
first) is::

    L(q | p) = prod_i q[p[i]] / sum_{j >= i} q[p[j]]

This is the Plackett-Luce ranking law. Only weight ratios matter.

Permutations are 0-based integer arrays; ``order[t]`` is the object at rank
``t + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateLabel,
    InvalidPermutation,
    NonPositiveWeight,
    TooFewObjects,
)


def validate(weights: Sequence[float], labels: Sequence[str] | None = None) -> None:
    """Raise if ``weights``/``labels`` do not describe a valid preference vector."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise NonPositiveWeight(f"weights must be one-dimensional, got shape {w.shape}")
    if w.size < 2:
        raise TooFewObjects(f"need at least 2 objects, got {w.size}")
    bad = ~(np.isfinite(w) & (w > 0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonPositiveWeight(f"weight at position {i + 1} is {float(w[i])!r}; weights must be finite and > 0")
    if labels is not None:
        if len(labels) != w.size:
            raise DimensionMismatch(f"{len(labels)} labels for {w.size} weights")
        seen = set()
        for lab in labels:
            if lab in seen:
                raise DuplicateLabel(f"label {lab!r} appears more than once")
            seen.add(lab)


@dataclass(frozen=True, eq=False)
class PreferenceVector:
    """Strictly positive weights over ``n`` labelled objects.

    Labels default to ``"1".."n"``. The weights array is read-only.
    """

    weights: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        labels = tuple(str(x) for x in self.labels) if len(self.labels) else tuple(
            str(i + 1) for i in range(w.size if w.ndim == 1 else 0)
        )
        validate(w, labels)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.weights.size

    def scaled(self, c: float) -> "PreferenceVector":
        return PreferenceVector(self.weights * c, self.labels)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidPermutation(f"unknown label {label!r}") from None

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        pairs = ", ".join(f"{lab}={w:g}" for lab, w in zip(self.labels, self.weights))
        return f"PreferenceVector({pairs})"


PreferenceLike = Union[PreferenceVector, Sequence[float], np.ndarray]


def as_weights(q: PreferenceLike) -> np.ndarray:
    """Return the validated float weight array behind ``q``."""
    if isinstance(q, PreferenceVector):
        return q.weights
    w = np.asarray(q, dtype=float)
    validate(w)
    return w


def as_permutation(order: Sequence[int], n: int) -> np.ndarray:
    """Validate ``order`` as a 0-based permutation of ``range(n)``."""
    p = np.asarray(order)
    if p.ndim != 1 or p.size != n:
        raise DimensionMismatch(f"permutation has {p.size} entries, preference vector has {n}")
    if p.size and not np.issubdtype(p.dtype, np.integer):
        raise InvalidPermutation(f"permutation entries must be integers, got dtype {p.dtype}")
    p = p.astype(np.intp)
    if not np.array_equal(np.sort(p), np.arange(n)):
        raise InvalidPermutation(f"{p.tolist()} is not a permutation of 0..{n - 1}")
    return p


def reduced_loglik_rows(weights: np.ndarray, orders: np.ndarray) -> np.ndarray:
    """Reduced log-likelihood of every row of ``orders`` (shape ``(m, n)``).

    Accumulates weights from the last rank back to the first and subtracts the
    log of each running total. Columns are visited in a fixed order, so a row's
    value never depends on how many other rows share the call.
    """
    qs = weights[orders]
    total = np.zeros(qs.shape[0])
    ell = np.zeros(qs.shape[0])
    for j in range(qs.shape[1] - 1, -1, -1):
        total += qs[:, j]
        ell -= np.log(total)
    return ell


def log_likelihood(q: PreferenceLike, order: Sequence[int]) -> float:
    """Reduced log-likelihood ``-sum_i log(sum_{j>=i} q[order[j]])`` in nats.

    The full log-likelihood is this value plus ``sum(log(q))``, a term that is
    the same for every permutation.
    """
    w = as_weights(q)
    p = as_permutation(order, w.size)
    return float(reduced_loglik_rows(w, p[None, :])[0])


def full_log_likelihood(q: PreferenceLike, order: Sequence[int]) -> float:
    w = as_weights(q)
    return log_likelihood(w, order) + float(np.log(w).sum())


def likelihood(q: PreferenceLike, order: Sequence[int]) -> float:
    """Probability of observing ``order`` under weights ``q``."""
    return math.exp(full_log_likelihood(q, order))


def extreme_permutations(q: PreferenceLike) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(least_likely, most_likely)`` orderings.

    The least likely ranking lists objects by ascending weight, the most likely
    by descending weight. Equal weights keep ascending index order in both.
    """
    w = as_weights(q)
    idx = np.arange(w.size)
    ascending = np.lexsort((idx, w))
    descending = np.lexsort((idx, -w))
    return ascending.astype(np.intp), descending.astype(np.intp)
