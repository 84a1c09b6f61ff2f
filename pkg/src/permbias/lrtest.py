"""Likelihood test of ``H0: q = q0`` for an observed ranking.

The supremum of the likelihood over all weight vectors is the same for every
ranking, so the likelihood ratio orders rankings exactly as ``L(q0 | p)``
does. The p-value of an observed ranking is the total probability of the
rankings that are strictly less likely than it.

Two routes compute it:

* :func:`exact_pvalue` enumerates all ``n!`` rankings (small ``n`` only).
* :func:`mc_pvalue` samples ``M`` rankings and reports the fraction whose
  reduced log-likelihood is strictly below the observed one.

Ties are never counted as "below"; the Monte Carlo route reports how many
draws tied so mid-p style variants can be formed downstream.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveP, TooLargeForExact
from .model import PreferenceLike, as_permutation, as_weights, reduced_loglik_rows
from .sampler import DEFAULT_CHUNK, _chunk, map_chunks, philox_key

EXACT_HARD_LIMIT = 12
# relative band within which two enumerated likelihoods count as equal
EXACT_TIE_RTOL = 1e-12
_TAIL = 8


@dataclass(frozen=True)
class TestConfig:
    replications: int = 1_000_000
    master_seed: int = 0
    exact_max_n: int = 10
    alpha: float = 0.05

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not 1 <= self.exact_max_n <= EXACT_HARD_LIMIT:
            raise ValueError(f"exact_max_n must be in [1, {EXACT_HARD_LIMIT}], got {self.exact_max_n}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class TestResult:
    """Outcome of one test.

    ``surprisal`` is ``inf`` when the Monte Carlo estimate is zero; in that case
    ``ci95[1] == 3 / M`` and the surprisal is only known to exceed
    ``log(M / 3)`` (see :attr:`surprisal_lower_bound`).
    """

    observed_ell: float
    p_value: float
    method: str
    replications_used: int
    tie_count: int
    greater_count: int
    std_error: float
    ci95: tuple[float, float]
    surprisal: float

    __test__ = False

    @property
    def censored(self) -> bool:
        return self.method == "monte-carlo" and self.p_value == 0.0

    @property
    def less_count(self) -> int:
        return self.replications_used - self.tie_count - self.greater_count

    @property
    def surprisal_lower_bound(self) -> float:
        if self.censored:
            return math.log(self.replications_used / 3)
        return self.surprisal


class Decision(str, enum.Enum):
    REJECT = "reject"
    NO_REJECT = "no-reject"


def surprisal(p_value: float) -> float:
    """Self-information ``-ln(p)`` in nats."""
    if not p_value > 0:
        raise NonPositiveP(f"surprisal needs p > 0, got {p_value!r}; use the censored bound for p = 0")
    if p_value > 1:
        raise ValueError(f"p-value must be <= 1, got {p_value!r}")
    return -math.log(p_value)


def decide(result: TestResult, alpha: float = 0.05) -> Decision:
    return Decision.REJECT if result.p_value < alpha else Decision.NO_REJECT


def _observed_ell(w: np.ndarray, observed) -> float:
    p = as_permutation(observed, w.size)
    return float(reduced_loglik_rows(w, p[None, :])[0])


def _enumerate_ells(w: np.ndarray):
    """Yield reduced log-likelihoods of all rankings, in blocks.

    The last ``min(n, 8)`` ranks are enumerated as one vectorised table per
    prefix of the leading ranks.
    """
    n = w.size
    k = min(n, _TAIL)
    tail_perms = np.array(list(itertools.permutations(range(k))), dtype=np.intp)
    total = float(w.sum())
    everything = set(range(n))
    for prefix in itertools.permutations(range(n), n - k):
        rest = np.array(sorted(everything.difference(prefix)), dtype=np.intp)
        tail_ell = reduced_loglik_rows(w, rest[tail_perms])
        head = 0.0
        remaining = total
        for i in prefix:
            head -= math.log(remaining)
            remaining -= w[i]
        yield head + tail_ell


def exact_pvalue(q: PreferenceLike, observed, exact_max_n: int = 10) -> TestResult:
    """Exact p-value by enumerating every ranking.

    Likelihoods within a relative ``1e-12`` of the observed one are ties and do
    not contribute.
    """
    w = as_weights(q)
    n = w.size
    if n > min(exact_max_n, EXACT_HARD_LIMIT):
        raise TooLargeForExact(f"n = {n} exceeds exact_max_n = {exact_max_n}")
    obs = _observed_ell(w, observed)
    log_norm = float(np.log(w).sum())
    lo = math.log1p(-EXACT_TIE_RTOL)
    hi = math.log1p(EXACT_TIE_RTOL)
    partial = []
    ties = greater = total_count = 0
    for ell in _enumerate_ells(w):
        d = ell - obs
        below = d < lo
        above = d > hi
        partial.append(float(np.exp(ell[below] + log_norm).sum()))
        greater += int(above.sum())
        ties += int(ell.size - below.sum() - above.sum())
        total_count += ell.size
    p = min(1.0, math.fsum(partial))
    return TestResult(
        observed_ell=obs,
        p_value=p,
        method="exact",
        replications_used=total_count,
        tie_count=ties,
        greater_count=greater,
        std_error=0.0,
        ci95=(p, p),
        surprisal=surprisal(p) if p > 0 else math.inf,
    )


def _binomial_ci(less: int, m: int) -> tuple[float, float, float]:
    p = less / m
    se = math.sqrt(p * (1 - p) / m)
    if less == 0:
        return se, 0.0, min(1.0, 3 / m)
    if less == m:
        return se, max(0.0, 1 - 3 / m), 1.0
    return se, max(0.0, p - 1.959963984540054 * se), min(1.0, p + 1.959963984540054 * se)


def mc_pvalue(
    q: PreferenceLike,
    observed,
    cfg: TestConfig = TestConfig(),
    threads: int | None = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> TestResult:
    """Monte Carlo p-value ``#{m : ell_m < ell_obs} / M``.

    Deterministic in ``(q, observed, cfg.replications, cfg.master_seed)``;
    ``threads`` and ``chunk_size`` only change speed.
    """
    w = as_weights(q)
    obs = _observed_ell(w, observed)
    log_q, key = np.log(w), philox_key(cfg.master_seed)

    def count(start, size):
        _, ell = _chunk(w, log_q, key, start, size)
        return int((ell < obs).sum()), int((ell == obs).sum())

    counts = map_chunks(count, cfg.replications, chunk_size, threads)
    less = sum(c[0] for c in counts)
    ties = sum(c[1] for c in counts)
    m = cfg.replications
    p = less / m
    se, lo, hi = _binomial_ci(less, m)
    return TestResult(
        observed_ell=obs,
        p_value=p,
        method="monte-carlo",
        replications_used=m,
        tie_count=ties,
        greater_count=m - less - ties,
        std_error=se,
        ci95=(lo, hi),
        surprisal=surprisal(p) if less else math.inf,
    )


def lr_test(q: PreferenceLike, observed, cfg: TestConfig = TestConfig(), threads: int | None = 1) -> TestResult:
    """Exact p-value when ``n <= cfg.exact_max_n``, Monte Carlo otherwise."""
    if as_weights(q).size <= cfg.exact_max_n:
        return exact_pvalue(q, observed, cfg.exact_max_n)
    return mc_pvalue(q, observed, cfg, threads=threads)
