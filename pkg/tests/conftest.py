"""Shared brute-force oracles.

These evaluate the ranking law as a direct product of selection probabilities,
one permutation at a time, without touching the package's vectorised code.
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest


def direct_likelihood(q, order):
    """prod_i q[order[i]] / sum_{j>=i} q[order[j]] as a float."""
    prob = 1.0
    remaining = list(order)
    for obj in order:
        prob *= q[obj] / sum(q[j] for j in remaining)
        remaining.remove(obj)
    return prob


def exact_likelihood(q, order):
    """Same product in exact rational arithmetic (integer or Fraction weights)."""
    prob = Fraction(1)
    tail = [Fraction(q[j]) for j in order]
    for i in range(len(order)):
        prob *= tail[i] / sum(tail[i:])
    return prob


def enumerate_law(q):
    """{permutation tuple: probability} over all n! orderings."""
    return {p: direct_likelihood(q, p) for p in itertools.permutations(range(len(q)))}


def brute_pvalue(q, observed, rtol=1e-12):
    law = enumerate_law(q)
    obs = direct_likelihood(q, tuple(observed))
    return sum(v for v in law.values() if v < obs * (1 - rtol))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and return the flag."""

    def record(criterion, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
