import collections
import itertools
import math

import numpy as np
import pytest
from scipy import stats

from conftest import enumerate_law
from permbias import RngStream, draw_keys, sample_batch, sample_permutation
from permbias.sampler import iter_batch, philox_key, to_unit, uniform_block


def roulette(q, rng):
    """Sequential draw without replacement, probability proportional to weight."""
    left = list(range(len(q)))
    out = []
    while left:
        w = np.array([q[i] for i in left], dtype=float)
        k = rng.choice(len(left), p=w / w.sum())
        out.append(left.pop(k))
    return tuple(out)


def perm_counts(perms):
    return collections.Counter(map(tuple, perms.tolist()))


def chi2_against_law(q, perms):
    law = enumerate_law(q)
    keys = sorted(law)
    counts = perm_counts(perms)
    f_obs = np.array([counts.get(k, 0) for k in keys], dtype=float)
    f_exp = np.array([law[k] for k in keys]) * len(perms)
    return stats.chisquare(f_obs, f_exp).pvalue


class TestRngStream:
    def test_same_stream_same_uniforms(self):
        a = RngStream(5, 17).uniforms(9)
        b = RngStream(5, 17).uniforms(9)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        assert not np.array_equal(RngStream(5, 17).uniforms(9), RngStream(5, 18).uniforms(9))
        assert not np.array_equal(RngStream(5, 17).uniforms(9), RngStream(6, 17).uniforms(9))

    def test_open_interval(self):
        u = uniform_block(philox_key(1), 0, 50_000, 7)
        assert u.min() > 0 and u.max() < 1
        assert abs(u.mean() - 0.5) < 0.005

    def test_endpoints_are_finite_keys(self):
        # the extreme raw words map strictly inside (0, 1)
        lo, hi = to_unit(np.array([0, 2**64 - 1], dtype=np.uint64))
        assert lo == 2.0**-53 and hi == 1 - 2.0**-53
        assert np.isfinite(np.log(-np.log([lo, hi]))).all()

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            RngStream(1, -1)


class TestDrawKeys:
    def test_key_formula(self):
        q = np.array([3.0, 1.0, 2.0, 0.5])
        rng = RngStream(11, 4)
        d = draw_keys(q, rng)
        u = rng.uniforms(4)
        assert np.allclose(d.keys, np.log(-np.log(u)) - np.log(q), rtol=0, atol=0)
        assert np.all(np.diff(d.keys[d.perm]) >= 0)

    def test_symmetric_pair(self):
        perms, _ = sample_batch([1, 1], 200_000, master_seed=3)
        frac = np.mean(perms[:, 0] == 0)
        assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 200_000)

    def test_first_rank_nine_to_one(self):
        perms, _ = sample_batch([9, 1], 200_000, master_seed=4)
        frac = np.mean(perms[:, 0] == 0)
        assert abs(frac - 0.9) < 4 * math.sqrt(0.09 / 200_000)

    def test_single_draws_match_batch_rows(self):
        q = [5, 3, 1, 1]
        perms, ells = sample_batch(q, 20, master_seed=99)
        for m in range(20):
            assert sample_permutation(q, RngStream(99, m)).tolist() == perms[m].tolist()


class TestLaw:
    def test_pair_closed_form(self):
        perms, _ = sample_batch([2, 1], 1_000_000, master_seed=8)
        p_hat = np.mean(perms[:, 0] == 0)
        assert abs(p_hat - 2 / 3) < 4 * math.sqrt((2 / 9) / 1_000_000)

    def test_uniform_four(self):
        perms, _ = sample_batch([1, 1, 1, 1], 240_000, master_seed=9)
        assert len(perm_counts(perms)) == 24
        assert chi2_against_law([1, 1, 1, 1], perms) > 1e-3

    @pytest.mark.parametrize("q", [(1, 2, 3), (5, 3, 1, 1)])
    def test_enumerated_law(self, q):
        perms, _ = sample_batch(q, 300_000, master_seed=10)
        assert chi2_against_law(q, perms) > 1e-3

    def test_agrees_with_roulette_oracle(self):
        q = (4, 2, 1)
        rng = np.random.default_rng(0)
        oracle = collections.Counter(roulette(q, rng) for _ in range(20_000))
        perms, _ = sample_batch(q, 20_000, master_seed=12)
        mine = perm_counts(perms)
        keys = sorted(set(oracle) | set(mine))
        table = np.array([[oracle.get(k, 0) for k in keys], [mine.get(k, 0) for k in keys]])
        assert stats.chi2_contingency(table).pvalue > 1e-3


class TestBatch:
    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            sample_batch([1, 2], 0, master_seed=1)

    def test_deterministic(self):
        a = sample_batch([1, 2, 3, 4], 5000, master_seed=1)
        b = sample_batch([1, 2, 3, 4], 5000, master_seed=1)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    @pytest.mark.parametrize("threads,chunk", [(1, 7), (4, 100), (16, 1000), (3, 5000)])
    def test_independent_of_parallelism(self, threads, chunk):
        ref = sample_batch([5, 3, 1, 1, 2], 5000, master_seed=21, threads=1)
        got = sample_batch([5, 3, 1, 1, 2], 5000, master_seed=21, threads=threads, chunk_size=chunk)
        assert np.array_equal(ref[0], got[0])
        assert ref[1].tobytes() == got[1].tobytes()

    def test_iter_batch_matches(self):
        perms, ells = sample_batch([2, 2, 1], 1000, master_seed=5)
        chunks = list(iter_batch([2, 2, 1], 1000, master_seed=5, chunk_size=300))
        assert [len(c[1]) for c in chunks] == [300, 300, 300, 100]
        assert np.array_equal(np.concatenate([c[0] for c in chunks]), perms)

    def test_ell_is_reduced_loglik_of_perm(self):
        from permbias import log_likelihood

        q = [5, 3, 1, 1]
        perms, ells = sample_batch(q, 50, master_seed=2)
        for p, e in zip(perms, ells):
            assert e == log_likelihood(q, p)

    def test_mean_likelihood_is_sum_of_squares(self):
        # E[L(q|Pi)] = sum_p L(q|p)^2, evaluated on n = 4 by enumeration
        q = np.array([5.0, 3.0, 1.0, 1.0])
        law = enumerate_law(q)
        expected = sum(v * v for v in law.values())
        second = sum(v**3 for v in law.values())
        m = 400_000
        _, ells = sample_batch(q, m, master_seed=6)
        values = np.exp(ells + np.log(q).sum())
        se = math.sqrt((second - expected**2) / m)
        assert abs(values.mean() - expected) < 4 * se

    def test_keys_finite_for_extreme_weights(self):
        q = [1e-300, 1e300, 1.0]
        perms, ells = sample_batch(q, 1000, master_seed=1)
        assert np.isfinite(ells).all()
        assert (perms[:, 0] == 1).all()
