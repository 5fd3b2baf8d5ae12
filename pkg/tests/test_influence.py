"""Influence of single bits on the stay-positive event."""

import math

import numpy as np
import pytest

from switchwalk import DyadicProb, exact


def test_influence_examples():
    assert exact.influence_exact(1, 1) == 1
    assert exact.influence_exact(2, 1) == DyadicProb(1, 1)
    assert exact.influence_exact(2, 2) == DyadicProb(1, 1)
    assert exact.influence_exact(4, 2) == DyadicProb(3, 3)
    assert exact.influence_exact(4, 3) == DyadicProb(1, 3)
    assert exact.influence_exact(4, 4) == DyadicProb(1, 3)


def test_oracle_examples():
    assert exact.influence_oracle(1, 1) == 1
    assert exact.influence_oracle(2, 1) == DyadicProb(1, 1)


def test_exact_equals_oracle_small():
    for n in range(1, 13):
        for m in range(1, n + 1):
            assert exact.influence_exact(n, m) == exact.influence_oracle(n, m), (n, m)


def test_profile_matches_pointwise():
    for n in (1, 2, 3, 5, 8, 13, 40):
        prof = exact.influence_profile_exact(n)
        assert len(prof) == n
        for m in range(1, n + 1):
            assert prof[m - 1] == exact.influence_exact(n, m)


def test_first_influence_identity():
    for n in (1, 2, 3, 10, 100, 777, 2048):
        assert exact.influence_exact(n, 1) == exact.stay_positive_prob(n) * 2


def test_last_influence_parity():
    # for odd n the endpoint Z_n is even, so flipping the last bit can never
    # cross zero: bit n is pivotal only when Z_{n-1} = 1 wins/loses by parity
    for n in (3, 5, 7, 9, 11):
        assert exact.influence_exact(n, n) == 0
    for n in (2, 4, 6, 8):
        assert exact.influence_exact(n, n) > 0


def test_terms_invariants():
    for n in (2, 3, 8, 33, 64):
        for m in range(2, n + 1, max(1, n // 7)):
            terms = exact.influence_terms(n, m)
            total = DyadicProb.zero()
            for t in terms:
                assert t.p_strip <= t.p_window
                assert t.contribution >= 0
                assert t.contribution == t.ballot_weight * (t.p_window - t.p_strip)
                total = total + t.contribution
            assert total * 2 == exact.influence_exact(n, m)
    assert exact.influence_terms(5, 1) == []


def test_oracle_budget():
    with pytest.raises(ValueError):
        exact.influence_oracle(21, 1)


def test_float_profile_accuracy():
    n = 128
    prof_f = exact.influence_profile_float(n)
    prof_e = exact.influence_profile_exact(n)
    rel = np.array(
        [abs(prof_f[m] - float(prof_e[m])) / float(prof_e[m]) for m in range(n)]
    )
    assert rel.max() < 1e-9


def test_float_profile_odd_n_zero_tail():
    prof = exact.influence_profile_float(9)
    assert prof[-1] == 0.0


def test_influence_ratio_band_small():
    n = 256
    prof = exact.influence_profile_float(n)
    ratios = [prof[m - 1] * n**1.5 / (n - m + 1) for m in range(1, n + 1)]
    assert max(ratios) / min(ratios) <= 20.0
