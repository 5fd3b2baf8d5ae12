"""Exact dyadic probabilities for static walk events, vs brute-force oracles."""

import itertools
import math

import pytest

from switchwalk import DyadicProb, exact


def all_strings(n):
    return itertools.product((-1, 1), repeat=n)


def switch_positions(bits):
    pos, s, acc = [], 1, 0
    for b in bits:
        s *= b
        acc += s
        pos.append(acc)
    return pos


# -- position law ----------------------------------------------------------------


def test_position_prob_examples():
    assert exact.position_prob(1, 1) == DyadicProb(1, 1)
    assert exact.position_prob(2, 0) == DyadicProb(1, 1)
    assert exact.position_prob(2, 1) == 0
    assert exact.position_prob(0, 0) == 1
    assert exact.position_prob(5, 9) == 0


def test_position_dist_invariants():
    for j in (0, 1, 2, 3, 8, 21, 40):
        dist = exact.position_dist(j)
        assert sum(dist.probs.values(), DyadicProb.zero()) == 1
        for z, p in dist.probs.items():
            assert (z - j) % 2 == 0
            assert dist.probs[-z] == p
            assert 0 <= p <= 1


def test_position_prob_matches_enumeration():
    for j in range(0, 9):
        counts = {}
        for bits in all_strings(j):
            z = switch_positions(bits)[-1] if j else 0
            counts[z] = counts.get(z, 0) + 1
        for z in range(-j - 1, j + 2):
            assert exact.position_prob(j, z) == DyadicProb(counts.get(z, 0), j)


# -- stay-positive and barrier events ----------------------------------------------


def test_stay_positive_examples():
    assert exact.stay_positive_prob(1) == DyadicProb(1, 1)
    assert exact.stay_positive_prob(2) == DyadicProb(1, 2)
    assert exact.stay_positive_prob(4) == DyadicProb(3, 4)


def test_stay_positive_matches_enumeration():
    for n in range(1, 13):
        hits = sum(
            all(z >= 1 for z in switch_positions(bits)) for bits in all_strings(n)
        )
        assert exact.stay_positive_prob(n) == DyadicProb(hits, n)


def test_stay_positive_scaling_band():
    vals = {n: float(exact.stay_positive_prob(n)) for n in (256, 512, 1024, 2048, 4096)}
    for n, v in vals.items():
        assert 0.39 <= v * math.sqrt(n) <= 0.41
    for n in (256, 512, 1024, 2048):
        ratio = (vals[2 * n] * math.sqrt(2 * n)) / (vals[n] * math.sqrt(n))
        assert 0.95 <= ratio <= 1.05


def test_barrier_prob_alpha_zero_reduces():
    for n in range(1, 65):
        assert exact.barrier_positive_prob(n, 0.0) == exact.stay_positive_prob(n)


def test_barrier_prob_example_3_half():
    # barrier 1,2,2: only (+1,+1,+1) -> (1,2,3) stays on it; (+1,+1,-1) ends at 2
    # but (1,2,3) vs floor (1,2,2): (+1,+1,-1) gives (1,2,1) < 2 at i=3
    assert exact.barrier_positive_prob(3, 0.5) == DyadicProb(1, 3)


def test_barrier_prob_matches_enumeration():
    from switchwalk.walks import barrier_levels

    for alpha in (0.3, 0.5, 0.7):
        for n in range(1, 11):
            levels = barrier_levels(n, alpha)
            hits = sum(
                all(z >= b for z, b in zip(switch_positions(bits), levels))
                for bits in all_strings(n)
            )
            assert exact.barrier_positive_prob(n, alpha) == DyadicProb(hits, n)


def test_barrier_quarter_ratio_band():
    scaled = [
        float(exact.barrier_positive_prob(n, 0.25)) * math.sqrt(n)
        for n in (64, 128, 256, 512, 1024, 2048, 4096)
    ]
    assert max(scaled) / min(scaled) <= 4.0


# -- reflection, ballot, strip -------------------------------------------------------


def test_reflection_pair_examples():
    assert exact.reflection_pair(1, 1) == (DyadicProb(1, 1), DyadicProb(1, 1))
    a, b = exact.reflection_pair(2, 3)
    assert a == b
    a, b = exact.reflection_pair(2, 2)
    assert a == b == DyadicProb(3, 2)


def test_reflection_pair_equality_sweep():
    for z in range(1, 31):
        for j in range(1, 31):
            a, b = exact.reflection_pair(z, j)
            assert a == b, (z, j)


def test_ballot_examples():
    assert exact.ballot_prob(1, 1) == DyadicProb(1, 1)
    assert exact.ballot_prob(3, 1) == DyadicProb(1, 3)
    assert exact.ballot_prob(3, 2) == 0  # parity mismatch


def test_ballot_matches_dp():
    for j in range(1, 17):
        for z in range(1, j + 1):
            if (j + z) % 2 == 0:
                assert exact.ballot_prob(j, z) == exact.stay_positive_endpoint_dp(
                    j, z
                ), (j, z)


def test_ballot_matches_enumeration():
    for j in range(1, 11):
        for z in range(1, j + 1, 1):
            if (j + z) % 2:
                continue
            hits = sum(
                all(p > 0 for p in pos) and pos[-1] == z
                for bits in all_strings(j)
                for pos in [switch_positions(bits)]
            )
            assert exact.ballot_prob(j, z) == DyadicProb(hits, j)


def test_strip_examples():
    assert exact.strip_stay_prob(5, 0) == 1
    assert exact.strip_stay_prob(1, 1) == 0
    assert exact.strip_stay_prob(2, 2) == DyadicProb(1, 1)


def test_strip_series_equals_dp():
    for z in range(1, 9):
        for N in range(0, 65):
            assert exact.strip_stay_prob(z, N) == exact.strip_stay_prob_dp(z, N), (
                z,
                N,
            )


def test_strip_start_variants_match_dp():
    for z in range(1, 7):
        for N in range(0, 33):
            for start in range(1, 2 * z):
                assert exact.strip_stay_prob(z, N, start) == exact.strip_stay_prob_dp(
                    z, N, start
                ), (z, N, start)


def test_strip_monotone_in_start():
    for z in range(2, 9):
        for k in range(0, 33):
            for x in range(1, z):
                assert exact.strip_stay_prob(z, k, x) <= exact.strip_stay_prob(
                    z, k, x + 1
                ), (z, k, x)


def test_strip_matches_enumeration():
    for z in range(1, 5):
        for N in range(0, 9):
            hits = sum(
                all(0 < z + p < 2 * z for p in switch_positions(bits))
                for bits in all_strings(N)
            )
            assert exact.strip_stay_prob(z, N) == DyadicProb(hits, N)


# -- tails ---------------------------------------------------------------------------


def test_tail_examples():
    assert exact.tail_prob(1, 2) == 0
    assert exact.tail_prob(4, 4) == DyadicProb(1, 4)
    assert exact.tail_prob(2, 0) == DyadicProb(3, 2)
    assert exact.tail_prob(3, -3) == 1
    assert exact.tail_prob(3, -5) == 1


def test_tail_matches_enumeration():
    for j in range(1, 10):
        for x in range(-j - 1, j + 2):
            hits = sum(switch_positions(bits)[-1] >= x for bits in all_strings(j))
            assert exact.tail_prob(j, x) == DyadicProb(hits, j)


def test_chernoff_examples():
    assert exact.chernoff_holds(1, 2)
    assert exact.chernoff_holds(4, 4)
    assert float(exact.tail_prob(4, 4)) <= math.exp(-2.0)


def test_chernoff_sweep():
    for j in range(2, 129):
        for x in range(1, j + 1):
            assert exact.chernoff_holds(j, x), (j, x)


# -- local CLT band --------------------------------------------------------------------


def test_local_clt_band():
    for j in (64, 256):
        zmax = int(j**0.75)
        for z in range(-zmax, zmax + 1):
            if (z - j) % 2:
                continue
            val = float(exact.position_prob(j, z)) * math.sqrt(j) * math.exp(
                z * z / (2.0 * j)
            )
            assert 0.5 <= val <= 1.0, (j, z, val)


def test_validation_errors():
    with pytest.raises(ValueError):
        exact.position_prob(-1, 0)
    with pytest.raises(ValueError):
        exact.stay_positive_prob(0)
    with pytest.raises(ValueError):
        exact.barrier_positive_prob(3, 1.0)
    assert exact.ballot_prob(3, 0) == 0  # impossible endpoint, not an error
    assert exact.ballot_prob(3, 5) == 0
    with pytest.raises(ValueError):
        exact.ballot_prob(0, 1)
    with pytest.raises(ValueError):
        exact.strip_stay_prob(0, 4)
    with pytest.raises(ValueError):
        exact.strip_stay_prob(2, 4, start=4)  # start must lie inside (0, 2z)
    with pytest.raises(ValueError):
        exact.tail_prob(0, 0)
