"""Poisson-rerandomized dynamics: clocks, couplings, periods, W, timelines."""

import math

import numpy as np
import pytest
from scipy import stats

from switchwalk import (
    ClockSet,
    PositivityTimeline,
    bits_at,
    decompose_periods,
    kappa_measure,
    mirror_residual,
    naive_timeline,
    pair_energy,
    positivity_timeline,
    sample_clocks,
    switch_walk,
    timeline_trace,
    two_time_sample,
    uv_decomposition,
    w_path,
)
from switchwalk.dynamics import TwoTimeCoupling
from switchwalk.exact import stay_positive_prob


def hand_coupling():
    """bits0 all +1, changes at {2, 4}, n = 5."""
    bits0 = np.ones(5, dtype=np.int8)
    bits_t = bits0.copy()
    bits_t[[1, 3]] = -1
    return TwoTimeCoupling(
        n=5, t=0.3, bits0=bits0, bits_t=bits_t, changes=np.array([2, 4])
    )


# -- clock sets ------------------------------------------------------------------


def test_sample_clocks_empty_horizon():
    clocks = sample_clocks(5, 0.0, 1)
    assert clocks.times.size == 0
    assert clocks.initial.shape == (5,)


def test_sample_clocks_deterministic():
    a = sample_clocks(9, 2.0, 123)
    b = sample_clocks(9, 2.0, 123)
    assert np.array_equal(a.initial, b.initial)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.bits, b.bits)
    assert np.array_equal(a.values, b.values)
    c = sample_clocks(9, 2.0, 124)
    assert not np.array_equal(a.times, c.times)


def test_sample_clocks_structure():
    clocks = sample_clocks(12, 3.0, 7)
    assert np.all(np.diff(clocks.times) >= 0)
    assert np.all((clocks.times > 0) & (clocks.times <= 3.0))
    assert set(np.unique(clocks.bits)) <= set(range(1, 13))
    assert set(np.unique(clocks.values)) <= {-1, 1}
    for j in (1, 5, 12):
        tj, vj = clocks.events_for_bit(j)
        assert np.all(np.diff(tj) > 0)
        assert tj.size == vj.size
    with pytest.raises(ValueError):
        clocks.events_for_bit(13)


def test_sample_clocks_mean_event_count():
    n, T, seeds = 20, 1.0, 2000
    total = sum(sample_clocks(n, T, 10_000 + s).times.size for s in range(seeds))
    mean = total / seeds
    se = math.sqrt(n * T / seeds)  # Poisson variance = mean
    assert abs(mean - n * T) <= 3 * se


def test_bits_at_epoch_and_steps():
    clocks = sample_clocks(8, 1.5, 42)
    assert np.array_equal(bits_at(clocks, 0.0), clocks.initial)
    # constant between consecutive events of each bit
    t_all = np.concatenate(([0.0], clocks.times, [1.5]))
    for k in range(t_all.size - 1):
        lo, hi = t_all[k], t_all[k + 1]
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        assert np.array_equal(bits_at(clocks, mid), bits_at(clocks, hi - 1e-12))
    with pytest.raises(ValueError):
        bits_at(clocks, 2.0)


def test_bits_at_follows_events():
    initial = np.array([1, -1], dtype=np.int8)
    clocks = ClockSet(
        n=2,
        horizon=1.0,
        initial=initial,
        times=np.array([0.25, 0.5, 0.75]),
        bits=np.array([1, 1, 2], dtype=np.int32),
        values=np.array([-1, 1, 1], dtype=np.int8),
    )
    assert bits_at(clocks, 0.1).tolist() == [1, -1]
    assert bits_at(clocks, 0.3).tolist() == [-1, -1]
    assert bits_at(clocks, 0.6).tolist() == [1, -1]
    assert bits_at(clocks, 1.0).tolist() == [1, 1]


def test_stationarity_chi_square():
    # marginal of bits_at(t) must be n fair signs; chi-square over seeds
    n, seeds, t = 5, 100_000, 0.6
    plus = np.zeros(n, dtype=np.int64)
    for s in range(seeds):
        plus += bits_at(sample_clocks(n, 1.0, 90_000_000 + s), t) > 0
    chi2 = float(np.sum((plus - seeds / 2.0) ** 2) / (seeds / 4.0))
    p = stats.chi2.sf(chi2, df=n)
    assert p > 1e-6, (plus, p)


# -- two-time couplings ---------------------------------------------------------------


def test_two_time_zero_gap():
    c = two_time_sample(50, 0.0, 3)
    assert np.array_equal(c.bits0, c.bits_t)
    assert c.changes.size == 0


def test_two_time_flip_frequency():
    for t in (0.1, 0.5, 1.0):
        c = two_time_sample(100_000, t, 17)
        p = 0.5 * (1.0 - math.exp(-t))
        se = math.sqrt(p * (1 - p) / c.n)
        assert abs(c.changes.size / c.n - p) <= 3 * se, t


def test_two_time_large_t_limit():
    c = two_time_sample(100_000, 50.0, 5)
    freq = c.changes.size / c.n
    assert abs(freq - 0.5) <= 3 * math.sqrt(0.25 / c.n)


def test_coupling_change_set_enforced():
    bits0 = np.ones(4, dtype=np.int8)
    bits_t = bits0.copy()
    bits_t[2] = -1
    with pytest.raises(ValueError):
        TwoTimeCoupling(n=4, t=0.1, bits0=bits0, bits_t=bits_t, changes=np.array([1]))


# -- period decompositions --------------------------------------------------------------


def test_decompose_examples():
    c = two_time_sample(10, 0.0, 1)
    d = decompose_periods(c)
    assert d.I.tolist() == [0]
    assert d.count == 0

    bits0 = np.ones(10, dtype=np.int8)
    bits_t = bits0.copy()
    bits_t[[2, 6]] = -1
    c = TwoTimeCoupling(
        n=10, t=0.2, bits0=bits0, bits_t=bits_t, changes=np.array([3, 7])
    )
    d = decompose_periods(c)
    assert d.I.tolist() == [0, 3, 7]
    assert d.J.tolist() == [3, 4]
    assert d.count == 2


def test_gap_mean_matches_geometric():
    t = 0.5
    c = two_time_sample(1_000_000, t, 23)
    J = decompose_periods(c).J
    p = 0.5 * (1.0 - math.exp(-t))
    mean, target = float(J.mean()), 1.0 / p
    se = float(J.std(ddof=1)) / math.sqrt(J.size)
    assert abs(mean - target) <= 3 * se + 1e-3


# -- mirror law, U/V, W ------------------------------------------------------------------


def test_mirror_hand_instance():
    c = hand_coupling()
    assert mirror_residual(c) == 0
    assert switch_walk(c.bits_t).positions.tolist() == [0, 1, 0, -1, 0, 1]


def test_mirror_random_couplings():
    for s in range(200):
        c = two_time_sample(500, 0.15, 1000 + s)
        assert mirror_residual(c) == 0


def test_uv_hand_instance():
    c = hand_coupling()
    u, v = uv_decomposition(c, 2)
    assert (u, v) == (2, 2)
    z0 = switch_walk(c.bits0).positions
    zt = switch_walk(c.bits_t).positions
    assert u + v == z0[4] == 4
    assert u - v == zt[4] == 0


def test_uv_validation():
    c = two_time_sample(100, 0.0, 1)  # no changes
    with pytest.raises(ValueError):
        uv_decomposition(c, 2)
    c = hand_coupling()
    with pytest.raises(ValueError):
        uv_decomposition(c, 3)
    with pytest.raises(ValueError):
        uv_decomposition(c, 4)  # only 2 changes available


def test_uv_identities_random():
    for s in range(100):
        c = two_time_sample(2000, 0.2, 500 + s)
        K = 2 * (c.changes.size // 2)
        if K < 2:
            continue
        u, v = uv_decomposition(c, K)
        last = int(c.changes[K - 1])
        assert u + v == switch_walk(c.bits0[:last]).positions[last]
        assert u - v == switch_walk(c.bits_t[:last]).positions[last]


def test_w_path_hand_instance():
    c = hand_coupling()
    assert w_path(c).tolist() == [0, 1, 1, 1, 2, 3]


def test_w_path_no_changes():
    c = two_time_sample(30, 0.0, 9)
    assert np.array_equal(w_path(c), switch_walk(c.bits0).positions)


def test_w_path_even_period_structure():
    # dW_i = S_i(0) while an even number of bits <= i have changed, else 0
    for s in range(100):
        c = two_time_sample(400, 0.1, 7000 + s)
        W = w_path(c)
        dW = np.diff(W)
        steps0 = np.diff(switch_walk(c.bits0).positions)
        ind = np.zeros(c.n, dtype=np.int64)
        ind[c.changes - 1] = 1
        parity = np.cumsum(ind) % 2
        assert np.all(dW[parity == 1] == 0)
        assert np.array_equal(dW[parity == 0], steps0[parity == 0])


# -- timelines ---------------------------------------------------------------------------


def test_timeline_no_events():
    clocks = ClockSet(
        n=3,
        horizon=1.0,
        initial=np.array([1, 1, 1], dtype=np.int8),
        times=np.empty(0),
        bits=np.empty(0, dtype=np.int32),
        values=np.empty(0, dtype=np.int8),
    )
    tl = positivity_timeline(clocks)
    assert tl.breakpoints.tolist() == [0.0, 1.0]
    assert tl.status.tolist() == [True]
    assert kappa_measure(tl) == 1.0


def test_timeline_matches_naive():
    rng = np.random.default_rng(31337)
    for _ in range(120):
        n = int(rng.integers(1, 65))
        clocks = sample_clocks(n, 1.0, rng.integers(1 << 32))
        for alpha in (0.0, 0.25):
            fast = positivity_timeline(clocks, alpha=alpha)
            slow = naive_timeline(clocks, alpha=alpha)
            assert np.array_equal(fast.breakpoints, slow.breakpoints)
            assert np.array_equal(fast.status, slow.status)


def test_timeline_subset_n():
    clocks = sample_clocks(50, 1.0, 8)
    tl = positivity_timeline(clocks, n=10)
    assert tl.n == 10
    ev = np.count_nonzero((clocks.bits <= 10) & (clocks.times <= 1.0))
    assert tl.status.size == ev + 1


def test_timeline_horizon_validation():
    clocks = sample_clocks(4, 0.5, 1)
    with pytest.raises(ValueError):
        positivity_timeline(clocks)
    with pytest.raises(ValueError):
        positivity_timeline(sample_clocks(4, 1.0, 1), alpha=1.0)
    with pytest.raises(ValueError):
        positivity_timeline(sample_clocks(4, 1.0, 1), n=5)


def test_same_value_events_are_noops():
    initial = np.array([1, 1], dtype=np.int8)
    clocks = ClockSet(
        n=2,
        horizon=1.0,
        initial=initial,
        times=np.array([0.4, 0.8]),
        bits=np.array([2, 2], dtype=np.int32),
        values=np.array([1, -1], dtype=np.int8),  # first redraws same value
    )
    tl = positivity_timeline(clocks)
    assert tl.breakpoints.tolist() == [0.0, 0.4, 0.8, 1.0]
    assert tl.status.tolist() == [True, True, False]
    assert kappa_measure(tl) == pytest.approx(0.8)


def test_timeline_trace_fields():
    clocks = sample_clocks(6, 1.0, 77)
    rows = timeline_trace(clocks)
    assert len(rows) == np.count_nonzero(clocks.times <= 1.0)
    for e, row in enumerate(rows):
        assert set(row) == {"event_index", "time", "bit", "new_value", "status_after"}
        assert row["event_index"] == e + 1
        assert 1 <= row["bit"] <= 6
        assert row["new_value"] in (-1, 1)
        assert row["status_after"] in (0, 1)


def test_kappa_mean_unbiased_small():
    n, trials = 16, 4000
    acc = 0.0
    vals = []
    for s in range(trials):
        tl = positivity_timeline(sample_clocks(n, 1.0, 40_000_000 + s))
        vals.append(kappa_measure(tl))
    vals = np.array(vals)
    target = float(stay_positive_prob(n))
    se = vals.std(ddof=1) / math.sqrt(trials)
    assert abs(vals.mean() - target) <= 3 * se


# -- measures and energies ----------------------------------------------------------------


def _manual_timeline(breaks, status):
    return PositivityTimeline(
        n=1,
        alpha=0.0,
        breakpoints=np.asarray(breaks, dtype=np.float64),
        status=np.asarray(status, dtype=bool),
    )


def test_kappa_measure_examples():
    assert kappa_measure(_manual_timeline([0, 1], [True])) == 1.0
    assert kappa_measure(_manual_timeline([0, 1], [False])) == 0.0
    tl = _manual_timeline([0, 0.25, 0.75, 1], [True, False, True])
    assert kappa_measure(tl) == pytest.approx(0.5)


def test_pair_energy_examples():
    full = _manual_timeline([0, 1], [True])
    assert pair_energy(full, 0.0) == pytest.approx(1.0)
    assert pair_energy(full, 0.5) == pytest.approx(8.0 / 3.0)
    split = _manual_timeline([0, 0.5, 1], [True, True])
    for g in (0.0, 0.25, 0.5, 0.75):
        assert pair_energy(split, g) == pytest.approx(pair_energy(full, g), rel=1e-12)
    with pytest.raises(ValueError):
        pair_energy(full, 1.0)


def test_pair_energy_gamma_zero_is_kappa_squared():
    rng = np.random.default_rng(5)
    for _ in range(50):
        clocks = sample_clocks(12, 1.0, rng.integers(1 << 32))
        tl = positivity_timeline(clocks)
        assert pair_energy(tl, 0.0) == pytest.approx(kappa_measure(tl) ** 2, abs=1e-12)


def test_pair_energy_matches_quadrature():
    # midpoint Riemann oracle on a fixed two-segment timeline
    tl = _manual_timeline([0, 0.3, 0.55, 0.8, 1], [True, False, True, False])
    gamma = 0.5
    segs = tl.true_segments()
    grid = 20000
    ts = (np.arange(grid) + 0.5) / grid
    ind = np.zeros(grid, dtype=bool)
    for a, b in segs:
        ind |= (ts >= a) & (ts < b)
    pts = ts[ind]
    diffs = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(diffs, 1.0)
    # diagonal self-cells omitted: their total is O(grid^(gamma-1)), inside rel tol
    est = (diffs**-gamma).sum() / grid**2
    assert pair_energy(tl, gamma) == pytest.approx(est, rel=2e-2)
