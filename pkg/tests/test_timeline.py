"""Kernel backend equivalence: pure NumPy lane vs compiled lane."""

import numpy as np
import pytest

import switchwalk._pure as pure
from switchwalk.walks import barrier_levels

comp = pytest.importorskip(
    "switchwalk._ckern", reason="compiled kernel extension not built"
)


def test_backend_registry():
    from switchwalk._backend import available_backends

    assert "pure" in available_backends()
    assert "compiled" in available_backends()


def test_timeline_segments_equal():
    rng = np.random.default_rng(2024)
    for _ in range(150):
        n = int(rng.integers(1, 150))
        alpha = float(rng.choice([0.0, 0.25, 0.5]))
        b = barrier_levels(n, alpha)
        init = (1 - 2 * rng.integers(0, 2, size=n)).astype(np.int8)
        ne = int(rng.integers(0, 60))
        t = np.sort(rng.random(ne))
        bit = rng.integers(0, n, size=ne).astype(np.int64)
        val = (1 - 2 * rng.integers(0, 2, size=ne)).astype(np.int8)
        tp, sp = pure.timeline_segments(b, init, t, bit, val)
        tc, sc = comp.timeline_segments(b, init, t, bit, val)
        assert np.array_equal(sp, sc)
        assert np.array_equal(tp, tc)


def test_timeline_stats_bitwise_equal():
    rng = np.random.default_rng(99)
    for _ in range(25):
        trials = int(rng.integers(1, 12))
        n = int(rng.integers(1, 100))
        gamma = float(rng.choice([-1.0, 0.0, 0.3, 0.6]))
        b = barrier_levels(n, float(rng.choice([0.0, 0.25])))
        init = (1 - 2 * rng.integers(0, 2, size=(trials, n))).astype(np.int8)
        per = rng.poisson(n * 0.7, size=trials)
        off = np.zeros(trials + 1, dtype=np.int64)
        np.cumsum(per, out=off[1:])
        tot = int(off[-1])
        times = (
            np.concatenate([np.sort(rng.random(int(k))) for k in per])
            if tot
            else np.empty(0)
        )
        bit = rng.integers(0, n, size=tot).astype(np.int64)
        val = (1 - 2 * rng.integers(0, 2, size=tot)).astype(np.int8)
        kp, pp = pure.timeline_stats_chunk(b, init, off, times, bit, val, gamma)
        kc, pc = comp.timeline_stats_chunk(b, init, off, times, bit, val, gamma)
        # float reductions must agree to the last bit, not within tolerance
        assert np.array_equal(kp, kc)
        assert np.array_equal(pp, pc)


def test_ns_endpoints_equal():
    rng = np.random.default_rng(7)
    for n in (1, 2, 63, 64, 65, 127, 129, 700):
        for kind in (0, 1):
            trials = 48
            words = rng.integers(
                0, 1 << 64, size=(trials, (n + 63) // 64), dtype=np.uint64
            )
            for density in (0.0, 0.07, 1.0):
                keep = rng.random((trials, n)) < density
                off = np.zeros(trials + 1, dtype=np.int64)
                np.cumsum(keep.sum(axis=1), out=off[1:])
                flat = np.tile(np.arange(1, n + 1), (trials, 1))[keep].astype(np.int64)
                rp = pure.ns_endpoints_chunk(n, words, flat, off, kind)
                rc = comp.ns_endpoints_chunk(n, words, flat, off, kind)
                assert np.array_equal(rp[0], rc[0])
                assert np.array_equal(rp[1], rc[1])


def test_uv_captures_equal():
    rng = np.random.default_rng(13)
    for rep in range(120):
        trials = int(rng.integers(1, 10))
        K = 2 * int(rng.integers(1, 8))
        ipos = np.cumsum(
            rng.geometric(float(rng.uniform(0.03, 0.9)), size=(trials, K)), axis=1
        )
        if rep % 3 == 0:
            ipos[0] = np.arange(1, K + 1)  # first change at position 1
        if rep % 4 == 0:
            ipos[-1] = 64 * np.arange(1, K + 1)  # captures on word boundaries
        width = (int(ipos[:, -1].max()) + 63) // 64
        words = rng.integers(0, 1 << 64, size=(trials, width), dtype=np.uint64)
        rp = pure.uv_captures_chunk(ipos, words)
        rc = comp.uv_captures_chunk(ipos, words)
        for a, b in zip(rp, rc):
            assert np.array_equal(a, b)


def test_uv_captures_against_direct_walk():
    rng = np.random.default_rng(55)
    for _ in range(60):
        K = 2 * int(rng.integers(1, 6))
        ipos = np.cumsum(rng.geometric(0.2, size=(1, K)), axis=1)
        L = int(ipos[0, -1])
        width = (L + 63) // 64
        words = rng.integers(0, 1 << 64, size=(1, width), dtype=np.uint64)
        bits01 = np.unpackbits(words.view(np.uint8), bitorder="little")[:L]
        bits = (1 - 2 * bits01.astype(np.int64)).tolist()
        from switchwalk import switch_walk

        z0 = switch_walk(bits).positions
        flipped = list(bits)
        for p in ipos[0]:
            flipped[p - 1] = -flipped[p - 1]
        zt = switch_walk(flipped).positions
        C, a0, at = comp.uv_captures_chunk(ipos, words)
        assert a0[0] == z0[L]
        assert at[0] == zt[L]
        for k in range(K):
            assert C[0, k] == z0[ipos[0, k] - 1]


def test_pure_env_override():
    import subprocess
    import sys

    code = "from switchwalk._backend import BACKEND_NAME; print(BACKEND_NAME)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/usr/local/bin", "SWITCHWALK_PURE": "1"},
    )
    assert out.stdout.strip() == "pure"
