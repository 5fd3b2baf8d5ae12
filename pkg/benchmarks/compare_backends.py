"""Timing comparison of the pure-NumPy and compiled kernel lanes.

Runs the three kernel families on identical inputs, checks the outputs
agree, and prints wall times plus the compiled-lane speedup.

    python3 benchmarks/compare_backends.py [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

import switchwalk._pure as pure
from switchwalk.walks import barrier_levels

try:
    import switchwalk._ckern as comp
except ImportError:
    comp = None


def _timeline_inputs(rng, trials=64, n=256):
    barrier = barrier_levels(n, 0.25)
    init = (1 - 2 * rng.integers(0, 2, size=(trials, n))).astype(np.int8)
    per = rng.poisson(n, size=trials)
    off = np.zeros(trials + 1, dtype=np.int64)
    np.cumsum(per, out=off[1:])
    total = int(off[-1])
    times = np.concatenate([np.sort(rng.random(int(k))) for k in per])
    bits = rng.integers(0, n, size=total).astype(np.int64)
    vals = (1 - 2 * rng.integers(0, 2, size=total)).astype(np.int8)
    return barrier, init, off, times, bits, vals, 0.25


def _ns_inputs(rng, trials=4096, n=10_000, eps=0.01):
    words = rng.integers(0, 1 << 64, size=(trials, (n + 63) // 64), dtype=np.uint64)
    p = 0.5 * -math.expm1(-eps)
    keep = rng.random((trials, n)) < p
    off = np.zeros(trials + 1, dtype=np.int64)
    np.cumsum(keep.sum(axis=1), out=off[1:])
    flat = np.tile(np.arange(1, n + 1), (trials, 1))[keep].astype(np.int64)
    return n, words, flat, off, 0


def _uv_inputs(rng, trials=512, n=10_000, eps=0.05):
    p = 0.5 * -math.expm1(-eps)
    K = 2 * int(n * (2 * p) / 4)
    ipos = np.cumsum(rng.geometric(p, size=(trials, K)), axis=1)
    width = (int(ipos[:, -1].max()) + 63) // 64
    words = rng.integers(0, 1 << 64, size=(trials, width), dtype=np.uint64)
    return ipos, words


def _bench(name, fn_pure, fn_comp, args, repeat):
    def best(fn):
        out, t = None, float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = fn(*args)
            t = min(t, time.perf_counter() - t0)
        return out, t

    rp, tp = best(fn_pure)
    if fn_comp is None:
        print(f"{name:24s} pure {tp * 1e3:9.2f} ms   (compiled lane unavailable)")
        return
    rc, tc = best(fn_comp)
    for a, b in zip(rp if isinstance(rp, tuple) else (rp,),
                    rc if isinstance(rc, tuple) else (rc,)):
        assert np.array_equal(a, b), f"{name}: backends disagree"
    print(f"{name:24s} pure {tp * 1e3:9.2f} ms   compiled {tc * 1e3:9.2f} ms"
          f"   speedup {tp / tc:7.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    opts = ap.parse_args()
    rng = np.random.default_rng(4242)

    jobs = [
        ("timeline_stats_chunk", _timeline_inputs(rng)),
        ("ns_endpoints_chunk", _ns_inputs(rng)),
        ("uv_captures_chunk", _uv_inputs(rng)),
    ]
    for name, args in jobs:
        _bench(
            name,
            getattr(pure, name),
            getattr(comp, name) if comp else None,
            args,
            opts.repeat,
        )


if __name__ == "__main__":
    main()
