"""Pure NumPy/Python kernels.

Reference implementations of everything the compiled extension provides;
selected automatically when the extension is unavailable (or when
``SWITCHWALK_PURE=1``).  Both backends must agree bit-for-bit on integer
outputs and op-for-op on float reductions, so keep the arithmetic order
identical when touching either side.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "pure"


# -- segment tree over the switch path ----------------------------------------
#
# Leaf i stores the pair (Z_{i+1} - b_{i+1}, Z_{i+1} + b_{i+1}); internal
# nodes keep min of the first and max of the second.  A rerandomized bit j
# reflects the whole suffix Z_i -> c - Z_i (c = 2*Z_{j-1}) for i >= j, which
# is the lazy transform x -> sgn*x + off with sgn = -1.  Under x -> c - x the
# pair maps to (c - max(Z+b), c - min(Z-b)), so min/max swap roles and the
# barrier offsets stay attached to the right side.


class ReflectTree:
    """Switch-path positions with O(log n) point query / suffix reflection /
    min-slack, under lazy sign-and-offset transforms."""

    __slots__ = ("n", "mn", "mx", "sg", "off")

    def __init__(self, z, barrier):
        n = len(z)
        if n == 0:
            raise ValueError("empty tree")
        self.n = n
        self.mn = [0] * (4 * n)
        self.mx = [0] * (4 * n)
        self.sg = [1] * (4 * n)
        self.off = [0] * (4 * n)
        self._build(1, 0, n - 1, z, barrier)

    def _build(self, v, lo, hi, z, b):
        if lo == hi:
            self.mn[v] = int(z[lo]) - int(b[lo])
            self.mx[v] = int(z[lo]) + int(b[lo])
            return
        mid = (lo + hi) // 2
        self._build(2 * v, lo, mid, z, b)
        self._build(2 * v + 1, mid + 1, hi, z, b)
        self.mn[v] = min(self.mn[2 * v], self.mn[2 * v + 1])
        self.mx[v] = max(self.mx[2 * v], self.mx[2 * v + 1])

    def _apply(self, v, s, c):
        if s == 1:
            self.mn[v] += c
            self.mx[v] += c
        else:
            self.mn[v], self.mx[v] = c - self.mx[v], c - self.mn[v]
        # compose: new transform runs after the pending one
        self.off[v] = s * self.off[v] + c
        self.sg[v] *= s

    def _push(self, v):
        s, c = self.sg[v], self.off[v]
        if s != 1 or c != 0:
            self._apply(2 * v, s, c)
            self._apply(2 * v + 1, s, c)
            self.sg[v] = 1
            self.off[v] = 0

    def point(self, i: int) -> int:
        """Current Z at leaf i (0-based), read-only."""
        v, lo, hi = 1, 0, self.n - 1
        s, c = 1, 0
        while lo < hi:
            # accumulate pending transforms outermost-first
            s, c = s * self.sg[v], s * self.off[v] + c
            mid = (lo + hi) // 2
            if i <= mid:
                v, hi = 2 * v, mid
            else:
                v, lo = 2 * v + 1, mid + 1
        raw = (self.mn[v] + self.mx[v]) // 2
        return s * raw + c

    def reflect_suffix(self, j: int, c: int) -> None:
        """Apply Z -> c - Z on leaves [j, n-1]."""
        self._update(1, 0, self.n - 1, j, c)

    def _update(self, v, lo, hi, l, c):
        if hi < l:
            return
        if l <= lo:
            self._apply(v, -1, c)
            return
        self._push(v)
        mid = (lo + hi) // 2
        self._update(2 * v, lo, mid, l, c)
        self._update(2 * v + 1, mid + 1, hi, l, c)
        self.mn[v] = min(self.mn[2 * v], self.mn[2 * v + 1])
        self.mx[v] = max(self.mx[2 * v], self.mx[2 * v + 1])

    def min_slack(self) -> int:
        """min_i (Z_i - b_i); the barrier event holds iff this is >= 0."""
        return self.mn[1]


def _switch_positions(bits: np.ndarray) -> np.ndarray:
    steps = np.multiply.accumulate(bits.astype(np.int8), dtype=np.int8)
    return np.cumsum(steps, dtype=np.int64)


def timeline_segments(barrier, init_bits, ev_time, ev_bit, ev_val):
    """Drive one rerandomized trajectory through its events.

    ``ev_bit`` is 0-based, ``ev_val`` the fresh sign.  Returns (breaks,
    status): len(status) = len(ev_time) + 1 pieces, breaks excludes the
    endpoints (they belong to the caller).
    """
    n = len(barrier)
    bits = [int(x) for x in init_bits]
    tree = ReflectTree(_switch_positions(np.asarray(init_bits)), barrier)
    status = np.empty(len(ev_time) + 1, dtype=np.uint8)
    status[0] = tree.min_slack() >= 0
    for e in range(len(ev_time)):
        j = int(ev_bit[e])
        v = int(ev_val[e])
        if bits[j] != v:
            bits[j] = v
            c = 0 if j == 0 else 2 * tree.point(j - 1)
            tree.reflect_suffix(j, c)
        status[e + 1] = tree.min_slack() >= 0
    return np.asarray(ev_time, dtype=np.float64), status


def pair_energy_segments(segs, gamma: float) -> float:
    """Double integral of |t-s|^(-gamma) over the union of segments, squared.

    F(u) = u^(2-gamma)/((1-gamma)(2-gamma)) is the iterated antiderivative;
    a segment pairs with itself as 2*F(len) and ordered segments [a,b],[c,d]
    (b <= c) contribute 2*(F(d-a) - F(d-b) - F(c-a) + F(c-b)).
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    q = (1.0 - gamma) * (2.0 - gamma)
    e = 2.0 - gamma

    def F(u: float) -> float:
        return u**e / q

    total = 0.0
    m = len(segs)
    for i in range(m):
        a, b = segs[i]
        total += 2.0 * F(b - a)
        for k in range(i + 1, m):
            c, d = segs[k]
            total += 2.0 * (F(d - a) - F(d - b) - F(c - a) + F(c - b))
    return total


def timeline_stats_chunk(
    barrier, init_bits, ev_off, ev_time, ev_bit, ev_val, gamma: float
):
    """Occupation measure (and optionally pair energy) per trial.

    ``init_bits`` is (trials, n); events are CSR-packed via ``ev_off`` and
    sorted by time within each trial.  gamma < 0 skips the energy.
    """
    trials, n = init_bits.shape
    kappa = np.zeros(trials, dtype=np.float64)
    phi = np.zeros(trials, dtype=np.float64)
    for t in range(trials):
        s, e = int(ev_off[t]), int(ev_off[t + 1])
        bits = [int(x) for x in init_bits[t]]
        tree = ReflectTree(_switch_positions(init_bits[t]), barrier)
        segs = []
        cur = tree.min_slack() >= 0
        seg_start = 0.0
        acc = 0.0
        for k in range(s, e):
            j = int(ev_bit[k])
            v = int(ev_val[k])
            if bits[j] != v:
                bits[j] = v
                c = 0 if j == 0 else 2 * tree.point(j - 1)
                tree.reflect_suffix(j, c)
            now = tree.min_slack() >= 0
            if now != cur:
                tk = float(ev_time[k])
                if cur:
                    acc += tk - seg_start
                    segs.append((seg_start, tk))
                else:
                    seg_start = tk
                cur = now
        if cur:
            acc += 1.0 - seg_start
            segs.append((seg_start, 1.0))
        kappa[t] = acc
        if gamma >= 0.0:
            phi[t] = pair_energy_segments(segs, gamma)
    return kappa, phi


# -- word-parallel endpoint kernels --------------------------------------------
#
# Bit strings are packed little-endian into uint64 words: bit i of the string
# is bit (i % 64) of word (i // 64), with 1 coding the sign -1.  The pure lane
# unpacks via a uint8 view, which assumes a little-endian host (as does every
# platform this targets); the compiled lane shifts words directly.


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    flat = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return flat[:, :n]


def _flip_indicator(shape, flip_flat, flip_off) -> np.ndarray:
    ind = np.zeros(shape, dtype=np.uint8)
    counts = np.diff(flip_off)
    rows = np.repeat(np.arange(shape[0]), counts)
    ind[rows, flip_flat - 1] = 1
    return ind


def ns_endpoints_chunk(n, words, flip_flat, flip_off, kind: int):
    """Endpoints at times 0 and t for a chunk of rerandomized bit strings.

    kind 0 = switch walk, 1 = compass walk.  ``flip_flat``/``flip_off`` CSR-
    pack the 1-based positions whose bit differs between the two times.
    """
    bits = _unpack(words, n)
    ind = _flip_indicator(bits.shape, flip_flat, flip_off)
    if kind == 1:
        y0 = n - 2 * bits.sum(axis=1, dtype=np.int64)
        yt = n - 2 * (bits ^ ind).sum(axis=1, dtype=np.int64)
        return y0, yt
    par = np.bitwise_xor.accumulate(bits, axis=1)
    steps = 1 - 2 * par.astype(np.int32)
    z0 = steps.sum(axis=1, dtype=np.int64)
    fpar = np.bitwise_xor.accumulate(ind, axis=1)
    zt = (steps * (1 - 2 * fpar.astype(np.int32))).sum(axis=1, dtype=np.int64)
    return z0, zt


def uv_captures_chunk(ipos, words):
    """Switch positions captured just before each rerandomization.

    ``ipos`` is (trials, K) with the 1-based change positions I_1 < ... < I_K.
    Returns (C, z0, zt): C[t,k] = Z_{I_k - 1}(0), z0 = Z_{I_K}(0) and
    zt = Z_{I_K}(t), the latter walked independently from the time-t bits.
    """
    trials, K = ipos.shape
    L = int(ipos[:, -1].max())
    bits = _unpack(words, L)
    par = np.bitwise_xor.accumulate(bits, axis=1)
    steps = 1 - 2 * par.astype(np.int32)
    zc = np.cumsum(steps, axis=1, dtype=np.int64)  # zc[:, i-1] = Z_i(0)
    idx = np.clip(ipos - 2, 0, L - 1)
    C = np.take_along_axis(zc, idx, axis=1)
    C[ipos == 1] = 0
    rows = np.arange(trials)
    last = ipos[:, -1]
    z0 = zc[rows, last - 1]
    ind = np.zeros_like(bits)
    ind[np.repeat(rows, K), (ipos - 1).ravel()] = 1
    fpar = np.bitwise_xor.accumulate(ind, axis=1)
    stepst = steps * (1 - 2 * fpar.astype(np.int32))
    mask = np.arange(L) < last[:, None]
    zt = (stepst * mask).sum(axis=1, dtype=np.int64)
    return C, z0, zt


# -- float influence profile ----------------------------------------------------


def influence_profile_float(n: int) -> np.ndarray:
    """Influence profile of the stay-positive event in float arithmetic.

    Same ballot-weight x (window - strip) sum as the exact tier, with
    binomial pmfs via lgamma and truncation of negligible terms (z beyond
    ~10 sqrt(m) and reflection shifts beyond ~9.5 sqrt(N), both < 1e-19
    relative); overall relative error ~1e-9 dominated by pmf rounding.
    """
    lg = np.array([math.lgamma(k + 1) for k in range(n + 1)])
    ln2 = math.log(2.0)
    out = np.zeros(n, dtype=np.float64)
    # I_1 = 2 * P(stay positive) = C(n-1, floor((n-1)/2)) / 2**(n-1)
    out[0] = math.exp(lg[n - 1] - lg[(n - 1) // 2] - lg[n - 1 - (n - 1) // 2] - (n - 1) * ln2)
    if n == 1:
        return out
    pmfw = np.array([0.5, 0.5])  # endpoint pmf at jw = 1
    for m in range(2, n + 1):
        jw = m - 1
        N = n - m + 1
        pmf = np.exp(lg[N] - lg[: N + 1] - lg[: N + 1][::-1] - N * ln2)
        cum = np.concatenate(([0.0], np.cumsum(pmf)))
        zmax = min(jw, int(10.0 * math.sqrt(jw)) + 2)
        zlo = 2 - (jw & 1)
        zs = np.arange(zlo, zmax + 1, 2)
        if zs.size:
            w = (zs / jw) * pmfw[(jw + zs) // 2]
            win = _window_sum(cum, N, -zs + 1, zs)
            strip = np.array([_strip_sum(cum, N, int(z)) for z in zs])
            out[m - 1] = 2.0 * float(np.sum(w * (win - strip)))
        pmfw = 0.5 * (
            np.concatenate((pmfw, [0.0])) + np.concatenate(([0.0], pmfw))
        )
    return out


def _window_sum(cum, N, a, b):
    """P(Z_N in [a, b]) for vector bounds, via the pmf prefix sums."""
    a = np.maximum(a, -N)
    b = np.minimum(b, N)
    k1 = np.maximum((N + a + 1) // 2, 0)
    k2 = np.minimum((N + b) // 2, N)
    lo = np.minimum(k1, N + 1)
    hi = np.maximum(k2 + 1, lo)
    return cum[hi] - cum[lo]


def _strip_sum(cum, N, z: int) -> float:
    """Float analogue of the exact reflection series, start x = z."""
    L = 2 * z
    reach = 9.5 * math.sqrt(N) + 3.0
    kmax = min((N + z + 2 * L) // (2 * L) + 1, int((reach + z) / (2 * L)) + 2)
    total = 0.0
    for k in range(-kmax, kmax + 1):
        base = 2 * k * L
        total += _win1(cum, N, base - z + 1, base + z - 1)
        total -= _win1(cum, N, base + z + 1, base + 3 * z - 1)
    return total


def _win1(cum, N, a, b) -> float:
    if b < a:
        return 0.0
    a = max(a, -N)
    b = min(b, N)
    if b < a:
        return 0.0
    k1 = max((N + a + 1) // 2, 0)
    k2 = min((N + b) // 2, N)
    if k2 < k1:
        return 0.0
    return float(cum[k2 + 1] - cum[k1])
