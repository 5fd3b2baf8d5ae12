"""Exact dyadic probabilities of switch-walk events.

Endpoint distributions, positivity with and without moving barriers, strip
confinement via iterated reflection, ballot-theorem weights, exact tails,
and the exact influence profile of the stay-positive event.  Everything in
this module returns :class:`~switchwalk.dyadic.DyadicProb` values; floating
point appears only in the explicitly named float tier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .dyadic import DyadicProb
from .walks import barrier_levels

__all__ = [
    "position_prob",
    "position_dist",
    "PositionDist",
    "stay_positive_prob",
    "barrier_positive_prob",
    "reflection_pair",
    "ballot_prob",
    "stay_positive_endpoint_dp",
    "strip_stay_prob",
    "strip_stay_prob_dp",
    "InfluenceTerm",
    "influence_exact",
    "influence_terms",
    "influence_oracle",
    "influence_profile_exact",
    "influence_profile_float",
    "tail_prob",
    "chernoff_holds",
]

ORACLE_MAX_N = 20
EXACT_TIER_MAX_N = 512


# -- binomial machinery -------------------------------------------------------


@lru_cache(maxsize=128)
def _binom_row(j: int) -> tuple[int, ...]:
    """Row (C(j,0), ..., C(j,j)) of Pascal's triangle."""
    row = [1] * (j + 1)
    c = 1
    for k in range(1, j + 1):
        c = c * (j - k + 1) // k
        row[k] = c
    return tuple(row)


@lru_cache(maxsize=128)
def _cum_row(j: int) -> tuple[int, ...]:
    """Exclusive prefix sums of the binomial row: cum[k] = sum_{i<k} C(j,i)."""
    row = _binom_row(j)
    out = [0] * (j + 2)
    for k, c in enumerate(row):
        out[k + 1] = out[k] + c
    return tuple(out)


def _interval_count(cum, j: int, a: int, b: int) -> int:
    """Number of j-step walks from 0 whose endpoint lies in [a, b]."""
    if b < a:
        return 0
    a = max(a, -j)
    b = min(b, j)
    if b < a:
        return 0
    k1 = (j + a + 1) // 2  # ceil((j+a)/2)
    k2 = (j + b) // 2
    k1 = max(k1, 0)
    k2 = min(k2, j)
    if k2 < k1:
        return 0
    return cum[k2 + 1] - cum[k1]


# -- endpoint distribution ----------------------------------------------------


def position_prob(j: int, z: int) -> DyadicProb:
    """Exact P(Z_j = z) = C(j, (j+z)/2) / 2**j."""
    if j < 0:
        raise ValueError("j must be non-negative")
    if abs(z) > j or (j + z) % 2:
        return DyadicProb.zero()
    return DyadicProb(math.comb(j, (j + z) // 2), j)


@dataclass(frozen=True)
class PositionDist:
    """Full endpoint distribution of a j-step walk."""

    j: int
    probs: dict  # z -> DyadicProb over z = -j..j with parity of j

    def total(self) -> DyadicProb:
        out = DyadicProb.zero()
        for p in self.probs.values():
            out = out + p
        return out


def position_dist(j: int) -> PositionDist:
    if j < 0:
        raise ValueError("j must be non-negative")
    row = _binom_row(j)
    probs = {z: DyadicProb(row[(j + z) // 2], j) for z in range(-j, j + 1, 2)}
    return PositionDist(j, probs)


# -- positivity ---------------------------------------------------------------


def stay_positive_prob(n: int) -> DyadicProb:
    """Exact P(Z_i >= 1 for all 1 <= i <= n).

    Equals (1/2) * C(n-1, floor((n-1)/2)) / 2**(n-1): after the forced first
    up-step, the ballot/cycle count of the remaining n-1 steps.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return DyadicProb(math.comb(n - 1, (n - 1) // 2), n)


def barrier_positive_prob(n: int, alpha: float) -> DyadicProb:
    """Exact P(Z_i >= ceil(i**alpha) for all 1 <= i <= n), 0 <= alpha < 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    b = barrier_levels(n, alpha)
    # b[0] == 1 always, so Z_1 = +1 is forced.  counts[k] is the number of
    # surviving paths at position lo + 2k after step i.
    counts = [1]
    lo = 1
    for i in range(2, n + 1):
        fl = int(b[i - 1])
        hi = lo + 2 * (len(counts) - 1)
        new_lo = fl if (fl - i) % 2 == 0 else fl + 1
        new_lo = max(new_lo, lo - 1)
        new_hi = hi + 1
        if new_hi < new_lo:
            return DyadicProb.zero()
        new = [0] * ((new_hi - new_lo) // 2 + 1)
        for k, c in enumerate(counts):
            if not c:
                continue
            p = lo + 2 * k
            if p - 1 >= new_lo:
                new[(p - 1 - new_lo) // 2] += c
            if p + 1 >= new_lo:
                new[(p + 1 - new_lo) // 2] += c
        counts = new
        lo = new_lo
    return DyadicProb(sum(counts), n)


# -- small DP oracles ---------------------------------------------------------


def _floor_dp_counts(steps: int, floor_at, start: int = 0) -> dict:
    """Endpoint path counts with the constraint p >= floor_at(i) at each i >= 1."""
    cur = {start: 1}
    for i in range(1, steps + 1):
        fl = floor_at(i)
        nxt: dict = {}
        for p, c in cur.items():
            for q in (p - 1, p + 1):
                if q >= fl:
                    nxt[q] = nxt.get(q, 0) + c
        cur = nxt
        if not cur:
            break
    return cur


def _band_dp_counts(steps: int, lo: int, hi: int, start: int) -> dict:
    """Endpoint path counts with lo <= p <= hi enforced at each i >= 1."""
    cur = {start: 1}
    for _ in range(steps):
        nxt: dict = {}
        for p, c in cur.items():
            for q in (p - 1, p + 1):
                if lo <= q <= hi:
                    nxt[q] = nxt.get(q, 0) + c
        cur = nxt
        if not cur:
            break
    return cur


# -- reflection principle and ballot weights ----------------------------------


def reflection_pair(z: int, j: int) -> tuple[DyadicProb, DyadicProb]:
    """(P(Z_i > -z for all i <= j), P(Z_j in [-z+1, z])) by independent routes.

    The first component walks an absorbing-floor DP; the second sums a window
    of the binomial row.  The reflection principle says they are equal.
    """
    if z < 1 or j < 1:
        raise ValueError("z and j must be >= 1")
    dp = _floor_dp_counts(j, lambda i: -z + 1)
    first = DyadicProb(sum(dp.values()), j)
    second = DyadicProb(_interval_count(_cum_row(j), j, -z + 1, z), j)
    return first, second


def ballot_prob(j: int, z: int) -> DyadicProb:
    """Exact P(Z_i >= 1 for all i <= j and Z_j = z) = (z/j) * P(Z_j = z)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if z < 1 or z > j or (j + z) % 2:
        return DyadicProb.zero()
    num = z * math.comb(j, (j + z) // 2)
    if num % j:
        # The ballot theorem guarantees divisibility; reaching this line is a bug.
        raise ArithmeticError(f"ballot weight ({z}/{j})*C not an integer")
    return DyadicProb(num // j, j)


def stay_positive_endpoint_dp(j: int, z: int) -> DyadicProb:
    """DP route for P(Z_i >= 1 for all i <= j, Z_j = z); oracle for ballot_prob."""
    if j < 1:
        raise ValueError("j must be >= 1")
    return DyadicProb(_floor_dp_counts(j, lambda i: 1).get(z, 0), j)


# -- strip confinement --------------------------------------------------------


def _strip_count(cum, N: int, x: int, z: int) -> int:
    """Paths from x staying strictly inside (0, 2z) for N steps (any endpoint).

    Iterated reflection between the absorbing lines 0 and L=2z: summing the
    endpoint y over 1..L-1 turns the classical double-barrier series into a
    difference of shifted windows of width L-1,

        sum_k  #(D in [2kL - x + 1, 2kL - x + L - 1])
             - #(D in [2kL + x + 1, 2kL + x + L - 1]),

    where D is the unconstrained N-step displacement.  Terms vanish once the
    windows leave [-N, N].
    """
    L = 2 * z
    total = 0
    kmax = (N + x + 2 * L) // (2 * L) + 1
    for k in range(-kmax, kmax + 1):
        base = 2 * k * L
        total += _interval_count(cum, N, base - x + 1, base - x + L - 1)
        total -= _interval_count(cum, N, base + x + 1, base + x + L - 1)
    return total


def _validate_strip_args(z: int, N: int, start) -> int:
    if z < 1:
        raise ValueError("z must be >= 1")
    if N < 0:
        raise ValueError("N must be >= 0")
    x = z if start is None else int(start)
    if not 0 < x < 2 * z:
        raise ValueError(f"start {x} is outside the strip (0, {2 * z})")
    return x


def strip_stay_prob(z: int, N: int, start: int | None = None) -> DyadicProb:
    """Exact P_x(Z_i in (0, 2z) for all i <= N), default start x = z."""
    x = _validate_strip_args(z, N, start)
    if N == 0:
        return DyadicProb.one()
    count = _strip_count(_cum_row(N), N, x, z)
    if not 0 <= count <= 1 << N:
        raise ArithmeticError("reflection series out of range")
    return DyadicProb(count, N)


def strip_stay_prob_dp(z: int, N: int, start: int | None = None) -> DyadicProb:
    """Absorbing-barrier DP route for the strip probability; oracle."""
    x = _validate_strip_args(z, N, start)
    if N == 0:
        return DyadicProb.one()
    counts = _band_dp_counts(N, 1, 2 * z - 1, x)
    return DyadicProb(sum(counts.values()), N)


# -- influence of single bits on the stay-positive event -----------------------


@dataclass(frozen=True)
class InfluenceTerm:
    """One ballot-weighted term of the exact influence sum at offset z."""

    z: int
    ballot_weight: DyadicProb  # P(Z_i >= 1 for i < m, Z_{m-1} = z)
    p_window: DyadicProb  # P_0(Z_N in [-z+1, z]), N = n-m+1
    p_strip: DyadicProb  # P_z(Z stays in (0, 2z) for N steps)
    contribution: DyadicProb  # ballot_weight * (p_window - p_strip)


def _validate_nm(n: int, m: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= m <= n:
        raise ValueError(f"bit index m={m} outside 1..{n}")


def _influence_count(n: int, m: int) -> int:
    """Numerator of I_m(P_n) over denominator 2**n."""
    if m == 1:
        return 2 * math.comb(n - 1, (n - 1) // 2)
    jw = m - 1
    N = n - m + 1
    roww = _binom_row(jw)
    cum = _cum_row(N)
    total = 0
    for z in range(2 - (jw & 1), jw + 1, 2):
        cnum = z * roww[(jw + z) // 2]
        if cnum % jw:
            raise ArithmeticError("ballot weight not an integer")
        w = cnum // jw
        window = _interval_count(cum, N, -z + 1, z)
        strip = _strip_count(cum, N, z, z)
        total += w * (window - strip)
    return 2 * total


def influence_exact(n: int, m: int) -> DyadicProb:
    """Exact influence I_m(P_n) of bit m on the stay-positive event.

    Bit m is pivotal iff the walk is positive up to m-1 and exactly one of
    the two suffixes (original / reflected through 2*Z_{m-1}) stays positive.
    Conditioning on Z_{m-1} = z via the ballot theorem:

        I_m = 2 * sum_z (z/(m-1)) P(Z_{m-1}=z)
                  * [ P_0(Z_{N} in [-z+1, z]) - P_z(strip (0,2z) for N) ]

    with N = n-m+1; for m = 1 this degenerates to 2*stay_positive_prob(n).
    """
    _validate_nm(n, m)
    return DyadicProb(_influence_count(n, m), n)


def influence_terms(n: int, m: int) -> list[InfluenceTerm]:
    """The per-z terms behind influence_exact; empty for m = 1."""
    _validate_nm(n, m)
    if m == 1:
        return []
    jw = m - 1
    N = n - m + 1
    roww = _binom_row(jw)
    cum = _cum_row(N)
    out = []
    for z in range(2 - (jw & 1), jw + 1, 2):
        w = z * roww[(jw + z) // 2] // jw
        window = _interval_count(cum, N, -z + 1, z)
        strip = _strip_count(cum, N, z, z)
        out.append(
            InfluenceTerm(
                z=z,
                ballot_weight=DyadicProb(w, jw),
                p_window=DyadicProb(window, N),
                p_strip=DyadicProb(strip, N),
                contribution=DyadicProb(w * (window - strip), n),
            )
        )
    return out


def influence_oracle(n: int, m: int) -> DyadicProb:
    """I_m(P_n) by brute force: enumerate all 2**n strings, re-walk, compare.

    Budget-limited to n <= 20 (the matrix of all strings is walked in batches).
    """
    _validate_nm(n, m)
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle enumeration limited to n <= {ORACLE_MAX_N}")
    pivotal = 0
    batch = 1 << min(n, 14)
    cols = np.arange(n, dtype=np.uint32)
    for lo in range(0, 1 << n, batch):
        idx = np.arange(lo, lo + batch, dtype=np.uint32)
        bits01 = ((idx[:, None] >> cols) & 1).astype(np.uint8)  # 1 means -1
        flipped = bits01.copy()
        flipped[:, m - 1] ^= 1
        ok = _all_positive_01(bits01)
        okf = _all_positive_01(flipped)
        pivotal += int(np.count_nonzero(ok != okf))
    return DyadicProb(pivotal, n)


def _all_positive_01(bits01: np.ndarray) -> np.ndarray:
    """Stay-positive indicator of the switch walk for 0/1-coded bit rows."""
    par = np.bitwise_xor.accumulate(bits01, axis=1)
    steps = 1 - 2 * par.astype(np.int32)
    z = np.cumsum(steps, axis=1)
    return (z >= 1).all(axis=1)


def influence_profile_exact(n: int) -> list[DyadicProb]:
    """[I_1(P_n), ..., I_n(P_n)] exactly, sharing binomial rows across m."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = [DyadicProb(2 * math.comb(n - 1, (n - 1) // 2), n)]
    roww: list[int] = [1, 1]  # binomial row for jw = m-1, starting at jw = 1
    for m in range(2, n + 1):
        jw = m - 1
        N = n - m + 1
        cum = _cum_row(N)
        total = 0
        for z in range(2 - (jw & 1), jw + 1, 2):
            w = z * roww[(jw + z) // 2] // jw
            window = _interval_count(cum, N, -z + 1, z)
            strip = _strip_count(cum, N, z, z)
            total += w * (window - strip)
        out.append(DyadicProb(2 * total, n))
        roww = [1] + [roww[k - 1] + roww[k] for k in range(1, jw + 1)] + [1]
    return out


def influence_profile_float(n: int) -> np.ndarray:
    """Float influence profile (relative error ~1e-9); accelerator for large n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    from ._pure import influence_profile_float as _profile

    return _profile(n)


# -- tails ---------------------------------------------------------------------


def tail_prob(j: int, x: int) -> DyadicProb:
    """Exact P(Z_j >= x)."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if x <= -j:
        return DyadicProb.one()
    return DyadicProb(_interval_count(_cum_row(j), j, x, j), j)


def chernoff_holds(j: int, x: int) -> bool:
    """Whether the exact tail P(Z_j >= x) <= exp(-x**2 / (2j)).

    The comparison is exact: the tail is a dyadic rational and the float
    bound is lifted to its exact binary value.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    bound = math.exp(-(x * x) / (2.0 * j))
    return tail_prob(j, x).as_fraction() <= Fraction(bound)
