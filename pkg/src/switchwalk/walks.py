"""Bit strings and the two walks they drive.

A bit string is a finite sequence of signs x_1..x_n in {-1,+1}.  The compass
walk moves by the bits themselves, Y_i = Y_{i-1} + x_i.  The switch walk
moves by the running product S_i = x_1*...*x_i, i.e. each -1 bit reverses
the direction of travel and the walk keeps going the way it is facing:
Z_i = Z_{i-1} + S_i.  Both are simple random walks under fair coin flips,
but they are very different functions of the bits: flipping one bit of the
switch walk reflects the whole suffix of the path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

__all__ = [
    "as_bits",
    "WalkPath",
    "switch_walk",
    "compass_walk",
    "flip_suffix_image",
    "barrier_levels",
    "barrier_positive",
]


def as_bits(bits) -> np.ndarray:
    """Validate a sign sequence and return it as an int8 array."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    arr = arr.astype(np.int8, copy=True)
    if arr.size and not np.all(np.abs(arr) == 1):
        raise ValueError("bits must be +1 or -1")
    return arr


@dataclass(frozen=True, eq=False)
class WalkPath:
    """A lattice path Z_0..Z_n with unit steps.

    ``positions`` has length n+1 and starts at ``origin``.  ``kind`` records
    which walk produced it ("switch" or "compass").  The positions array is
    owned by the path and must not be mutated.
    """

    kind: str
    origin: int
    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        object.__setattr__(self, "positions", pos)
        if pos.ndim != 1 or pos.size < 1:
            raise ValueError("positions must be a non-empty 1-d array")
        if pos[0] != self.origin:
            raise ValueError("path must start at its origin")
        if pos.size > 1 and not np.all(np.abs(np.diff(pos)) == 1):
            raise ValueError("path increments must be +-1")

    @property
    def n(self) -> int:
        return self.positions.size - 1


def switch_walk(bits, origin: int = 0) -> WalkPath:
    """Path of the switch walk: increments are running products of the bits."""
    b = as_bits(bits)
    pos = np.empty(b.size + 1, dtype=np.int64)
    pos[0] = origin
    if b.size:
        steps = np.multiply.accumulate(b, dtype=np.int8)
        pos[1:] = origin + np.cumsum(steps, dtype=np.int64)
    return WalkPath("switch", origin, pos)


def compass_walk(bits, origin: int = 0) -> WalkPath:
    """Path of the compass walk: increments are the bits themselves."""
    b = as_bits(bits)
    pos = np.empty(b.size + 1, dtype=np.int64)
    pos[0] = origin
    if b.size:
        pos[1:] = origin + np.cumsum(b, dtype=np.int64)
    return WalkPath("compass", origin, pos)


def flip_suffix_image(path: WalkPath, m: int) -> WalkPath:
    """Switch path after bit m is flipped: the suffix reflects through Z_{m-1}.

    Flipping x_m negates every running product S_i with i >= m, so
    Z_i -> 2*Z_{m-1} - Z_i for i >= m while the prefix is untouched.
    """
    if path.kind != "switch":
        raise ValueError("suffix flip is a switch-walk operation")
    if not 1 <= m <= path.n:
        raise ValueError(f"bit index m={m} outside 1..{path.n}")
    pos = path.positions.copy()
    pivot = pos[m - 1]
    pos[m:] = 2 * pivot - pos[m:]
    return WalkPath("switch", path.origin, pos)


def _ceil_power(i: int, alpha: float) -> int:
    """ceil(i**alpha), resolving near-integer float powers exactly.

    When i**alpha lands within 1e-9 of an integer c the tie is decided by
    integer arithmetic whenever alpha is (to float precision) a rational
    p/q with q <= 64: then i**alpha <= c iff i**p <= c**q.
    """
    if i <= 1 or alpha == 0.0:
        return 1
    r = float(i) ** alpha
    c = round(r)
    if abs(r - c) > 1e-9:
        return ceil(r)
    frac = Fraction(alpha).limit_denominator(10**6)
    if frac.denominator <= 64 and abs(float(frac) - alpha) < 1e-15:
        p, q = frac.numerator, frac.denominator
        return c if i**p <= c**q else c + 1
    return ceil(r)


def barrier_levels(n: int, alpha: float) -> np.ndarray:
    """The integer barrier b_i = ceil(i**alpha) for i = 1..n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not (alpha >= 0.0):
        raise ValueError("alpha must be non-negative")
    if alpha == 0.0:
        return np.ones(n, dtype=np.int64)
    i = np.arange(1, n + 1, dtype=np.float64)
    r = i**alpha
    out = np.ceil(r).astype(np.int64)
    near = np.flatnonzero(np.abs(r - np.rint(r)) <= 1e-9)
    for k in near:
        out[k] = _ceil_power(k + 1, alpha)
    return out


def barrier_positive(path: WalkPath, alpha: float) -> bool:
    """Whether Z_i >= ceil(i**alpha) for every 1 <= i <= n."""
    n = path.n
    if n == 0:
        return True
    b = barrier_levels(n, alpha)
    return bool(np.all(path.positions[1:] >= b))
