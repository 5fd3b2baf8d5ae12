"""Exact probabilities with power-of-two denominators.

Every event over finitely many fair coin flips has probability num/2**exp,
so sums, differences and products of such values never leave the class and
never round.
"""

from __future__ import annotations

from fractions import Fraction


class DyadicProb:
    """Non-negative rational ``num / 2**exp`` kept in canonical form.

    Canonical means ``num`` is odd or the exponent is zero (zero itself is
    stored as ``0/2**0``).  Values may exceed 1; callers enforce their own
    range invariants.
    """

    __slots__ = ("num", "exp")

    def __init__(self, num: int, exp: int = 0):
        num = int(num)
        exp = int(exp)
        if num < 0:
            raise ValueError("numerator must be non-negative")
        if exp < 0:
            raise ValueError("exponent must be non-negative")
        if num == 0:
            exp = 0
        else:
            while exp > 0 and num & 1 == 0:
                num >>= 1
                exp -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicProb is immutable")

    @classmethod
    def zero(cls) -> "DyadicProb":
        return cls(0, 0)

    @classmethod
    def one(cls) -> "DyadicProb":
        return cls(1, 0)

    @classmethod
    def from_fraction(cls, fr: Fraction) -> "DyadicProb":
        den = fr.denominator
        if den & (den - 1):
            raise ValueError(f"{fr} does not have a power-of-two denominator")
        return cls(fr.numerator, den.bit_length() - 1)

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "DyadicProb") -> "DyadicProb":
        if not isinstance(other, DyadicProb):
            return NotImplemented
        e = max(self.exp, other.exp)
        return DyadicProb(
            (self.num << (e - self.exp)) + (other.num << (e - other.exp)), e
        )

    def __sub__(self, other: "DyadicProb") -> "DyadicProb":
        if not isinstance(other, DyadicProb):
            return NotImplemented
        e = max(self.exp, other.exp)
        num = (self.num << (e - self.exp)) - (other.num << (e - other.exp))
        if num < 0:
            raise ValueError("difference of dyadic probabilities is negative")
        return DyadicProb(num, e)

    def __mul__(self, other):
        if isinstance(other, DyadicProb):
            return DyadicProb(self.num * other.num, self.exp + other.exp)
        if isinstance(other, int):
            if other < 0:
                raise ValueError("cannot scale by a negative integer")
            return DyadicProb(self.num * other, self.exp)
        return NotImplemented

    __rmul__ = __mul__

    # -- comparison ---------------------------------------------------------

    def _cmp_key(self, other):
        if isinstance(other, DyadicProb):
            e = max(self.exp, other.exp)
            return self.num << (e - self.exp), other.num << (e - other.exp)
        if isinstance(other, (int, Fraction)):
            fr = self.as_fraction()
            return fr, Fraction(other)
        return None

    def __eq__(self, other):
        key = self._cmp_key(other)
        if key is None:
            return NotImplemented
        return key[0] == key[1]

    def __lt__(self, other):
        key = self._cmp_key(other)
        if key is None:
            return NotImplemented
        return key[0] < key[1]

    def __le__(self, other):
        key = self._cmp_key(other)
        if key is None:
            return NotImplemented
        return key[0] <= key[1]

    def __gt__(self, other):
        key = self._cmp_key(other)
        if key is None:
            return NotImplemented
        return key[0] > key[1]

    def __ge__(self, other):
        key = self._cmp_key(other)
        if key is None:
            return NotImplemented
        return key[0] >= key[1]

    def __hash__(self):
        return hash(self.as_fraction())

    def __bool__(self):
        return self.num != 0

    def __float__(self) -> float:
        # Fraction.__float__ is correctly rounded and copes with numerators
        # far beyond the float range (e.g. denominators like 2**4096).
        return float(self.as_fraction())

    def __str__(self) -> str:
        return f"{self.num}/2^{self.exp}"

    def __repr__(self) -> str:
        return f"DyadicProb({self.num}, {self.exp})"
