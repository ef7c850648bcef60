"""Exact nonnegative dyadic rationals ``m * 2**-e``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

from .errors import DomainError


@total_ordering
@dataclass(frozen=True, init=False)
class DyadicValue:
    """Canonical ``mantissa * 2**-shift`` with an odd mantissa (or zero).

    Distances ``2**-L`` and transition times in the symbolic dynamics are
    all of this form, so they compare and add without rounding.
    """

    mantissa: int
    shift: int

    def __init__(self, mantissa: int, shift: int = 0):
        if mantissa < 0 or shift < 0:
            raise DomainError(f"dyadic value needs m >= 0 and e >= 0, got ({mantissa}, {shift})")
        if mantissa == 0:
            shift = 0
        else:
            tz = min((mantissa & -mantissa).bit_length() - 1, shift)
            mantissa >>= tz
            shift -= tz
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def power_of_two(cls, k: int) -> DyadicValue:
        """``2**k``; ``k`` may be negative."""
        return cls(1 << k, 0) if k >= 0 else cls(1, -k)

    @classmethod
    def from_fraction(cls, q: Fraction) -> DyadicValue:
        q = Fraction(q)
        den = q.denominator
        if q < 0 or den & (den - 1):
            raise DomainError(f"{q} is not a nonnegative dyadic rational")
        return cls(q.numerator, den.bit_length() - 1)

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def is_power_of_two(self) -> bool:
        m = self.mantissa
        return m > 0 and m & (m - 1) == 0

    def log2(self) -> int:
        """Exact base-2 logarithm of a pure power of two."""
        if not self.is_power_of_two():
            raise DomainError(f"log2 of {self.symbolic()} is not an integer")
        return self.mantissa.bit_length() - 1 - self.shift

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.shift)

    def __float__(self):
        return float(self.to_fraction())

    def symbolic(self) -> str:
        if self.mantissa == 0:
            return "0"
        if self.mantissa == 1 and self.shift == 0:
            return "1"
        if self.is_power_of_two():
            return f"2^{self.log2()}"
        if self.shift == 0:
            return str(self.mantissa)
        return f"{self.mantissa}*2^-{self.shift}"

    __str__ = symbolic

    def __repr__(self):
        return f"DyadicValue({self.symbolic()})"

    def _aligned(self, other: DyadicValue) -> tuple[int, int, int]:
        e = max(self.shift, other.shift)
        return self.mantissa << (e - self.shift), other.mantissa << (e - other.shift), e

    def __eq__(self, other):
        if isinstance(other, DyadicValue):
            return self.mantissa == other.mantissa and self.shift == other.shift
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __lt__(self, other):
        if isinstance(other, DyadicValue):
            a, b, _ = self._aligned(other)
            return a < b
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() < other
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, DyadicValue):
            return NotImplemented
        a, b, e = self._aligned(other)
        return DyadicValue(a + b, e)

    def __sub__(self, other):
        if not isinstance(other, DyadicValue):
            return NotImplemented
        a, b, e = self._aligned(other)
        return DyadicValue(a - b, e)

    def __mul__(self, other):
        if isinstance(other, int) and other >= 0:
            return DyadicValue(self.mantissa * other, self.shift)
        if isinstance(other, DyadicValue):
            return DyadicValue(self.mantissa * other.mantissa, self.shift + other.shift)
        return NotImplemented

    __rmul__ = __mul__


ZERO = DyadicValue(0)
ONE = DyadicValue(1)
