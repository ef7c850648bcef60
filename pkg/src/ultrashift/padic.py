"""Exact p-adic valuation, norm and distance over integers and rationals.

Norms are kept symbolically as ``(p, r)`` pairs meaning ``p**-r`` plus a
zero flag, so comparisons and products never touch floating point::

    >>> padic_distance(135, 10, 5)
    PAdicNorm(5^-3)
    >>> padic_distance(135, 10, 5) < padic_distance(35, 10, 5)
    True
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from numbers import Rational
from typing import Union

from .errors import DomainError

INFINITE = math.inf
"""Valuation of zero."""

RationalLike = Union[int, Fraction]


@lru_cache(maxsize=1024)
def is_prime(n: int) -> bool:
    """Deterministic trial division; adequate for the small bases used here."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeBase:
    p: int

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, int):
            raise DomainError(f"prime base must be an integer, got {self.p!r}")
        if not is_prime(self.p):
            raise DomainError(f"{self.p} is not prime")

    def __int__(self):
        return self.p


def as_prime(p: int | PrimeBase) -> PrimeBase:
    return p if isinstance(p, PrimeBase) else PrimeBase(p)


def _as_rational(x) -> RationalLike:
    if isinstance(x, bool):
        raise DomainError(f"expected a rational number, got {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, Rational):
        q = Fraction(x)
        return q.numerator if q.denominator == 1 else q
    if isinstance(x, str):
        try:
            q = Fraction(x)
        except ValueError:
            raise DomainError(f"cannot parse {x!r} as a rational") from None
        return q.numerator if q.denominator == 1 else q
    raise DomainError(f"expected int or Fraction, got {type(x).__name__}")


def _int_valuation(n: int, p: int) -> int:
    # n != 0
    n = abs(n)
    if p == 2:
        return (n & -n).bit_length() - 1
    r = 0
    while n % p == 0:
        n //= p
        r += 1
    return r


def valuation(x: RationalLike, p: int | PrimeBase) -> int | float:
    """Exponent of the largest power of ``p`` dividing ``x``.

    Extends to reduced fractions as ``v(num) - v(den)``; ``valuation(0)``
    is :data:`INFINITE`.
    """
    p = as_prime(p).p
    x = _as_rational(x)
    if x == 0:
        return INFINITE
    if isinstance(x, int):
        return _int_valuation(x, p)
    return _int_valuation(x.numerator, p) - _int_valuation(x.denominator, p)


@total_ordering
@dataclass(frozen=True)
class PAdicNorm:
    """Exact value ``p**-r``, or zero when ``zero`` is set (``r`` is then 0)."""

    base: PrimeBase
    r: int = 0
    zero: bool = False

    @classmethod
    def zero_of(cls, p: int | PrimeBase) -> PAdicNorm:
        return cls(as_prime(p), 0, True)

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def value(self) -> Fraction:
        if self.zero:
            return Fraction(0)
        if self.r >= 0:
            return Fraction(1, self.p ** self.r)
        return Fraction(self.p ** -self.r)

    def __float__(self):
        if self.zero:
            return 0.0
        return float(self.p) ** -self.r

    def symbolic(self) -> str:
        if self.zero:
            return "0"
        return f"{self.p}^{-self.r}"

    __str__ = symbolic

    def __repr__(self):
        return f"PAdicNorm({self.symbolic()})"

    def __eq__(self, other):
        if isinstance(other, PAdicNorm):
            if self.p == other.p:
                return self.zero == other.zero and (self.zero or self.r == other.r)
            return self.value == other.value
        if isinstance(other, (int, Fraction)):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __lt__(self, other):
        if isinstance(other, PAdicNorm):
            if self.p == other.p:
                if self.zero or other.zero:
                    return self.zero and not other.zero
                return self.r > other.r
            return self.value < other.value
        if isinstance(other, (int, Fraction)):
            return self.value < other
        return NotImplemented

    def __mul__(self, other):
        if not isinstance(other, PAdicNorm) or other.p != self.p:
            return NotImplemented
        if self.zero or other.zero:
            return PAdicNorm.zero_of(self.base)
        return PAdicNorm(self.base, self.r + other.r)


def padic_norm(x: RationalLike, p: int | PrimeBase) -> PAdicNorm:
    base = as_prime(p)
    r = valuation(x, base)
    if r == INFINITE:
        return PAdicNorm.zero_of(base)
    return PAdicNorm(base, r)


def padic_distance(x: RationalLike, y: RationalLike, p: int | PrimeBase) -> PAdicNorm:
    return padic_norm(_as_rational(x) - _as_rational(y), p)


@dataclass(frozen=True)
class DigitExpansion:
    """Base-p digits ``a_0, a_1, ...`` (least significant first).

    Trailing high-order zeros are dropped, so zero has no digits.
    """

    base: PrimeBase
    digits: tuple[int, ...]

    def __post_init__(self):
        base = as_prime(self.base)
        digits = tuple(int(a) for a in self.digits)
        for i, a in enumerate(digits):
            if not 0 <= a < base.p:
                raise DomainError(f"digit a_{i}={a} outside [0, {base.p - 1}]")
        while digits and digits[-1] == 0:
            digits = digits[:-1]
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "digits", digits)

    def __len__(self):
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)


def digits(x: int, p: int | PrimeBase) -> DigitExpansion:
    base = as_prime(p)
    if isinstance(x, bool) or not isinstance(x, int):
        raise DomainError(f"digits() needs a nonnegative integer, got {x!r}")
    if x < 0:
        raise DomainError(f"digits() needs a nonnegative integer, got {x}")
    out = []
    while x:
        x, a = divmod(x, base.p)
        out.append(a)
    return DigitExpansion(base, tuple(out))


def from_digits(expansion: DigitExpansion) -> int:
    p = expansion.base.p
    x = 0
    for a in reversed(expansion.digits):
        x = x * p + a
    return x
