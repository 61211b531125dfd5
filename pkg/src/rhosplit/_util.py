"""Shared exact-arithmetic and deterministic-hashing helpers."""

from __future__ import annotations

from fractions import Fraction

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

HALF = Fraction(1, 2)


def mix64(x: int) -> int:
    """64-bit avalanche (splitmix64 finaliser); pure function of x mod 2^64."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _M1) & MASK64
    x ^= x >> 27
    x = (x * _M2) & MASK64
    x ^= x >> 31
    return x


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed, order-sensitive."""
    acc = GOLDEN64
    for p in parts:
        acc = mix64(acc ^ ((p * _M1) & MASK64))
    return acc


def as_fraction(value) -> Fraction:
    """Exact Fraction from int, str ('p/q' or decimal) or Fraction.

    Floats are read through their decimal literal so that 0.1 means 1/10,
    not the binary double nearest to it.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def frac_str(x: Fraction) -> str:
    return str(x)


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator
