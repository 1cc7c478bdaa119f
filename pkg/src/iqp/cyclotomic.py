"""Exact arithmetic in Z[zeta_16], zeta_16 = exp(i*pi/8).

Elements are stored as 8 integer coefficients over 1, zeta, ..., zeta^7 with
the reduction zeta^8 = -1. Every phase produced by the supported gate sets is
a power of zeta, so amplitude sums land in this ring without rounding.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from typing import Iterable, Sequence

ORDER = 16
_POWERS = [cmath.exp(1j * cmath.pi * k / 8) for k in range(8)]


class Cyclotomic:
    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[int] = (0,) * 8) -> None:
        c = tuple(int(a) for a in coeffs)
        if len(c) != 8:
            raise ValueError(f"expected 8 coefficients, got {len(c)}")
        self._c = c

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self._c

    @classmethod
    def from_int(cls, a: int) -> Cyclotomic:
        return cls((a, 0, 0, 0, 0, 0, 0, 0))

    @classmethod
    def zeta(cls, k: int) -> Cyclotomic:
        """zeta^k for any integer k."""
        k %= ORDER
        c = [0] * 8
        if k < 8:
            c[k] = 1
        else:
            c[k - 8] = -1
        return cls(c)

    @classmethod
    def from_histogram(cls, counts: Sequence[int]) -> Cyclotomic:
        """Sum of counts[k] * zeta^k over k in [0, 16)."""
        if len(counts) != ORDER:
            raise ValueError("histogram must have 16 bins")
        return cls(int(counts[k]) - int(counts[k + 8]) for k in range(8))

    def __repr__(self) -> str:
        return f"Cyclotomic({list(self._c)})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self._c == Cyclotomic.from_int(other)._c
        if isinstance(other, Cyclotomic):
            return self._c == other._c
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._c)

    def __add__(self, other: int | Cyclotomic) -> Cyclotomic:
        if isinstance(other, int):
            other = Cyclotomic.from_int(other)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        return Cyclotomic(a + b for a, b in zip(self._c, other._c))

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic(-a for a in self._c)

    def __sub__(self, other: int | Cyclotomic) -> Cyclotomic:
        return self + (-other)

    def __mul__(self, other: int | Cyclotomic) -> Cyclotomic:
        if isinstance(other, int):
            return Cyclotomic(a * other for a in self._c)
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        out = [0] * 8
        for i, a in enumerate(self._c):
            if not a:
                continue
            for j, b in enumerate(other._c):
                k = i + j
                if k < 8:
                    out[k] += a * b
                else:
                    out[k - 8] -= a * b
        return Cyclotomic(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> Cyclotomic:
        """Multiply by zeta^k."""
        k %= ORDER
        out = [0] * 8
        for i, a in enumerate(self._c):
            j = (i + k) % ORDER
            if j < 8:
                out[j] += a
            else:
                out[j - 8] -= a
        return Cyclotomic(out)

    def conjugate(self) -> Cyclotomic:
        # zeta^-i = -zeta^(8-i)
        out = [self._c[0]] + [0] * 7
        for i in range(1, 8):
            out[8 - i] -= self._c[i]
        return Cyclotomic(out)

    def is_integer(self) -> bool:
        return not any(self._c[1:])

    def __int__(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self!r} is not a rational integer")
        return self._c[0]

    def __complex__(self) -> complex:
        return complex(sum(a * z for a, z in zip(self._c, _POWERS)))

    def abs2(self) -> float:
        return abs(complex(self)) ** 2

    def max_abs_coeff(self) -> int:
        return max(abs(a) for a in self._c)

    def rational_over(self, n: int) -> Fraction:
        """Value divided by 2**n, when integral."""
        return Fraction(int(self), 1 << n)
