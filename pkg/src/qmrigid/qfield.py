"""Exact arithmetic in the rational function field Q(q).

A :class:`Scalar` is a reduced fraction of two integer polynomials in ``q``.
Negative powers of ``q`` are fractions too (``q**-1 == 1/q``), so there is a
single canonical form: ``gcd(num, den) == 1`` over ``Z[q]`` (integer content
included) and ``den`` has a positive leading coefficient.  Two scalars are
equal iff their representations are equal.

Polynomial gcd is delegated to FLINT's ``fmpz_poly``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Union

from flint import fmpz_poly

__all__ = [
    "Scalar",
    "DivisionByZero",
    "q",
    "ONE",
    "ZERO",
    "qpow",
    "as_scalar",
    "q_integer",
    "q_factorial",
    "cauchon_coeff",
]


class DivisionByZero(ZeroDivisionError):
    pass


_P_ZERO = fmpz_poly([])
_P_ONE = fmpz_poly([1])


def _poly(value) -> fmpz_poly:
    if isinstance(value, fmpz_poly):
        return value
    if isinstance(value, int):
        return fmpz_poly([value])
    return fmpz_poly([int(c) for c in value])


class Scalar:
    """An element of Q(q) in canonical reduced form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Union[int, Iterable[int], fmpz_poly] = 0, den=1):
        num = _poly(num)
        den = _poly(den)
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        self._set(*_canonical(num, den))

    def _set(self, num: fmpz_poly, den: fmpz_poly) -> None:
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _raw(cls, num: fmpz_poly, den: fmpz_poly) -> "Scalar":
        obj = object.__new__(cls)
        obj._set(num, den)
        return obj

    @classmethod
    def _reduced(cls, num: fmpz_poly, den: fmpz_poly) -> "Scalar":
        return cls._raw(*_canonical(num, den))

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def q_exponent(self):
        """Return ``k`` if this scalar is exactly ``q**k``, else ``None``."""
        for a, b, sign in ((self.num, self.den, 1), (self.den, self.num, -1)):
            if b.is_one() and a.length() >= 1 and a.leading_coefficient() == 1:
                d = a.degree()
                if all(c == 0 for c in a.coeffs()[:d]):
                    return sign * d
        return None

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den.is_one() and other.den.is_one():
            return Scalar._raw(self.num + other.num, _P_ONE)
        if self.den == other.den:
            return Scalar._reduced(self.num + other.num, self.den)
        return Scalar._reduced(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(-self.num, self.den)

    def __sub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return ZERO
        if self.den.is_one() and other.den.is_one():
            return Scalar._raw(self.num * other.num, _P_ONE)
        # cross-cancel before multiplying keeps the operands small
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        num = (self.num // g1) * (other.num // g2)
        den = (self.den // g2) * (other.den // g1)
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        return Scalar._raw(num, den)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise DivisionByZero("inverse of zero")
        num, den = self.den, self.num
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        return Scalar._raw(num, den)

    def __truediv__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return Scalar._raw(self.num**k, self.den**k)

    # -- comparison / hashing ------------------------------------------------

    def __eq__(self, other):
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(int(c) for c in self.num.coeffs()),
                               tuple(int(c) for c in self.den.coeffs())))
        return self._hash

    # -- conversion ----------------------------------------------------------

    def canonicalize(self) -> "Scalar":
        return Scalar._reduced(self.num, self.den)

    def to_json(self) -> dict:
        return {
            "num": [str(int(c)) for c in self.num.coeffs()] or ["0"],
            "den": [str(int(c)) for c in self.den.coeffs()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Scalar":
        return cls([int(c) for c in data["num"]], [int(c) for c in data["den"]])

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        shift = _monomial_degree(self.den)
        if shift is not None:
            return _laurent_str(self.num, shift)
        return f"({_laurent_str(self.num, 0)})/({_laurent_str(self.den, 0)})"


def _canonical(num: fmpz_poly, den: fmpz_poly):
    if num.is_zero():
        return _P_ZERO, _P_ONE
    g = num.gcd(den)
    if not g.is_one():
        num = num // g
        den = den // g
    if den.leading_coefficient() < 0:
        num, den = -num, -den
    return num, den


def _monomial_degree(p: fmpz_poly):
    coeffs = p.coeffs()
    if coeffs and coeffs[-1] == 1 and all(c == 0 for c in coeffs[:-1]):
        return len(coeffs) - 1
    return None


def _laurent_str(p: fmpz_poly, shift: int) -> str:
    parts = []
    for i, c in reversed(list(enumerate(p.coeffs()))):
        c = int(c)
        if c == 0:
            continue
        e = i - shift
        if e == 0:
            mono = str(abs(c))
        else:
            base = "q" if e == 1 else f"q^{e}"
            mono = base if abs(c) == 1 else f"{abs(c)}*{base}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, mono))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, mono in parts[1:]:
        out += f" {sign} {mono}"
    return out


def as_scalar(x):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, int):
        return Scalar._raw(fmpz_poly([x]), _P_ONE) if x else ZERO
    return NotImplemented


ZERO = Scalar._raw(_P_ZERO, _P_ONE)
ONE = Scalar._raw(_P_ONE, _P_ONE)


@lru_cache(maxsize=None)
def qpow(k: int) -> Scalar:
    """``q**k`` for any integer ``k``."""
    if k >= 0:
        return Scalar._raw(fmpz_poly([0] * k + [1]), _P_ONE)
    return Scalar._raw(_P_ONE, fmpz_poly([0] * (-k) + [1]))


q = qpow(1)


def q_integer(r: int, base: Scalar = q) -> Scalar:
    """The q-integer ``[r]_base = 1 + base + ... + base**(r-1)``, with ``[0] = 1``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return ONE
    base = as_scalar(base)
    total, power = ZERO, ONE
    for _ in range(r):
        total = total + power
        power = power * base
    return total


def q_factorial(r: int, base: Scalar = q) -> Scalar:
    out = ONE
    for i in range(1, r + 1):
        out = out * q_integer(i, base)
    return out


@lru_cache(maxsize=None)
def cauchon_coeff(r: int) -> Scalar:
    """Series coefficient ``(1 - q^-2)^-r / [r]_{q^-2}!`` used when deleting a derivation."""
    qi2 = qpow(-2)
    return (ONE - qi2) ** (-r) / q_factorial(r, qi2)
