"""Exact arithmetic in the ramified quadratic extension F = Q_p(pi), pi^2 = p.

Elements are written a + b*pi with exact rational a, b; the Galois
involution sends pi to -pi.  The pi-adic valuation doubles the p-adic one,
so val(a + b*pi) = min(2*val_p(a), 2*val_p(b) + 1).  Everything here is
pure and immutable; no floating point is used anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotIntegral, OddPrimeRequired

INF = math.inf


def is_odd_prime(p: int) -> bool:
    if not isinstance(p, int) or p < 3 or p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def val_p(r, p: int):
    """p-adic valuation of a rational; INF for zero."""
    r = Fraction(r)
    if r == 0:
        return INF
    v = 0
    num, den = r.numerator, r.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def legendre_symbol(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    s = pow(a, (p - 1) // 2, p)
    return 1 if s == 1 else -1


def unit_part(r, p: int) -> Fraction:
    """Write r = p^v * u with u a p-adic unit and return u."""
    r = Fraction(r)
    if r == 0:
        raise ZeroDivisionError("0 has no unit part")
    return r / Fraction(p) ** val_p(r, p)


def is_norm(beta, p: int) -> bool:
    """Whether a nonzero rational is a norm from F = Q_p(sqrt(p)).

    Norms of units are exactly the units that are squares mod p, and -p is
    the norm of pi; hence p^v * u is a norm iff (-1)^v * u is a square
    mod p.
    """
    beta = Fraction(beta)
    if beta == 0:
        raise ZeroDivisionError("is_norm is undefined at 0")
    v = val_p(beta, p)
    u = unit_part(beta, p)
    if v % 2:
        u = -u
    # u is a p-adic unit; reduce the fraction mod p
    num = u.numerator % p
    den_inv = pow(u.denominator % p, -1, p)
    return legendre_symbol(num * den_inv, p) == 1


def smallest_nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue mod p (a non-norm unit)."""
    for u in range(2, p):
        if legendre_symbol(u, p) == -1:
            return u
    raise OddPrimeRequired(f"{p} has no non-residue; not an odd prime?")


@dataclass(frozen=True)
class PrimeParams:
    """The base prime; the residue field is F_p, so q = p here."""

    p: int

    def __post_init__(self):
        if not is_odd_prime(self.p):
            raise OddPrimeRequired(f"p must be an odd prime >= 3, got {self.p}")

    @property
    def q(self) -> int:
        return self.p


@dataclass(frozen=True)
class FScalar:
    """An element a + b*pi of F with exact rational coefficients."""

    p: int
    a: Fraction
    b: Fraction

    @staticmethod
    def make(p: int, a=0, b=0) -> "FScalar":
        return FScalar(p, Fraction(a), Fraction(b))

    @staticmethod
    def zero(p: int) -> "FScalar":
        return FScalar.make(p)

    @staticmethod
    def one(p: int) -> "FScalar":
        return FScalar.make(p, 1)

    @staticmethod
    def pi(p: int) -> "FScalar":
        return FScalar.make(p, 0, 1)

    def _coerce(self, other) -> "FScalar":
        if isinstance(other, FScalar):
            if other.p != self.p:
                raise ValueError("mixed primes in scalar arithmetic")
            return other
        return FScalar.make(self.p, Fraction(other))

    def __add__(self, other):
        o = self._coerce(other)
        return FScalar(self.p, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FScalar(self.p, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return FScalar(self.p, -self.a, -self.b)

    def __mul__(self, other):
        o = self._coerce(other)
        return FScalar(
            self.p,
            self.a * o.a + self.p * self.b * o.b,
            self.a * o.b + self.b * o.a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in F")
        # 1/x = conj(x)/Nm(x)
        return self * FScalar(o.p, o.a / n, -o.b / n)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def conj(self) -> "FScalar":
        return FScalar(self.p, self.a, -self.b)

    def norm(self) -> Fraction:
        """x * conj(x) = a^2 - p*b^2, an element of F_0."""
        return self.a * self.a - self.p * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def valuation(self):
        """pi-adic valuation; INF for 0."""
        if self.a == 0 and self.b == 0:
            return INF
        va = val_p(self.a, self.p)
        vb = val_p(self.b, self.p)
        return min(2 * va if va != INF else INF, 2 * vb + 1 if vb != INF else INF)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_integral(self) -> bool:
        return self.valuation() >= 0

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def reduce(self, d: int) -> "ResidueElem":
        """Class in O_F/pi^(2d) = (Z/p^d) + (Z/p^d)*pi.  Requires integrality."""
        if d < 1:
            raise ValueError("precision d must be >= 1")
        if self.valuation() < 0:
            raise NotIntegral(f"{self} is not integral")
        m = self.p**d
        return ResidueElem(self.p, d, _rat_mod(self.a, m, self.p), _rat_mod(self.b, m, self.p))

    def to_json(self):
        return [_frac_str(self.a), _frac_str(self.b)]

    @staticmethod
    def from_json(p: int, data) -> "FScalar":
        if not isinstance(data, (list, tuple)) or len(data) != 2:
            raise ValueError(f"scalar must be a two-element array, got {data!r}")
        return FScalar(p, _parse_frac(data[0]), _parse_frac(data[1]))

    def __str__(self):
        if self.b == 0:
            return _frac_str(self.a)
        if self.a == 0:
            return f"{_frac_str(self.b)}*pi"
        return f"{_frac_str(self.a)} + {_frac_str(self.b)}*pi"

    def __repr__(self):
        return f"FScalar(p={self.p}, {self})"


def _frac_str(r: Fraction) -> str:
    return str(r)


def _parse_frac(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s)
    if isinstance(s, int):
        return Fraction(s)
    raise ValueError(f"expected exact rational string, got {s!r}")


def _rat_mod(r: Fraction, m: int, p: int) -> int:
    """Reduce a rational with p-unit denominator modulo m = p^d."""
    den = r.denominator
    if den % p == 0:
        raise NotIntegral(f"{r} has a p in its denominator")
    return (r.numerator % m) * pow(den % m, -1, m) % m


def norm_to_F0(x: FScalar) -> Fraction:
    return x.norm()


def conj(x: FScalar) -> FScalar:
    return x.conj()


def valuation(x: FScalar):
    return x.valuation()


@dataclass(frozen=True)
class ResidueElem:
    """Class of an integral scalar in O_F/pi^(2d), stored as a pair mod p^d."""

    p: int
    d: int
    a: int
    b: int

    def __post_init__(self):
        m = self.p**self.d
        object.__setattr__(self, "a", self.a % m)
        object.__setattr__(self, "b", self.b % m)

    def _check(self, other):
        if (other.p, other.d) != (self.p, self.d):
            raise ValueError("mixed residue rings")

    def __add__(self, other):
        self._check(other)
        return ResidueElem(self.p, self.d, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        self._check(other)
        return ResidueElem(self.p, self.d, self.a - other.a, self.b - other.b)

    def __neg__(self):
        return ResidueElem(self.p, self.d, -self.a, -self.b)

    def __mul__(self, other):
        self._check(other)
        return ResidueElem(
            self.p,
            self.d,
            self.a * other.a + self.p * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    def conj(self):
        return ResidueElem(self.p, self.d, self.a, -self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __str__(self):
        return f"({self.a}, {self.b}) mod pi^{2 * self.d}"
