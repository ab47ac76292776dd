#!/usr/bin/env python3
"""Tour of the base field F = Q_p(pi), pi^2 = p, with exact rationals.

Everything in this library runs on elements a + b*pi where a, b are exact
fractions; conjugation flips the sign of pi, the valuation of pi is 1, and
the norm form is a^2 - p*b^2.
"""

from fractions import Fraction

from hermdense import FScalar, is_norm, norm_to_F0, smallest_nonresidue

p = 3
pi = FScalar.pi(p)
one = FScalar.one(p)

print("== the uniformizer ==")
print(f"pi            = {pi}")
print(f"pi^2          = {pi * pi}           (equals p = {p})")
print(f"conj(pi)      = {pi.conj()}        (the Galois involution)")
print(f"val(pi)       = {pi.valuation()},  val(p) = {FScalar.make(p, p).valuation()}")

print("\n== arithmetic is exact ==")
x = FScalar.make(p, Fraction(2, 9), Fraction(-1, 3))
print(f"x             = {x}")
print(f"val(x)        = {x.valuation()}   (min of 2*val(a), 2*val(b)+1)")
print(f"x * conj(x)   = {norm_to_F0(x)}   (always lands in F_0 = Q_p)")
print(f"1/x           = {one / x}")
print(f"x * (1/x)     = {x * (one / x)}")

print("\n== the norm group has index two ==")
print(f"Nm(pi) = {norm_to_F0(pi)}, so -p is a norm: {is_norm(-p, p)}")
eps = smallest_nonresidue(p)
print(f"the unit {eps} is a quadratic non-residue mod {p}, hence not a norm: "
      f"{is_norm(eps, p)}")
print(f"products: is_norm({eps} * {eps}) = {is_norm(eps * eps, p)} "
      "(non-norm times non-norm is a norm)")
print(f"p itself: is_norm({p}) = {is_norm(p, p)}  "
      "(true exactly when -1 is a residue, i.e. p = 1 mod 4)")

print("\n== finite quotients O_F / pi^(2d) ==")
y = FScalar.make(p, 1, p)  # 1 + p*pi, which is 1 + pi^3
for d in (1, 2):
    print(f"reduce(1 + p*pi, d={d}) = {y.reduce(d)}")
r = FScalar.make(p, 2, 1).reduce(2)
s = FScalar.make(p, -1, 4).reduce(2)
print(f"ring ops commute with reduction: {(r * s)} vs "
      f"{(FScalar.make(p, 2, 1) * FScalar.make(p, -1, 4)).reduce(2)}")
