#!/usr/bin/env python3
"""Counting hermitian module homomorphisms over O_F/pi^(2d), exactly.

The local density Den(M, L) is the stabilized value of
|Herm_{L,M}(O_{F0}/p^d)| / q^(d*n*(2m-n)); the density polynomial
interpolates Den(H^k + M, L) in X = q^(-2k).
"""

from fractions import Fraction

from hermdense import (
    count_homs,
    density_polynomial,
    density_series,
    diagonal_lattice,
    local_density,
    orthogonal_direct_sum,
    selfdual_density_closed_form,
    standard_H,
    standard_I1,
    standard_Mn,
    whittaker_value,
)

p = 3
I1 = standard_I1(p, 1)
Im1 = standard_I1(p, -1)
H = standard_H(p)

print("== raw counts ==")
print("hom counts <1> -> <1>:", [(d, count_homs(I1, I1, d)) for d in (1, 2, 3)])
print("the d=1 solutions are the 6 residues with a^2 = 1 mod 3")
print("hom count <-1> -> H at d=1:", count_homs(Im1, H, 1),
      "(the 2x2 determinant-one count over F_3)")

print("\n== stabilized densities ==")
s = density_series(I1, I1, 3)
print("series for Den(<1>, <1>):", [(d, str(r)) for d, r in s.ratios],
      "-> stabilized at d =", s.stabilized_at)
print("Den(H, H)   =", local_density(H, H), "=", selfdual_density_closed_form(2, p))
print("Den(H, <-1>) =", local_density(H, Im1), "= 1 - q^-2")

print("\n== counting strategies agree ==")
for strat in ("brute", "backtrack", "histogram", "hensel"):
    print(f"  {strat:10s}", count_homs(Im1, H, 2, strategy=strat))

print("\n== density polynomials ==")
P = density_polynomial(standard_Mn(p, 2), Im1)
print("Den(M_2, <-1>, X) =", [str(c) for c in P.coeffs], "(i.e. 1 - X/9)")
P = density_polynomial(standard_Mn(p, 1), diagonal_lattice(p, [p]))
print("Den(M_1, <p>, X)  =", [str(c) for c in P.coeffs], "(i.e. 1 - X^2)")
print("grid values:", [(k, str(v)) for k, v in P.grid])
print("each grid value is reproduced exactly at X = q^(-2k):",
      all(P.evaluate(Fraction(1, p ** (2 * k))) == v for k, v in P.grid))

print("\n== Fourier-coefficient values ==")
print("W(0) for T = (1):", whittaker_value(I1, 0))
print("W(0) for T = (-1):", whittaker_value(Im1, 0),
      "(the central value vanishes for the nonsplit class)")
print("even-chain values for T = (-1):",
      [str(whittaker_value(Im1, s, comparison_rank=2)) for s in (0, 1, 2)])
