#!/usr/bin/env python3
"""Derived densities, the rank-lowering identity, and intersection numbers.

For a nonsplit lattice L the density Den(M_n, L) vanishes at the central
point X = 1; the derived density is the normalized slope
-2 P'(1) / Den(M_n, M_n).  For rank one, <u * p^a> has derived density
a + 1, and every value below doubles when <-1> is glued on.
"""

from hermdense import (
    FScalar,
    check_analytic_reduction,
    check_factorization,
    derived_density,
    diagonal_lattice,
    int_y,
    int_z_even,
    orthogonal_direct_sum,
    rescale_basis,
    run_suite,
    scale_form,
    standard_I1,
)

p = 3
eps = 2  # non-residue unit mod 3

print("== rank one: derived density is a + 1 ==")
for a in (0, 1, 2):
    L = diagonal_lattice(p, [eps * p**a]) if a != 1 else diagonal_lattice(p, [p])
    print(f"  a = {a}: dDen = {derived_density(L)}")

print("\n== the rank-lowering identity ==")
for L, name in [(standard_I1(p, eps), "<eps>"), (diagonal_lattice(p, [p]), "<p>")]:
    rep = check_analytic_reduction(L)
    print(f"  dDen({name}) = {rep.lhs} = dDen({name} + <-1>)/2 = {rep.rhs}: "
          f"{rep.status}")

print("\n== its pointwise engine: a linear factor splits off ==")
rep = check_factorization(standard_I1(p, 1), [0, 1])
for pt in rep.diagnostics["points"]:
    print(f"  k={pt['k']}: Den(M_2+H^k, <1>+<-1>) = {pt['lhs']} = "
          f"Den(M_1+H^k, <1>) * (1 - q^(-2-2k)) = {pt['rhs']}")

print("\n== intersection numbers through the proven equalities ==")
L = diagonal_lattice(p, [eps, p])
print("int_y(diag(eps, p))          =", int_y(L))
print("int_z(pi * diag(eps, p))     =", int_z_even(rescale_basis(L, FScalar.pi(p))))
print("sign flip leaves it fixed    =", derived_density(scale_form(L, -1)))

print("\n== the full identity battery ==")
for rep in run_suite(p, include_stretch=False):
    print(" ", rep.line())
