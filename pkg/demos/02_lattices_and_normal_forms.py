#!/usr/bin/env python3
"""Hermitian lattices: standard shapes, normal forms, duals, complements.

A lattice is its Gram (moment) matrix; the form is linear in the first
argument and conjugate-linear in the second, so base changes act by
U T conj-transpose(U).
"""

from fractions import Fraction

from hermdense import (
    FScalar,
    diagonal_lattice,
    dual,
    from_rows,
    fundamental_invariants,
    invariants_via_dual_quotient,
    normal_form,
    orthogonal_complement_in_Hs,
    rescale_basis,
    same_isometry_class_as_Mn,
    standard_H,
    standard_I1,
    standard_Mn,
    val_lattice,
)

p = 3

print("== standard lattices ==")
H = standard_H(p)
print("H:", H)
print("M_3 = H + <1>:", standard_Mn(p, 3))
print("self-duality: dual(H) has Gram", dual(H).gram == H.gram)

print("\n== invariants ==")
for name, L in [
    ("H", H),
    ("<1>", standard_I1(p, 1)),
    ("<p>", diagonal_lattice(p, [p])),
]:
    inv = fundamental_invariants(L)
    print(f"{name:5s} invariants {inv}, val {val_lattice(L)}, "
          f"class {'split' if same_isometry_class_as_Mn(L) else 'nonsplit'}")

print("\n== normal form with an exact witness ==")
# a dense Gram that hides a hyperbolic plane
L = from_rows(p, [[1, (0, Fraction(1, p))], [(0, Fraction(-1, p)), 1]])
nf = normal_form(L)
print("gram:", L)
print("blocks:", nf.layout)
print("base change:", nf.base_change)
print("invariants agree with the dual-quotient route:",
      fundamental_invariants(L) == invariants_via_dual_quotient(L))

print("\n== rescaling the basis by pi ==")
print("<1> rescaled by pi:", rescale_basis(standard_I1(p, 1), FScalar.pi(p)),
      "(Gram picks up Nm(pi) = -p)")

print("\n== orthogonal complement of a vector in H^s ==")
# phi = e1 + pi*f1 has norm -2; its complement in H is spanned by
# phi' = e1 - pi*f1 of norm +2
phi = (FScalar.one(p), FScalar.pi(p))
res = orthogonal_complement_in_Hs(1, phi)
print("h(phi, phi) =", res.beta)
print("phi'        =", [str(x) for x in res.phi_prime])
print("Gram of the complement:", [[str(x) for x in row] for row in res.gram])
print("co-length of M(phi) + <phi> in H:", res.colength,
      "( = 1 + val_pi(beta) )")
