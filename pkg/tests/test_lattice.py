from fractions import Fraction

import pytest

from hermdense.arith import FScalar
from hermdense.errors import (
    Degenerate,
    InPiM,
    NotIntegral,
    NotInLattice,
    ParamMismatch,
)
from hermdense.lattice import (
    HermLattice,
    block_layout,
    conj_transpose,
    diagonal_lattice,
    dual,
    from_rows,
    fsc,
    fundamental_invariants,
    invariants_via_dual_quotient,
    is_integral,
    mat_mul,
    normal_form,
    orthogonal_complement_in_Hs,
    orthogonal_direct_sum,
    rescale_basis,
    same_isometry_class_as_Mn,
    scale_form,
    smith_valuations,
    standard_H,
    standard_I1,
    standard_Mn,
    star_dual,
    val_lattice,
)

from conftest import conjugated, random_integral_lattice, random_lattice_with_exact_witness, random_unimodular


def test_standard_lattices():
    H = standard_H(3)
    assert H.rank == 2
    assert H.gram[0][1] == fsc(3, 0, Fraction(1, 3))
    assert H.gram[1][0] == fsc(3, 0, Fraction(-1, 3))
    M2 = standard_Mn(3, 2)
    assert M2.gram == H.gram
    M3 = standard_Mn(3, 3)
    assert M3.rank == 3
    assert M3.gram[2][2] == fsc(3, 1)
    with pytest.raises(Degenerate):
        standard_H(3, 0)
    with pytest.raises(ValueError):
        standard_I1(3, 3)  # not a unit


def test_lattice_validation():
    with pytest.raises(ValueError):
        from_rows(3, [[1, 1], [0, 1]])  # not hermitian
    with pytest.raises(Degenerate):
        from_rows(3, [[1, 1], [1, 1]])
    with pytest.raises(ParamMismatch):
        orthogonal_direct_sum(standard_H(3), standard_H(5))


def test_is_integral():
    assert is_integral(standard_H(3))
    assert not is_integral(diagonal_lattice(3, [Fraction(1, 3)]))
    assert is_integral(orthogonal_direct_sum(standard_I1(3, 1), standard_H(3)))


def test_normal_form_examples():
    # <eps * p> is a single unit block with b = 1
    L = diagonal_lattice(3, [2 * 3])
    nf = normal_form(L)
    assert nf.layout == (("unit", Fraction(2), 1),)
    # H is one hyperbolic block with c = 0
    assert normal_form(standard_H(3)).layout == (("hyp", 0),)
    # the mixed Gram ((1, pi^-1), (-pi^-1, 1)) reduces to a hyperbolic plane
    L = from_rows(3, [[1, (0, Fraction(1, 3))], [(0, Fraction(-1, 3)), 1]])
    nf = normal_form(L)
    assert nf.layout == (("hyp", 0),)
    assert fundamental_invariants(L) == invariants_via_dual_quotient(L) == (0, 0)


def test_normal_form_congruence_is_exact():
    L = from_rows(3, [[1, (0, Fraction(1, 3))], [(0, Fraction(-1, 3)), 1]])
    nf = normal_form(L)
    got = mat_mul(mat_mul(nf.base_change, L.gram), conj_transpose(nf.base_change))
    assert got == nf.block_gram()


def test_fundamental_invariants_examples():
    assert fundamental_invariants(standard_H(3)) == (0, 0)
    assert val_lattice(standard_H(3)) == 0
    assert fundamental_invariants(standard_I1(3, 1)) == (1,)
    assert fundamental_invariants(diagonal_lattice(3, [3])) == (3,)
    assert val_lattice(diagonal_lattice(3, [3])) == 3
    with pytest.raises(NotIntegral):
        fundamental_invariants(diagonal_lattice(3, [Fraction(1, 3)]))


def test_dual_examples():
    H = standard_H(3)
    assert dual(H).gram == H.gram  # self-dual
    D = dual(standard_I1(3, 1))
    assert D.gram[0][0] == fsc(3, Fraction(-1, 3))
    # L^* = pi L^v has the inverse Gram
    assert star_dual(standard_I1(3, 1)).gram[0][0] == fsc(3, 1)


def test_dual_is_involutive_on_random_lattices(rng):
    # -(-T^-1/p)^-1/p = T, so the double dual returns the exact Gram
    for _ in range(20):
        L = random_integral_lattice(rng, rng.choice([3, 5]), rng.randint(1, 3))
        assert dual(dual(L)).gram == L.gram


def test_dual_quotient_matches_invariants(rng):
    for _ in range(20):
        L = random_integral_lattice(rng, rng.choice([3, 5]), rng.randint(1, 3))
        assert fundamental_invariants(L) == invariants_via_dual_quotient(L)


def test_scale_and_rescale():
    L = rescale_basis(standard_I1(3, 1), FScalar.pi(3))
    assert L.gram[0][0] == fsc(3, -3)  # h(pi e, pi e) = Nm(pi) = -p
    Lneg = scale_form(standard_H(3), -1)
    assert Lneg.gram[0][1] == fsc(3, 0, Fraction(-1, 3))
    S = orthogonal_direct_sum(standard_I1(3, 2), standard_I1(3, -1))
    assert S.rank == 2 and S.gram[0][0] == fsc(3, 2) and S.gram[1][1] == fsc(3, -1)


def test_isometry_class():
    assert same_isometry_class_as_Mn(standard_I1(3, 1))
    assert not same_isometry_class_as_Mn(standard_I1(3, 2))
    assert same_isometry_class_as_Mn(standard_H(3))
    assert not same_isometry_class_as_Mn(diagonal_lattice(3, [3]))
    assert same_isometry_class_as_Mn(diagonal_lattice(5, [5]))  # -1 square mod 5


def test_invariants_are_base_change_invariant(rng):
    for _ in range(20):
        p = rng.choice([3, 5])
        L = random_integral_lattice(rng, p, rng.randint(1, 3))
        U = random_unimodular(rng, p, L.rank)
        assert fundamental_invariants(conjugated(L, U)) == fundamental_invariants(L)


def test_normal_form_exact_on_random_lattices(rng):
    for _ in range(20):
        p = rng.choice([3, 5])
        L, _ = random_lattice_with_exact_witness(rng, p, rng.randint(1, 3))
        nf = normal_form(L)
        got = mat_mul(mat_mul(nf.base_change, L.gram), conj_transpose(nf.base_change))
        assert got == nf.block_gram()
        assert block_layout(L) is not None


def test_smith_valuations():
    pi = FScalar.pi(3)
    M = ((pi * pi, fsc(3, 0)), (fsc(3, 0), fsc(3, 1)))
    assert smith_valuations(M) == [0, 2]
    with pytest.raises(Degenerate):
        smith_valuations(((fsc(3, 0),),))


# ---------------------------------------------------------------------------
# the orthogonal complement construction in H^s


def _phi(p, coords):
    return tuple(fsc(p, a, b) for a, b in coords)


def test_complement_isotropic_phi():
    p = 3
    res = orthogonal_complement_in_Hs(1, _phi(p, [(1, 0), (0, 0)]))
    assert res.beta == 0 and res.colength is None
    assert res.phi_prime == _phi(p, [(1, 0), (0, 0)])
    assert res.gram[0][0].is_zero()


def test_complement_anisotropic_example():
    p = 3
    res = orthogonal_complement_in_Hs(1, _phi(p, [(1, 0), (0, 1)]))  # e1 + pi f1
    assert res.beta == -2
    assert res.phi_prime == _phi(p, [(1, 0), (0, -1)])  # e1 - pi f1
    assert res.gram[0][0] == fsc(p, 2)
    assert res.colength == 1


def test_complement_s2_isotropic():
    p = 3
    res = orthogonal_complement_in_Hs(2, _phi(p, [(1, 0), (0, 0), (0, 0), (0, 0)]))
    assert res.beta == 0
    # basis sigma_2, tau_2, phi' spans e2, f2, e1 with Gram H + <0>
    H = standard_H(p)
    assert res.gram[0][1] == H.gram[0][1]
    assert res.gram[2][2].is_zero()


def test_complement_errors():
    p = 3
    with pytest.raises(NotInLattice):
        orthogonal_complement_in_Hs(1, _phi(p, [(Fraction(1, 3), 0), (0, 0)]))
    with pytest.raises(InPiM):
        orthogonal_complement_in_Hs(1, _phi(p, [(3, 0), (0, 3)]))


def _random_anisotropic_phi(rng, p, s):
    H = standard_H(p, s)
    while True:
        coords = tuple(
            fsc(p, rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(2 * s)
        )
        vals = [c.valuation() for c in coords]
        if min(vals) != 0:
            continue
        beta = H.pair(coords, coords)
        if not beta.is_zero():
            return coords


def test_complement_random_orthogonality_and_colength(rng):
    # exact orthogonality, exact Gram shape, and the co-length witness
    # 1 + val_pi(beta), cross-checked through elementary divisors
    for _ in range(20):
        p = rng.choice([3, 5])
        s = rng.choice([2, 3])
        phi = _random_anisotropic_phi(rng, p, s)
        H = standard_H(p, s)
        res = orthogonal_complement_in_Hs(s, phi)
        for v in res.basis:
            assert H.pair(v, phi).is_zero()
        # Gram is exactly H^(s-1) + <-beta>
        expected = orthogonal_direct_sum(standard_H(p, s - 1), diagonal_lattice(p, [-res.beta])) \
            if s > 1 else diagonal_lattice(p, [-res.beta])
        assert res.gram == expected.gram
        # phi' agrees with phi modulo pi
        diff = tuple(a - b for a, b in zip(res.phi_prime, phi))
        assert all(x.valuation() >= 1 for x in diff)
        assert H.pair(res.phi_prime, res.phi_prime).a == -res.beta
        # independent co-length: elementary divisors of the inclusion matrix
        inclusion = res.basis + (phi,)
        assert res.colength == sum(smith_valuations(inclusion))
        assert res.colength == 1 + 2 * _val_p_frac(res.beta, p)


def _val_p_frac(r, p):
    from hermdense.arith import val_p

    return val_p(r, p)
