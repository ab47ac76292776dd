from fractions import Fraction

import pytest

from hermdense.errors import (
    CountInfeasible,
    NotIntegral,
    NotStabilized,
    RankOrder,
    SplitClass,
)
from hermdense.lattice import (
    diagonal_lattice,
    from_rows,
    fsc,
    orthogonal_direct_sum,
    standard_H,
    standard_I1,
    standard_Mn,
)
from hermdense.density import (
    CountRequest,
    count_homs,
    density_polynomial,
    density_series,
    derived_density,
    local_density,
    selfdual_density_closed_form,
    stabilization_floor,
    whittaker_value,
)

from conftest import conjugated, random_unimodular


P3 = 3


def I1(eps=1, p=P3):
    return standard_I1(p, eps)


def test_count_frozen_examples():
    assert count_homs(I1(), I1(), 1) == 6
    assert count_homs(I1(), I1(), 2) == 18
    assert count_homs(I1(-1), standard_H(3), 1) == 24


def test_count_request_validation():
    with pytest.raises(RankOrder):
        CountRequest(standard_H(3), I1(), 1)
    with pytest.raises(NotIntegral):
        CountRequest(diagonal_lattice(3, [Fraction(1, 3)]), I1(), 1)
    with pytest.raises(ValueError):
        CountRequest(I1(), I1(), 0)


def test_strategies_agree_small():
    cases = [
        (I1(), I1(), 1),
        (I1(), I1(), 2),
        (I1(-1), standard_H(3), 1),
        (I1(-1), standard_H(3), 2),
        (I1(2), standard_Mn(3, 3), 1),
        (diagonal_lattice(3, [3]), standard_Mn(3, 1), 2),
    ]
    for L, M, d in cases:
        vals = {
            s: count_homs(L, M, d, strategy=s)
            for s in ("brute", "backtrack", "histogram", "hensel")
        }
        assert len(set(vals.values())) == 1, (L, M, d, vals)


def test_rank2_strategies_agree_small():
    H = standard_H(3)
    H2 = standard_H(3, 2)
    for L in (
        orthogonal_direct_sum(I1(2), I1(-1)),
        orthogonal_direct_sum(I1(1), I1(-1)),
        orthogonal_direct_sum(diagonal_lattice(3, [3]), I1(-1)),
    ):
        for M, d in ((H, 1), (H, 2), (H2, 1)):
            fib = count_homs(L, M, d, strategy="fibration")
            bt = count_homs(L, M, d, strategy="backtrack")
            assert fib == bt, (L, M, d)
            if (3 ** (2 * d)) ** (M.rank * L.rank) <= 10**5:
                assert fib == count_homs(L, M, d, strategy="brute")


def test_hyperbolic_source_counts():
    # L = H into itself: the self-dual rank-2 density
    H = standard_H(3)
    assert count_homs(H, H, 1) == 72  # (1 - q^-2) * q^4
    s = density_series(H, H, 2)
    assert s.stabilized_at == 1
    assert s.value() == Fraction(8, 9)


def test_pi_scaled_congruence_matches_direct_reduction():
    # the counting condition compares pi*h mod pi^(2d); exhibit equivalence
    # with the direct congruence h(phi x, phi y) = h(x, y) mod pi^(2d-1)
    # on the hyperbolic target by full enumeration over canonical lifts
    p = 3
    L, M = I1(-1), standard_H(p)
    for d in (1, 2):
        m = p**d
        expected = count_homs(L, M, d)
        direct = 0
        for a1 in range(m):
            for b1 in range(m):
                for a2 in range(m):
                    for b2 in range(m):
                        x = (fsc(p, a1, b1), fsc(p, a2, b2))
                        hval = M.pair(x, x)
                        diff = hval - L.gram[0][0]
                        if diff.valuation() >= 2 * d - 1:
                            direct += 1
        assert direct == expected, d


def test_count_invariant_under_base_change(rng):
    for _ in range(8):
        p = 3
        L = I1(rng.choice([1, -1, 2]))
        M = rng.choice([standard_H(p), standard_Mn(p, 3)])
        d = rng.choice([1, 2])
        base = count_homs(L, M, d)
        V = random_unimodular(rng, p, M.rank)
        assert count_homs(L, conjugated(M, V), d, strategy="backtrack") == base
        U = random_unimodular(rng, p, 1)
        assert count_homs(conjugated(L, U), M, d) == base


def test_local_density_examples():
    assert local_density(I1(), I1()) == 2
    assert local_density(standard_H(3), standard_H(3)) == Fraction(8, 9)
    assert local_density(standard_H(3), I1(-1)) == Fraction(8, 9)
    assert local_density(I1(), I1(), d_max=3, strategy="backtrack") == 2


def test_local_density_p5():
    assert local_density(standard_I1(5, 1), standard_I1(5, 1)) == 2
    assert local_density(standard_H(5), standard_H(5)) == Fraction(24, 25)


def test_not_stabilized_and_floor():
    with pytest.raises(NotStabilized):
        local_density(I1(), I1(), d_max=1)
    # <18> has valuation 5: ratios at d = 1, 2 agree spuriously at 1
    L18 = diagonal_lattice(3, [18])
    assert stabilization_floor(L18) == 3
    naive = density_series(standard_Mn(3, 1), L18, 2)
    assert naive.stabilized_at == 1 and naive.value() == 1  # the trap
    guarded = density_series(standard_Mn(3, 1), L18, 5, d_min=3)
    assert guarded.stabilized_at == 3
    assert guarded.value() == 0


def test_budget_guard():
    with pytest.raises(CountInfeasible):
        count_homs(I1(-1), standard_H(3, 4), 3, strategy="backtrack", budget=1000)


def test_density_polynomial_examples():
    # Den(M2, I1^-1, X) = 1 - X/9
    P = density_polynomial(standard_Mn(3, 2), I1(-1))
    assert P.coeffs == (Fraction(1), Fraction(-1, 9))
    # Den(M1, I1^1, X): the k = 0 grid value is the self-dual density 2
    P = density_polynomial(standard_Mn(3, 1), I1(1))
    assert dict(P.grid)[0] == 2
    # Den(M1, <eps>, X) has P(1) = 0 and P'(1) = -1
    P = density_polynomial(standard_Mn(3, 1), I1(2))
    assert P.evaluate(1) == 0
    assert P.derivative_at(1) == -1
    for k, v in P.grid:
        assert P.evaluate(Fraction(1, 3 ** (2 * k))) == v


def test_selfdual_closed_form():
    assert selfdual_density_closed_form(2, 3) == Fraction(8, 9)
    assert selfdual_density_closed_form(1, 3) == 2
    assert selfdual_density_closed_form(3, 3) == Fraction(16, 9)
    assert selfdual_density_closed_form(4, 3) == Fraction(8, 9) * (1 - Fraction(1, 81))


def test_derived_density_examples():
    assert derived_density(I1(2)) == 1
    assert derived_density(diagonal_lattice(3, [3])) == 2
    with pytest.raises(SplitClass):
        derived_density(I1(1))


def test_derived_density_stretch():
    assert derived_density(diagonal_lattice(3, [2 * 9])) == 3


def test_whittaker_examples():
    assert whittaker_value(I1(1), 0) == 2
    assert whittaker_value(I1(-1), 0) == 0  # central value vanishes, nonsplit
    assert whittaker_value(I1(-1), 0, comparison_rank=2) == Fraction(8, 9)
    assert whittaker_value(I1(-1), 1, comparison_rank=2) == Fraction(80, 81)
    with pytest.raises(ValueError):
        whittaker_value(I1(1), -1)


def test_hensel_cross_check():
    # the optional smooth-lifting counter agrees with the histograms
    for L in (I1(1), I1(-1), I1(2), diagonal_lattice(3, [3]), diagonal_lattice(3, [18])):
        for M in (standard_Mn(3, 1), standard_H(3), standard_Mn(3, 3)):
            for d in (1, 2, 3):
                assert count_homs(L, M, d, strategy="hensel") == count_homs(
                    L, M, d, strategy="histogram"
                ), (L, M, d)


def test_general_target_blocks():
    # a non-block-shaped integral target goes through the mod-precision
    # reduction; cross-check against brute force
    M = from_rows(3, [[1, (0, Fraction(1, 3))], [(0, Fraction(-1, 3)), 1]])
    for d in (1, 2):
        assert count_homs(I1(1), M, d) == count_homs(I1(1), M, d, strategy="brute")
        assert count_homs(I1(-1), M, d) == count_homs(I1(-1), M, d, strategy="brute")


def test_workers_do_not_change_counts():
    a = count_homs(I1(-1), standard_H(3), 2, strategy="backtrack", workers=1)
    b = count_homs(I1(-1), standard_H(3), 2, strategy="backtrack", workers=4)
    assert a == b
