import json
from fractions import Fraction

import pytest

from hermdense.arith import FScalar
from hermdense.errors import (
    NotIntegral,
    OddPrimeRequired,
    OddRank,
    SplitClass,
)
from hermdense.lattice import (
    diagonal_lattice,
    orthogonal_direct_sum,
    rescale_basis,
    scale_form,
    standard_I1,
)
from hermdense.identities import (
    VerificationReport,
    check_analytic_reduction,
    check_factorization,
    check_rank1,
    int_y,
    int_z_even,
    load_manifest,
    nonsplit_unit,
    run_suite,
)


def test_int_y_examples():
    assert int_y(diagonal_lattice(3, [3])) == 2
    assert int_y(standard_I1(3, 2)) == 1
    with pytest.raises(SplitClass):
        int_y(standard_I1(3, 1))


def test_int_z_even():
    L = diagonal_lattice(3, [2, 3])
    assert int_z_even(rescale_basis(L, FScalar.pi(3))) == int_y(L) == 4
    with pytest.raises(OddRank):
        int_z_even(standard_I1(3, 2))
    with pytest.raises(NotIntegral):
        int_z_even(orthogonal_direct_sum(standard_I1(3, 2), standard_I1(3, -1)))


def test_analytic_reduction_reports():
    rep = check_analytic_reduction(standard_I1(3, 2))
    assert rep.passed and rep.lhs == 1 and rep.rhs == 1
    rep = check_analytic_reduction(diagonal_lattice(3, [3]))
    assert rep.passed and rep.lhs == 2 and rep.rhs == 2
    assert rep.diagnostics["dDen_Lsharp"] == 4
    with pytest.raises(SplitClass):
        check_analytic_reduction(standard_I1(3, 1))


def test_factorization_report():
    rep = check_factorization(standard_I1(3, 1), [0, 1])
    assert rep.passed
    pts = rep.diagnostics["points"]
    assert pts[0]["factor"] == Fraction(8, 9)
    assert pts[1]["factor"] == Fraction(80, 81)
    assert pts[0]["lhs"] == pts[0]["rhs"]


def test_rank1_reports():
    assert check_rank1(0, 2, 3).passed
    assert check_rank1(1, 1, 3).passed
    rep = check_rank1(2, 2, 3)
    assert rep.passed and rep.lhs == 3
    with pytest.raises(SplitClass):
        check_rank1(0, 1, 3)  # <1> is split: bad test parameter


def test_nonsplit_unit_choice():
    assert nonsplit_unit(3, 1) == 1  # 3 = 3 mod 4
    assert nonsplit_unit(5, 1) == 2  # -1 is a residue mod 5
    assert nonsplit_unit(3, 0) == 2
    assert nonsplit_unit(5, 0) == 2


def test_report_json_shape():
    rep = check_rank1(0, 2, 3)
    data = rep.to_json_dict()
    assert list(data.keys()) == ["identity", "inputs", "lhs", "rhs", "pass", "diagnostics"]
    assert data["lhs"] == "1"
    json.dumps(data)  # serializable
    assert "PASS" in rep.line()


def test_manifest_versioned():
    man = load_manifest()
    assert man["version"] == 1
    ids = [item["id"] for item in man["items"]]
    assert len(ids) == len(set(ids))
    for item in man["items"]:
        assert "identity" in item


def test_run_suite_p3():
    reports = run_suite(3, include_stretch=False)
    assert all(r.passed for r in reports)
    man = load_manifest()
    expected = [i for i in man["items"] if not i.get("stretch")]
    assert len(reports) == len(expected)
    # reports come back in manifest order
    assert [r.identity for r in reports] == [i["identity"] for i in expected]


def test_run_suite_rejects_even_prime():
    with pytest.raises(OddPrimeRequired):
        run_suite(2)


def test_run_suite_starved_budget():
    from hermdense.density import clear_caches

    clear_caches()
    reports = run_suite(3, budget=10, include_stretch=False)
    assert any(r.passed is None for r in reports)
    assert not any(r.passed is False for r in reports)
