"""Identity-level verifiers and the intersection-number API.

Every report compares two exactly computed rationals (or polynomial
coefficient lists); pass means literal equality, never a tolerance.

The intersection-number entry points expose geometric quantities only
through proven equalities with derived densities: int_y returns the
derived density itself (equal to the arithmetic intersection number of the
corresponding divisors on the relevant formal moduli space), and
int_z_even returns the derived density of the p^(-1)-rescaled form, which
equals the intersection number of the untwisted divisors in even rank.
The geometric side is never recomputed independently here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .arith import smallest_nonresidue, is_odd_prime, FScalar
from .errors import (
    CountInfeasible,
    NotIntegral,
    NotStabilized,
    OddPrimeRequired,
    OddRank,
    SplitClass,
)
from .lattice import (
    HermLattice,
    diagonal_lattice,
    is_integral,
    orthogonal_direct_sum,
    rescale_basis,
    scale_form,
    standard_H,
    standard_I1,
    standard_Mn,
)
from .density import (
    derived_density,
    local_density,
    selfdual_density_closed_form,
    stabilization_floor,
    whittaker_value,
)


@dataclass
class VerificationReport:
    identity: str
    inputs: dict
    lhs: object
    rhs: object
    passed: bool | None  # None when the computation was infeasible
    diagnostics: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if self.passed is None:
            return "INFEASIBLE"
        return "PASS" if self.passed else "FAIL"

    def to_json_dict(self) -> dict:
        return {
            "identity": self.identity,
            "inputs": self.inputs,
            "lhs": _jsonify(self.lhs),
            "rhs": _jsonify(self.rhs),
            "pass": self.passed,
            "diagnostics": _jsonify(self.diagnostics),
        }

    def line(self) -> str:
        return (
            f"{self.status:10s} {self.identity:24s} "
            f"lhs={_jsonify(self.lhs)} rhs={_jsonify(self.rhs)}"
        )


def _jsonify(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_jsonify(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonify(v) for k, v in x.items()}
    return x


# ---------------------------------------------------------------------------
# intersection numbers through the proven analytic equalities


def int_y(L: HermLattice, **kwargs) -> Fraction:
    """Intersection number of the degree-shifted divisors attached to L.

    Equal to the derived density for every full-rank integral lattice in a
    nonsplit space; the right side is what gets computed.
    """
    return derived_density(L, **kwargs)


def int_z_even(L: HermLattice, **kwargs) -> Fraction:
    """Even-rank intersection number of the untwisted divisors.

    Uses the normalized form h' = p^(-1) h; the rescaled lattice must stay
    integral and nonsplit.
    """
    if L.rank % 2:
        raise OddRank("z-cycle intersection numbers need even rank")
    Lh = scale_form(L, Fraction(1, L.p))
    if not is_integral(Lh):
        raise NotIntegral("lattice is not integral for the normalized form")
    return derived_density(Lh, **kwargs)


# ---------------------------------------------------------------------------
# identity checkers


def check_analytic_reduction(L: HermLattice, **kwargs) -> VerificationReport:
    """dDen(L) = 1/2 dDen(L + <-1>), the rank-reduction identity."""
    Lsharp = orthogonal_direct_sum(L, standard_I1(L.p, -1))
    lhs = derived_density(L, **kwargs)
    rhs_raw = derived_density(Lsharp, **kwargs)
    rhs = rhs_raw / 2
    return VerificationReport(
        identity="analytic_reduction",
        inputs={"p": L.p, "L": L.to_json()},
        lhs=lhs,
        rhs=rhs,
        passed=lhs == rhs,
        diagnostics={"dDen_Lsharp": rhs_raw},
    )


def check_factorization(L: HermLattice, k_list, **kwargs) -> VerificationReport:
    """Den(M_(n+1)+H^k, L+<-1>) = Den(M_n+H^k, L) * (1 - q^(-1-n-2k))."""
    p = L.p
    q = L.params.q
    n = L.rank
    Lsharp = orthogonal_direct_sum(L, standard_I1(p, -1))
    d_min = stabilization_floor(Lsharp)
    d_max = d_min + 2
    lhs_vals, rhs_vals, points = [], [], []
    ok = True
    infeasible = False
    for k in k_list:
        Mk_big = standard_Mn(p, n + 1)
        Mk_small = standard_Mn(p, n)
        if k:
            Mk_big = orthogonal_direct_sum(standard_H(p, k), Mk_big)
            Mk_small = orthogonal_direct_sum(standard_H(p, k), Mk_small)
        factor = 1 - Fraction(1, q ** (1 + n + 2 * k))
        try:
            lhs = local_density(Mk_big, Lsharp, d_max, d_min=d_min, **kwargs)
            rhs = local_density(Mk_small, L, d_max, d_min=d_min, **kwargs) * factor
        except CountInfeasible as exc:
            points.append({"k": k, "infeasible": str(exc)})
            infeasible = True
            continue
        lhs_vals.append(lhs)
        rhs_vals.append(rhs)
        ok = ok and lhs == rhs
        points.append({"k": k, "lhs": lhs, "rhs": rhs, "factor": factor})
    return VerificationReport(
        identity="pointwise_factorization",
        inputs={"p": p, "L": L.to_json(), "k_list": list(k_list)},
        lhs=lhs_vals,
        rhs=rhs_vals,
        passed=None if infeasible else ok,
        diagnostics={"points": points},
    )


def check_rank1(a: int, unit, p: int, **kwargs) -> VerificationReport:
    """dDen(<unit * p^a>) = a + 1 for a nonsplit rank-1 lattice."""
    unit = Fraction(unit)
    L = diagonal_lattice(p, [unit * p**a])
    lhs = derived_density(L, **kwargs)  # raises SplitClass on bad parameters
    rhs = Fraction(a + 1)
    return VerificationReport(
        identity="rank1_formula",
        inputs={"p": p, "a": a, "unit": str(unit)},
        lhs=lhs,
        rhs=rhs,
        passed=lhs == rhs,
    )


# ---------------------------------------------------------------------------
# the suite


def load_manifest() -> dict:
    with resources.files("hermdense.data").joinpath("suite_manifest.json").open() as fh:
        return json.load(fh)


def nonsplit_unit(p: int, a: int) -> int:
    """Smallest positive unit u making <u * p^a> nonsplit."""
    from .arith import is_norm

    for u in range(1, p):
        if u % p and not is_norm(Fraction(u) * p**a, p):
            return u
    raise ValueError("no nonsplit unit found; p is not an odd prime?")


def _suite_lattice(tag: str, p: int) -> HermLattice:
    eps = smallest_nonresidue(p)
    if tag == "eps":
        return standard_I1(p, eps)
    if tag == "up":
        # <u*p> with u chosen so the class is nonsplit (u = 1 iff p = 3 mod 4)
        return diagonal_lattice(p, [nonsplit_unit(p, 1) * p])
    if tag == "eps_p2":
        return diagonal_lattice(p, [eps * p * p])
    if tag == "eps+up":
        # diag(e1, u*p), nonsplit iff e1*u is a non-residue
        from .arith import legendre_symbol

        u = nonsplit_unit(p, 1)
        e1 = next(e for e in range(1, p) if legendre_symbol(e * u, p) == -1)
        return diagonal_lattice(p, [e1, u * p])
    if tag == "eps+n1":
        return orthogonal_direct_sum(standard_I1(p, eps), standard_I1(p, -1))
    if tag == "up+n1":
        return orthogonal_direct_sum(
            diagonal_lattice(p, [nonsplit_unit(p, 1) * p]), standard_I1(p, -1)
        )
    raise ValueError(f"unknown lattice tag {tag!r}")


def run_suite(
    p: int = 3,
    *,
    budget=None,
    workers: int = 1,
    include_stretch: bool = True,
) -> list[VerificationReport]:
    """Execute the manifest in order; failures and infeasibilities are data."""
    if not is_odd_prime(p):
        raise OddPrimeRequired(f"suite needs an odd prime, got {p}")
    manifest = load_manifest()
    q = p
    kwargs = {"budget": budget, "workers": workers}
    reports = []
    for item in manifest["items"]:
        if item.get("stretch") and not include_stretch:
            continue
        ident = item["identity"]
        params = item.get("params", {})
        try:
            reports.append(_run_item(ident, params, p, q, kwargs, item))
        except CountInfeasible as exc:
            reports.append(
                VerificationReport(
                    identity=ident,
                    inputs={"p": p, **params},
                    lhs=None,
                    rhs=None,
                    passed=None,
                    diagnostics={"infeasible": str(exc)},
                )
            )
        except NotStabilized as exc:
            reports.append(
                VerificationReport(
                    identity=ident,
                    inputs={"p": p, **params},
                    lhs=None,
                    rhs=None,
                    passed=None,
                    diagnostics={"not_stabilized": str(exc)},
                )
            )
    return reports


def _run_item(ident, params, p, q, kwargs, item) -> VerificationReport:
    eps = smallest_nonresidue(p)
    if ident == "selfdual_closed_form":
        n = params["n"]
        Mn = standard_Mn(p, n)
        rhs = selfdual_density_closed_form(n, q)
        diag = {"provenance": item.get("provenance", "")}
        if "d_fixed" in params:
            from .density import count_homs, hom_dimension

            d = params["d_fixed"]
            c = count_homs(Mn, Mn, d, **kwargs)
            lhs = Fraction(c, q ** (d * hom_dimension(n, n)))
            diag["d_fixed"] = d
        else:
            lhs = local_density(Mn, Mn, 3, **kwargs)
        return VerificationReport(
            identity=ident,
            inputs={"p": p, "n": n},
            lhs=lhs,
            rhs=rhs,
            passed=lhs == rhs,
            diagnostics=diag,
        )
    if ident == "unit_norm_count":
        k = params["k"]
        M = standard_Mn(p, 2)
        if k:
            M = orthogonal_direct_sum(standard_H(p, k), M)
        lhs = local_density(M, standard_I1(p, -1), 3, **kwargs)
        rhs = 1 - Fraction(1, q ** (2 + 2 * k))
        return VerificationReport(
            identity=ident,
            inputs={"p": p, "k": k},
            lhs=lhs,
            rhs=rhs,
            passed=lhs == rhs,
            diagnostics={"provenance": item.get("provenance", "")},
        )
    if ident == "rank1_formula":
        a = params["a"]
        if params["unit"] == "nonresidue":
            unit = Fraction(eps)
        elif params["unit"] == "auto":
            unit = Fraction(nonsplit_unit(p, a))
        else:
            unit = Fraction(params["unit"])
        rep = check_rank1(a, unit, p, **kwargs)
        rep.diagnostics["provenance"] = item.get("provenance", "")
        return rep
    if ident == "analytic_reduction":
        L = _suite_lattice(params["lattice"], p)
        rep = check_analytic_reduction(L, **kwargs)
        rep.diagnostics["provenance"] = item.get("provenance", "")
        return rep
    if ident == "pointwise_factorization":
        L = standard_I1(p, 1)
        rep = check_factorization(L, params["k_list"], **kwargs)
        rep.diagnostics["provenance"] = item.get("provenance", "")
        return rep
    if ident == "sign_invariance":
        L = _suite_lattice(params["lattice"], p)
        lhs = derived_density(L, **kwargs)
        rhs = derived_density(scale_form(L, -1), **kwargs)
        return VerificationReport(
            identity=ident,
            inputs={"p": p, "lattice": params["lattice"]},
            lhs=lhs,
            rhs=rhs,
            passed=lhs == rhs,
        )
    if ident == "y_equals_z_of_pi":
        L = _suite_lattice(params["lattice"], p)
        lhs = int_y(L, **kwargs)
        rhs = int_z_even(rescale_basis(L, FScalar.pi(p)), **kwargs)
        return VerificationReport(
            identity=ident,
            inputs={"p": p, "lattice": params["lattice"]},
            lhs=lhs,
            rhs=rhs,
            passed=lhs == rhs,
        )
    if ident == "whittaker_values":
        rows = []
        ok = True
        lhs_list, rhs_list = [], []
        for row in params["rows"]:
            L = standard_I1(p, eps if row["t"] == "nonresidue" else Fraction(row["t"]))
            cr = row.get("comparison_rank")
            lhs = whittaker_value(L, row["s"], comparison_rank=cr, **kwargs)
            rhs = Fraction(2) if row["expect"] == "two" else 1 - Fraction(
                1, q ** (2 + 2 * row["s"])
            ) if row["expect"] == "unit_formula" else Fraction(0)
            ok = ok and lhs == rhs
            lhs_list.append(lhs)
            rhs_list.append(rhs)
            rows.append({"s": row["s"], "lhs": lhs, "rhs": rhs})
        return VerificationReport(
            identity=ident,
            inputs={"p": p, "rows": params["rows"]},
            lhs=lhs_list,
            rhs=rhs_list,
            passed=ok,
            diagnostics={"rows": rows},
        )
    raise ValueError(f"unknown identity {ident!r} in manifest")
