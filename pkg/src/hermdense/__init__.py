"""Exact local densities of hermitian lattices over ramified quadratic extensions of Q_p.

The base field is F = Q_p(pi) with pi^2 = p and conjugation pi -> -pi.
Lattices are Gram matrices over F with exact rational coefficients; the
package counts hermitian module homomorphisms over the finite quotients
O_F/pi^(2d), stabilizes the counts into local densities, interpolates exact
density polynomials, and derives the normalized central derivatives that
equal arithmetic intersection numbers of special divisors.
"""

from .arith import (
    FScalar,
    PrimeParams,
    ResidueElem,
    is_norm,
    norm_to_F0,
    smallest_nonresidue,
    val_p,
)
from .errors import (
    CountInfeasible,
    Degenerate,
    FitNotStabilized,
    HermdenseError,
    InPiM,
    NotIntegral,
    NotInLattice,
    NotStabilized,
    OddPrimeRequired,
    OddRank,
    ParamMismatch,
    RankOrder,
    SplitClass,
    WitnessNotRepresentable,
)
from .lattice import (
    ComplementInHs,
    HermLattice,
    NormalForm,
    block_layout,
    diagonal_lattice,
    dual,
    from_rows,
    fundamental_invariants,
    invariants_via_dual_quotient,
    is_integral,
    normal_form,
    orthogonal_complement_in_Hs,
    orthogonal_direct_sum,
    rescale_basis,
    same_isometry_class_as_Mn,
    scale_form,
    standard_H,
    standard_I1,
    standard_Mn,
    star_dual,
    val_lattice,
)
from .density import (
    CountRequest,
    DensityPolynomial,
    DensitySeries,
    count_homs,
    density_polynomial,
    density_series,
    derived_density,
    local_density,
    selfdual_density_closed_form,
    stabilization_floor,
    whittaker_value,
)
from .identities import (
    VerificationReport,
    check_analytic_reduction,
    check_factorization,
    check_rank1,
    int_y,
    int_z_even,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "FScalar", "PrimeParams", "ResidueElem", "is_norm", "norm_to_F0",
    "smallest_nonresidue", "val_p",
    "HermLattice", "NormalForm", "ComplementInHs", "block_layout",
    "diagonal_lattice", "dual", "from_rows", "fundamental_invariants",
    "invariants_via_dual_quotient", "is_integral", "normal_form",
    "orthogonal_complement_in_Hs", "orthogonal_direct_sum", "rescale_basis",
    "same_isometry_class_as_Mn", "scale_form", "standard_H", "standard_I1",
    "standard_Mn", "star_dual", "val_lattice",
    "CountRequest", "DensityPolynomial", "DensitySeries", "count_homs",
    "density_polynomial", "density_series", "derived_density",
    "local_density", "selfdual_density_closed_form", "stabilization_floor",
    "whittaker_value",
    "VerificationReport", "check_analytic_reduction", "check_factorization",
    "check_rank1", "int_y", "int_z_even", "run_suite",
    "HermdenseError", "CountInfeasible", "Degenerate", "FitNotStabilized",
    "InPiM", "NotIntegral", "NotInLattice", "NotStabilized",
    "OddPrimeRequired", "OddRank", "ParamMismatch", "RankOrder",
    "SplitClass", "WitnessNotRepresentable",
]
