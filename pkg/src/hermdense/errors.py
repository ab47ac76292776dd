"""Exception types shared across the package.

The CLI maps these onto its frozen exit-code contract, so new error
conditions should reuse one of these classes rather than raising bare
ValueError/RuntimeError.
"""


class HermdenseError(Exception):
    """Base class for all package-specific errors."""


class OddPrimeRequired(HermdenseError, ValueError):
    """The residue characteristic must be an odd prime."""


class NotIntegral(HermdenseError, ValueError):
    """An operation required an integral scalar or lattice."""


class Degenerate(HermdenseError, ValueError):
    """The Gram matrix is singular."""


class ParamMismatch(HermdenseError, ValueError):
    """Two lattices live over different primes."""


class RankOrder(HermdenseError, ValueError):
    """Source rank exceeds target rank in a counting problem."""


class NotInLattice(HermdenseError, ValueError):
    """A coordinate vector has a pole, so it lies outside the lattice."""


class InPiM(HermdenseError, ValueError):
    """The vector is divisible by the uniformizer, which the construction forbids."""


class SplitClass(HermdenseError, ValueError):
    """The lattice spans a split hermitian space; the derived density is undefined."""


class OddRank(HermdenseError, ValueError):
    """The operation is only defined for even-rank lattices."""


class NotStabilized(HermdenseError, RuntimeError):
    """Two consecutive precision levels never agreed below the precision cap."""

    def __init__(self, d_max, ratios=None):
        super().__init__(f"density ratio did not stabilize up to d_max={d_max}")
        self.d_max = d_max
        self.ratios = ratios


class FitNotStabilized(HermdenseError, RuntimeError):
    """Two consecutive interpolation orders never agreed below the order cap."""

    def __init__(self, k_max):
        super().__init__(f"polynomial fit did not stabilize up to K_max={k_max}")
        self.k_max = k_max


class CountInfeasible(HermdenseError, RuntimeError):
    """The enumeration would exceed the configured node budget."""

    def __init__(self, needed, budget):
        super().__init__(
            f"counting would need ~{needed:.3g} nodes, over the budget of {budget:.3g}"
        )
        self.needed = needed
        self.budget = budget


class WitnessNotRepresentable(HermdenseError, RuntimeError):
    """No exact base-change witness exists over the rational coefficient model.

    Hyperbolic blocks need an isotropic vector with rational coordinates;
    over the dense subring Q(pi) of O_F such a vector can fail to exist even
    though one always exists p-adically.  The block data is still correct.
    """
