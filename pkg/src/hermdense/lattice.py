"""Hermitian O_F-lattices given by exact Gram matrices.

A lattice of rank n is encoded by its moment matrix T = (h(e_i, e_j)) with
the form linear in the first slot and conjugate-linear in the second, so a
base change U acts by U T conj-transpose(U).  The module provides the
standard lattices H, I_1^eps, M_n, duals, integral Smith reduction, and a
normal-form (Jordan-type) decomposition into unit blocks beta*pi^(2b) and
hyperbolic blocks with off-diagonal +-pi^(2c-1).

Exactness caveat for normal forms: a hyperbolic block can be normalized to
have zero diagonal only if the carved rank-2 sublattice contains an
isotropic vector with *rational* coordinates.  p-adically such a vector
always exists, but the rational model is a dense subring, and the required
conic can be globally insoluble.  The block data (all b's and c's) is
always exact; when the witness cannot be exact we raise
WitnessNotRepresentable rather than return an approximate base change.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .arith import FScalar, PrimeParams, INF, is_norm, val_p
from .errors import (
    Degenerate,
    InPiM,
    NotIntegral,
    NotInLattice,
    ParamMismatch,
    WitnessNotRepresentable,
)

Matrix = tuple  # tuple of tuples of FScalar
Vector = tuple  # tuple of FScalar


# ---------------------------------------------------------------------------
# small exact matrix toolbox


def fsc(p, a=0, b=0) -> FScalar:
    return FScalar.make(p, a, b)


def mat_identity(p, n) -> Matrix:
    return tuple(
        tuple(fsc(p, 1 if i == j else 0) for j in range(n)) for i in range(n)
    )


def mat_mul(A, B) -> Matrix:
    n, k, m = len(A), len(B), len(B[0])
    assert len(A[0]) == k
    return tuple(
        tuple(sum((A[i][t] * B[t][j] for t in range(k)), start=A[i][0] * 0) for j in range(m))
        for i in range(n)
    )


def conj_transpose(A) -> Matrix:
    return tuple(tuple(A[j][i].conj() for j in range(len(A))) for i in range(len(A[0])))


def mat_det(A) -> FScalar:
    n = len(A)
    p = A[0][0].p
    M = [list(row) for row in A]
    det = fsc(p, 1)
    for c in range(n):
        piv = next((r for r in range(c, n) if not M[r][c].is_zero()), None)
        if piv is None:
            return fsc(p, 0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det = det * M[c][c]
        inv = fsc(p, 1) / M[c][c]
        for r in range(c + 1, n):
            if M[r][c].is_zero():
                continue
            q = M[r][c] * inv
            M[r] = [M[r][j] - q * M[c][j] for j in range(n)]
    return det


def mat_inverse(A) -> Matrix:
    n = len(A)
    p = A[0][0].p
    M = [list(row) + [fsc(p, 1 if i == j else 0) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if not M[r][c].is_zero()), None)
        if piv is None:
            raise Degenerate("matrix is singular")
        M[c], M[piv] = M[piv], M[c]
        inv = fsc(p, 1) / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and not M[r][c].is_zero():
                q = M[r][c]
                M[r] = [M[r][j] - q * M[c][j] for j in range(2 * n)]
    return tuple(tuple(row[n:]) for row in M)


def smith_valuations(A) -> list:
    """pi-adic elementary divisor exponents of a nonsingular FScalar matrix."""
    M = [list(row) for row in A]
    n, m = len(M), len(M[0])
    vals = []
    top = 0
    while top < min(n, m):
        best = None
        for i in range(top, n):
            for j in range(top, m):
                v = M[i][j].valuation()
                if v != INF and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            raise Degenerate("matrix drops rank; infinite elementary divisor")
        v, i, j = best
        M[top], M[i] = M[i], M[top]
        for row in M:
            row[top], row[j] = row[j], row[top]
        pivot = M[top][top]
        for r in range(top + 1, n):
            if not M[r][top].is_zero():
                q = M[r][top] / pivot
                M[r] = [M[r][c] - q * M[top][c] for c in range(m)]
        for c in range(top + 1, m):
            if not M[top][c].is_zero():
                q = M[top][c] / pivot
                for r in range(top, n):
                    M[r][c] = M[r][c] - q * M[r][top]
        vals.append(v)
        top += 1
    return sorted(vals)


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class HermLattice:
    """A hermitian lattice: prime parameters plus an exact Gram matrix."""

    params: PrimeParams
    gram: Matrix

    def __post_init__(self):
        n = len(self.gram)
        if n == 0:
            raise Degenerate("rank-0 lattice is not allowed")
        p = self.params.p
        for row in self.gram:
            if len(row) != n:
                raise ValueError("gram must be square")
            for x in row:
                if not isinstance(x, FScalar) or x.p != p:
                    raise ParamMismatch("gram entry prime differs from params.p")
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i].conj():
                    raise ValueError(f"gram is not hermitian at ({i},{j})")
        d = mat_det(self.gram)
        if d.is_zero():
            raise Degenerate("gram is degenerate")
        # hermitian determinants are Galois-fixed, hence live in F_0
        assert d.b == 0

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def rank(self) -> int:
        return len(self.gram)

    def det(self) -> Fraction:
        return mat_det(self.gram).a

    def entry(self, i, j) -> FScalar:
        return self.gram[i][j]

    def pair(self, v: Vector, w: Vector) -> FScalar:
        """h(v, w) for coordinate vectors in this basis."""
        acc = fsc(self.p, 0)
        for i, vi in enumerate(v):
            for j, wj in enumerate(w):
                acc = acc + vi * wj.conj() * self.gram[i][j]
        return acc

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "gram": [[x.to_json() for x in row] for row in self.gram],
        }

    @staticmethod
    def from_json(data) -> "HermLattice":
        if not isinstance(data, dict) or "p" not in data or "gram" not in data:
            raise ValueError("lattice JSON needs fields 'p' and 'gram'")
        p = data["p"]
        if not isinstance(p, int):
            raise ValueError("field 'p' must be an integer prime")
        params = PrimeParams(p)
        rows = data["gram"]
        gram = tuple(tuple(FScalar.from_json(p, x) for x in row) for row in rows)
        return HermLattice(params, gram)

    def __str__(self):
        rows = ["[" + ", ".join(str(x) for x in row) + "]" for row in self.gram]
        return f"HermLattice(p={self.p}, gram=[" + "; ".join(rows) + "])"


def from_rows(p: int, rows) -> HermLattice:
    """Build a lattice from rows of (a, b) pairs / rationals / FScalars."""
    def to_scalar(x):
        if isinstance(x, FScalar):
            return x
        if isinstance(x, (tuple, list)) and len(x) == 2:
            return fsc(p, x[0], x[1])
        return fsc(p, x)

    gram = tuple(tuple(to_scalar(x) for x in row) for row in rows)
    return HermLattice(PrimeParams(p), gram)


def diagonal_lattice(p: int, values) -> HermLattice:
    vals = list(values)
    n = len(vals)
    return from_rows(
        p, [[vals[i] if i == j else 0 for j in range(n)] for i in range(n)]
    )


def standard_H(p: int, s: int = 1) -> HermLattice:
    """The s-fold orthogonal sum of the self-dual hyperbolic plane."""
    if s < 1:
        raise Degenerate("H^0 has rank 0; use the other summand directly")
    pinv = Fraction(1, p)
    rows = [[fsc(p, 0)] * (2 * s) for _ in range(2 * s)]
    for i in range(s):
        rows[2 * i][2 * i + 1] = fsc(p, 0, pinv)
        rows[2 * i + 1][2 * i] = fsc(p, 0, -pinv)
    return HermLattice(PrimeParams(p), tuple(tuple(r) for r in rows))


def standard_I1(p: int, eps) -> HermLattice:
    eps = Fraction(eps)
    if val_p(eps, p) != 0:
        raise ValueError(f"I_1 parameter must be a p-adic unit, got {eps}")
    return diagonal_lattice(p, [eps])


def standard_Mn(p: int, n: int) -> HermLattice:
    """The split comparison lattice: H^(n/2), or H^((n-1)/2) + <1> for odd n."""
    if n < 1:
        raise ValueError("rank must be >= 1")
    if n % 2 == 0:
        return standard_H(p, n // 2)
    if n == 1:
        return standard_I1(p, 1)
    return orthogonal_direct_sum(standard_H(p, (n - 1) // 2), standard_I1(p, 1))


def orthogonal_direct_sum(*lattices: HermLattice) -> HermLattice:
    if not lattices:
        raise Degenerate("empty orthogonal sum")
    p = lattices[0].p
    for L in lattices:
        if L.p != p:
            raise ParamMismatch("orthogonal sum of lattices over different primes")
    n = sum(L.rank for L in lattices)
    rows = [[fsc(p, 0)] * n for _ in range(n)]
    off = 0
    for L in lattices:
        r = L.rank
        for i in range(r):
            for j in range(r):
                rows[off + i][off + j] = L.gram[i][j]
        off += r
    return HermLattice(PrimeParams(p), tuple(tuple(r) for r in rows))


def scale_form(L: HermLattice, c) -> HermLattice:
    c = Fraction(c)
    if c == 0:
        raise ValueError("scale factor must be nonzero")
    gram = tuple(tuple(x * c for x in row) for row in L.gram)
    return HermLattice(L.params, gram)


def rescale_basis(L: HermLattice, x: FScalar) -> HermLattice:
    """Replace every basis vector e_i by x*e_i; the Gram picks up Nm(x)."""
    if x.is_zero():
        raise ValueError("rescaling scalar must be nonzero")
    return scale_form(L, x.norm())


def is_integral(L: HermLattice) -> bool:
    """L is contained in its dual iff every pairing lands in pi^(-1)*O_F."""
    for i in range(L.rank):
        if L.gram[i][i].valuation() < 0:
            return False
        for j in range(L.rank):
            if L.gram[i][j].valuation() < -1:
                return False
    return True


def dual(L: HermLattice) -> HermLattice:
    """The dual lattice L^v (pairings into pi^(-1)*O_F) in its own basis."""
    inv = mat_inverse(L.gram)
    c = fsc(L.p, Fraction(-1, L.p))
    gram = tuple(tuple(x * c for x in row) for row in inv)
    return HermLattice(L.params, gram)


def star_dual(L: HermLattice) -> HermLattice:
    """L^* = pi * L^v; its Gram is the inverse Gram."""
    return HermLattice(L.params, mat_inverse(L.gram))


def det_of_Mn(p: int, n: int) -> Fraction:
    return Fraction(1, p ** (n // 2))


def same_isometry_class_as_Mn(L: HermLattice) -> bool:
    """Hermitian spaces over F are classified by rank and det class mod norms."""
    ratio = L.det() / det_of_Mn(L.p, L.rank)
    return is_norm(ratio, L.p)


# ---------------------------------------------------------------------------
# normal form


@dataclass(frozen=True)
class NormalForm:
    """Block decomposition with its base-change witness.

    layout lists blocks in witness row order; base_change U satisfies
    U * gram * conj-transpose(U) == block_gram exactly.
    """

    p: int
    layout: tuple  # ("unit", beta: Fraction, b: int) | ("hyp", c: int)
    base_change: Matrix

    @property
    def unit_blocks(self):
        return tuple((t[1], t[2]) for t in self.layout if t[0] == "unit")

    @property
    def hyperbolic_blocks(self):
        return tuple(t[1] for t in self.layout if t[0] == "hyp")

    def block_gram(self) -> Matrix:
        p = self.p
        rows = []
        size = sum(1 if t[0] == "unit" else 2 for t in self.layout)
        M = [[fsc(p, 0)] * size for _ in range(size)]
        i = 0
        for t in self.layout:
            if t[0] == "unit":
                _, beta, b = t
                M[i][i] = fsc(p, beta * Fraction(p) ** b)
                i += 1
            else:
                c = t[1]
                w = _pi_power(p, 2 * c - 1)
                M[i][i + 1] = w
                M[i + 1][i] = -w
                i += 2
        return tuple(tuple(r) for r in M)

    def invariant_multiset(self):
        out = []
        for t in self.layout:
            if t[0] == "unit":
                out.append(2 * t[2] + 1)
            else:
                out.extend([2 * t[1], 2 * t[1]])
        return sorted(out)


def _pi_power(p: int, e: int) -> FScalar:
    """pi^e as an exact scalar (e may be negative)."""
    half, odd = divmod(e, 2)
    base = Fraction(p) ** half
    return fsc(p, 0, base) if odd else fsc(p, base)


def _row_op(T, U, i, j, lam: FScalar):
    """e_i <- e_i + lam*e_j applied to the working gram T and witness U."""
    n = len(T)
    for c in range(n):
        T[i][c] = T[i][c] + lam * T[j][c]
    lc = lam.conj()
    for r in range(n):
        T[r][i] = T[r][i] + lc * T[r][j]
    for c in range(len(U[i])):
        U[i][c] = U[i][c] + lam * U[j][c]


def _row_scale(T, U, i, lam: FScalar):
    n = len(T)
    for c in range(n):
        T[i][c] = lam * T[i][c]
    lc = lam.conj()
    for r in range(n):
        T[r][i] = T[r][i] * lc
    for c in range(len(U[i])):
        U[i][c] = lam * U[i][c]


def _row_swap(T, U, i, j):
    if i == j:
        return
    T[i], T[j] = T[j], T[i]
    for row in T:
        row[i], row[j] = row[j], row[i]
    U[i], U[j] = U[j], U[i]


def _min_val_entry(T, start):
    """(val, i, j) minimizing valuation over the trailing submatrix.

    Diagonal entries win ties, then lexicographic position.
    """
    n = len(T)
    best = None
    for i in range(start, n):
        v = T[i][i].valuation()
        if v != INF and (best is None or v < best[0]):
            best = (v, i, i)
    for i in range(start, n):
        for j in range(start, n):
            if i == j:
                continue
            v = T[i][j].valuation()
            if v != INF and (best is None or v < best[0]):
                best = (v, i, j)
    return best


def _solve_isotropy_conic(p, alpha: Fraction, delta: Fraction, W: FScalar):
    """Rational t = x + y*pi with alpha + Tr(t*conj(W)) + Nm(t)*delta = 0.

    alpha, delta are the block diagonal entries (delta != 0) and W the
    off-diagonal; in coordinates the condition is the conic
    delta*x^2 - p*delta*y^2 + 2*W.a*x - 2*p*W.b*y + alpha = 0.  Returns an
    FScalar t (not necessarily integral) or None when the conic has no
    rational point.  Any projective solution automatically has Z != 0
    because x^2 = p*y^2 forces x = y = 0 over Q.
    """
    from math import gcd, lcm
    from sympy import symbols
    from sympy.solvers.diophantine import diophantine

    coeffs = [
        Fraction(delta),
        Fraction(-p * delta),
        Fraction(alpha),
        Fraction(2 * W.a),
        Fraction(-2 * p * W.b),
    ]
    den = lcm(*(c.denominator for c in coeffs))
    ints = [int(c * den) for c in coeffs]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    cx2, cy2, cz2, cxz, cyz = (c // g for c in ints)

    X, Y, Z = symbols("vx vy vz", integer=True)
    eq = cx2 * X**2 + cy2 * Y**2 + cz2 * Z**2 + cxz * X * Z + cyz * Y * Z
    try:
        sols = diophantine(eq)
    except (TypeError, NotImplementedError):
        sols = set()

    def as_t(x0, y0, z0):
        if z0 == 0:
            return None
        t = fsc(p, Fraction(x0, z0), Fraction(y0, z0))
        if alpha + (t * W.conj()).trace() + t.norm() * delta == 0:
            return t
        return None

    for sol in sols:
        syms = sorted(
            set().union(*(getattr(e, "free_symbols", set()) for e in sol)),
            key=lambda s: s.name,
        )
        if not syms:
            vals = [int(e) for e in sol]
            if any(vals):
                t = as_t(*vals)
                if t is not None:
                    return t
            continue
        for point in itertools.product(range(-4, 5), repeat=len(syms)):
            subbed = [e.subs(dict(zip(syms, point))) for e in sol]
            try:
                vals = [int(v) for v in subbed]
            except TypeError:
                continue
            if any(vals):
                t = as_t(*vals)
                if t is not None:
                    return t
    return None


def normal_form(L: HermLattice) -> NormalForm:
    """Decompose into unit and hyperbolic blocks with an exact witness.

    Pivoting order: strictly by minimal pi-valuation; an even minimum is
    realized on the diagonal (symmetrizing first when needed) and split off
    as a rank-1 block, an odd minimum is necessarily off-diagonal and
    splits off a hyperbolic plane.  Raises WitnessNotRepresentable when the
    hyperbolic diagonal cannot be cleared exactly over the rationals.
    """
    p = L.p
    n = L.rank
    T = [list(row) for row in L.gram]
    U = [list(row) for row in mat_identity(p, n)]
    layout = []
    pos = 0
    while pos < n:
        v, i, j = _min_val_entry(T, pos)
        if v % 2 == 0:
            if i == j:
                k = i
            else:
                # only off-diagonal entries realize an even minimum: fold one
                # onto the diagonal (2 is a unit, so the valuation is kept)
                _row_op(T, U, i, j, fsc(p, 1))
                assert T[i][i].valuation() == v
                k = i
            _row_swap(T, U, pos, k)
            pivot = T[pos][pos]
            for r in range(pos + 1, n):
                if not T[r][pos].is_zero():
                    _row_op(T, U, r, pos, -(T[r][pos] / pivot))
            beta = pivot.a / Fraction(p) ** (v // 2)
            layout.append(("unit", beta, v // 2))
            pos += 1
        else:
            c = (v + 1) // 2
            _row_swap(T, U, pos, i)
            j2 = j if j != pos else i
            _row_swap(T, U, pos + 1, j2)
            # eliminate the rest of the two pivot columns via the 2x2 block
            a11, a12 = T[pos][pos], T[pos + 1][pos]
            a21, a22 = T[pos][pos + 1], T[pos + 1][pos + 1]
            det2 = a11 * a22 - a12 * a21
            for r in range(pos + 2, n):
                b1, b2 = T[r][pos], T[r][pos + 1]
                if b1.is_zero() and b2.is_zero():
                    continue
                x = (b1 * a22 - b2 * a12) / det2
                y = (b2 * a11 - b1 * a21) / det2
                _row_op(T, U, r, pos, -x)
                _row_op(T, U, r, pos + 1, -y)
            _clear_hyperbolic_block(T, U, pos, c)
            layout.append(("hyp", c))
            pos += 2
    nf = NormalForm(p, tuple(layout), tuple(tuple(row) for row in U))
    # exactness is part of the contract; verify before returning
    got = mat_mul(mat_mul(nf.base_change, L.gram), conj_transpose(nf.base_change))
    assert got == nf.block_gram(), "internal error: inexact normal form"
    return nf


def _clear_hyperbolic_block(T, U, pos, c):
    """Zero the diagonal of the 2x2 block at (pos, pos) and normalize it."""
    p = T[0][0].p
    i, j = pos, pos + 1
    alpha, delta, W = T[i][i], T[j][j], T[i][j]
    if alpha.is_zero() and delta.is_zero():
        pass
    elif alpha.is_zero():
        _clear_mate(T, U, i, j, c)
    elif delta.is_zero():
        _clear_mate(T, U, j, i, c)
    else:
        t = _solve_isotropy_conic(p, alpha.a, delta.a, W)
        if t is None:
            raise WitnessNotRepresentable(
                "hyperbolic block admits no rational isotropic vector; "
                "block data is exact but no exact witness exists over Q(pi)"
            )
        if t.valuation() >= 0:
            _row_op(T, U, i, j, t)  # e_i + t*e_j is isotropic
            assert T[i][i].is_zero()
            _clear_mate(T, U, i, j, c)
        else:
            # the isotropic direction has unit e_j-coordinate; rebuild e_j
            # as the primitive vector pi^(-mu)*(e_i + t*e_j)
            mu = t.valuation()
            gnew = t * _pi_power(p, -mu)
            znew = _pi_power(p, -mu)
            assert gnew.valuation() == 0 and znew.valuation() > 0
            _row_scale(T, U, j, gnew)
            _row_op(T, U, j, i, znew)
            assert T[j][j].is_zero()
            _clear_mate(T, U, j, i, c)
    # normalize the off-diagonal to exactly pi^(2c-1)
    target = _pi_power(p, 2 * c - 1)
    lam = (target / T[i][j]).conj()
    _row_scale(T, U, j, lam)
    if T[i][j] != target:  # lands on -target when lam was off by sign
        _row_scale(T, U, j, fsc(p, -1))
    assert T[i][j] == target and T[i][i].is_zero() and T[j][j].is_zero()


def _clear_mate(T, U, iso, mate, c):
    """Given T[iso][iso] == 0, clear T[mate][mate] without touching h(iso, mate)."""
    p = T[0][0].p
    W = T[iso][mate]
    delta = T[mate][mate]
    if delta.is_zero():
        return
    B = W.b
    assert val_p(B, p) == c - 1
    y = -delta.a / (2 * p * B)
    _row_op(T, U, mate, iso, fsc(p, 0, y))
    assert T[mate][mate].is_zero()


# ---------------------------------------------------------------------------
# invariants


def block_layout(L: HermLattice):
    """Block data by valuation-only pivoting; never needs an exact witness.

    The multiset of blocks is the basis-independent invariant; only zeroing
    a hyperbolic diagonal can meet a rationality obstruction, and that step
    is skipped here.
    """
    p = L.p
    n = L.rank
    T = [list(row) for row in L.gram]
    U = [list(row) for row in mat_identity(p, n)]
    layout = []
    pos = 0
    while pos < n:
        v, i, j = _min_val_entry(T, pos)
        if v % 2 == 0:
            if i != j:
                _row_op(T, U, i, j, fsc(p, 1))
            _row_swap(T, U, pos, i)
            pivot = T[pos][pos]
            for r in range(pos + 1, n):
                if not T[r][pos].is_zero():
                    _row_op(T, U, r, pos, -(T[r][pos] / pivot))
            layout.append(("unit", pivot.a / Fraction(p) ** (v // 2), v // 2))
            pos += 1
        else:
            _row_swap(T, U, pos, i)
            _row_swap(T, U, pos + 1, j if j != pos else i)
            a11, a12 = T[pos][pos], T[pos + 1][pos]
            a21, a22 = T[pos][pos + 1], T[pos + 1][pos + 1]
            det2 = a11 * a22 - a12 * a21
            for r in range(pos + 2, n):
                b1, b2 = T[r][pos], T[r][pos + 1]
                if b1.is_zero() and b2.is_zero():
                    continue
                x = (b1 * a22 - b2 * a12) / det2
                y = (b2 * a11 - b1 * a21) / det2
                _row_op(T, U, r, pos, -x)
                _row_op(T, U, r, pos + 1, -y)
            layout.append(("hyp", (v + 1) // 2))
            pos += 2
    return tuple(layout)


def fundamental_invariants(L: HermLattice):
    """Elementary divisor exponents of L^v / L, requires L integral."""
    if not is_integral(L):
        raise NotIntegral("fundamental invariants need an integral lattice")
    out = []
    for blk in block_layout(L):
        if blk[0] == "unit":
            out.append(2 * blk[2] + 1)
        else:
            out.extend([2 * blk[1], 2 * blk[1]])
    return tuple(sorted(out))


def invariants_via_dual_quotient(L: HermLattice):
    """Independent route: Smith reduction of pi * gram over O_F."""
    if not is_integral(L):
        raise NotIntegral("fundamental invariants need an integral lattice")
    pi = FScalar.pi(L.p)
    M = tuple(tuple(pi * x for x in row) for row in L.gram)
    return tuple(smith_valuations(M))


def val_lattice(L: HermLattice) -> int:
    return sum(fundamental_invariants(L))


# ---------------------------------------------------------------------------
# the orthogonal complement of a vector in H^s


@dataclass(frozen=True)
class ComplementInHs:
    """Output of the explicit orthogonal-complement construction in H^s.

    basis rows span M(phi) = {x : h(x, phi) = 0}; their Gram is exactly
    H^(s-1) + <-beta> with beta = h(phi, phi).  phi_prime satisfies
    h(phi', phi') = -beta and phi' - phi in pi*H^s.  colength is
    1 + val_pi(beta) when beta != 0, else None.
    """

    s: int
    p: int
    basis: Matrix
    gram: Matrix
    phi_prime: Vector
    beta: Fraction
    colength: int | None
    normalized_phi: Vector


def orthogonal_complement_in_Hs(s: int, phi, p: int | None = None) -> ComplementInHs:
    if s < 1:
        raise ValueError("s must be >= 1")
    phi = tuple(phi)
    if len(phi) != 2 * s:
        raise ValueError(f"phi must have {2 * s} coordinates in H^{s}")
    if p is None:
        p = phi[0].p
    H = standard_H(p, s)
    vals = [x.valuation() for x in phi]
    if min(vals) < 0:
        raise NotInLattice("phi has a coordinate of negative valuation")
    if min(vals) >= 1:
        raise InPiM("phi lies in pi*H^s")

    # coordinates come in (e_i, f_i) pairs; find a unit e-coordinate, using
    # the standard-basis symmetry (e, f) -> (f, -e) to surface one if needed
    coords = list(phi)
    pair_map = list(range(s))  # block permutation applied
    flipped = [False] * s
    unit_block = None
    for i in range(s):
        if coords[2 * i].valuation() == 0:
            unit_block = i
            break
    if unit_block is None:
        for i in range(s):
            if coords[2 * i + 1].valuation() == 0:
                coords[2 * i], coords[2 * i + 1] = coords[2 * i + 1], -coords[2 * i]
                flipped[i] = True
                unit_block = i
                break
    assert unit_block is not None
    if unit_block != 0:
        i = unit_block
        coords[0], coords[1], coords[2 * i], coords[2 * i + 1] = (
            coords[2 * i],
            coords[2 * i + 1],
            coords[0],
            coords[1],
        )
        pair_map[0], pair_map[i] = pair_map[i], pair_map[0]

    a1 = coords[0]
    unit_inv = fsc(p, 1) / a1
    norm_coords = tuple(unit_inv * x for x in coords)

    def unmap(vec):
        """Send a vector in the permuted/flipped frame back to H^s coordinates."""
        out = [fsc(p, 0)] * (2 * s)
        for blk in range(s):
            src = 2 * blk
            tgt_blk = pair_map[blk]
            e_part, f_part = vec[src], vec[src + 1]
            if flipped[tgt_blk]:
                # (e', f') = (f, -e) means e = -f', f = e'
                out[2 * tgt_blk] = -f_part
                out[2 * tgt_blk + 1] = e_part
            else:
                out[2 * tgt_blk] = e_part
                out[2 * tgt_blk + 1] = f_part
        return tuple(out)

    # in the normalized frame: phi~ = e_1 + b_1 f_1 + sum(a_i e_i + b_i f_i)
    beta_sc = H.pair(unmap(norm_coords), unmap(norm_coords))
    assert beta_sc.b == 0
    beta_norm = beta_sc.a  # h(phi~, phi~)

    basis_local = []
    for i in range(1, s):
        a_i = norm_coords[2 * i]
        b_i = norm_coords[2 * i + 1]
        sigma = [fsc(p, 0)] * (2 * s)
        sigma[2 * i] = fsc(p, 1)
        sigma[1] = b_i.conj()
        tau = [fsc(p, 0)] * (2 * s)
        tau[2 * i + 1] = fsc(p, 1)
        tau[1] = -a_i.conj()
        basis_local.append(tuple(sigma))
        basis_local.append(tuple(tau))
    phi_prime_local = list(norm_coords)
    phi_prime_local[1] = phi_prime_local[1] + fsc(p, beta_norm) * FScalar.pi(p)
    # scale back by a1 so the guarantees hold against the original phi
    phi_prime = unmap(tuple(a1 * x for x in phi_prime_local))
    basis = tuple(unmap(v) for v in basis_local) + (phi_prime,)

    gram = tuple(
        tuple(H.pair(v, w) for w in basis) for v in basis
    )
    beta = H.pair(phi, phi).a
    expected_tail = -beta
    assert gram[-1][-1] == fsc(p, expected_tail)
    for v in basis:
        assert H.pair(v, phi).is_zero()

    colength = None
    if beta != 0:
        colength = 1 + _val_rat_pi(beta, p)
    return ComplementInHs(
        s=s,
        p=p,
        basis=basis,
        gram=gram,
        phi_prime=phi_prime,
        beta=beta,
        colength=colength,
        normalized_phi=unmap(norm_coords),
    )


def _val_rat_pi(r: Fraction, p: int) -> int:
    return 2 * val_p(r, p)
