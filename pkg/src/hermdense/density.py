"""The local-density engine: exact counting over finite quotient rings.

Densities are stabilized ratios |Herm_{L,M}(O_{F0}/p^d)| / q^(d*n*(2m-n)).
The congruence defining the count compares the pi-scaled integral forms
g = pi*h modulo pi^(2d), which is equivalent to comparing the induced
pairings modulo pi^(2d-1) and keeps every quantity inside
O_F/pi^(2d) = (Z/p^d) + (Z/p^d)*pi.

Counting strategy ladder (all exact, integer arithmetic only):

* brute        -- full enumeration of candidate matrices; the oracle.
* backtrack    -- columns left to right; each new column solves the linear
                  pairing congruences against the fixed columns (chain-ring
                  Gauss over Z/p^d) and is then filtered by its norm
                  congruence.
* histogram    -- rank-1 sources into orthogonal block targets: per-block
                  norm histograms over Z/p^d combined by convolution.
* fibration    -- rank-2 diagonal sources with a unit norm entry into a sum
                  of hyperbolic planes, counted as (unit-norm vector count)
                  x (rank-1 count into the explicit orthogonal complement).
* hensel       -- optional smooth-lifting recursion for rank-1 counts;
                  disabled by default, kept as an independent cross-check.

Counts are invariant under base changes of either lattice that are
invertible over O_F, so block-reduced forms of the target may be counted
in place of the original whenever they agree modulo pi^(2d+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import val_p
from .errors import (
    CountInfeasible,
    FitNotStabilized,
    NotIntegral,
    NotStabilized,
    RankOrder,
    SplitClass,
)
from .lattice import (
    HermLattice,
    fsc,
    is_integral,
    orthogonal_direct_sum,
    same_isometry_class_as_Mn,
    standard_H,
    standard_Mn,
    val_lattice,
)

DEFAULT_NODE_BUDGET = 2_000_000_000
_CHUNK = 1 << 19


# ---------------------------------------------------------------------------
# public containers


@dataclass(frozen=True)
class CountRequest:
    L: HermLattice
    M: HermLattice
    d: int

    def __post_init__(self):
        if self.L.p != self.M.p:
            raise RankOrder("source and target must share the prime")
        if not is_integral(self.L) or not is_integral(self.M):
            raise NotIntegral("counting requires integral lattices")
        if self.L.rank > self.M.rank:
            raise RankOrder("source rank exceeds target rank")
        if self.d < 1:
            raise ValueError("precision d must be >= 1")


@dataclass(frozen=True)
class DensitySeries:
    counts: tuple  # ((d, int), ...)
    ratios: tuple  # ((d, Fraction), ...)
    stabilized_at: int | None

    def value(self) -> Fraction:
        if self.stabilized_at is None:
            raise NotStabilized(self.counts[-1][0], ratios=self.ratios)
        return dict(self.ratios)[self.stabilized_at]


@dataclass(frozen=True)
class DensityPolynomial:
    coeffs: tuple  # Fractions, X^0 upward, no trailing zeros
    grid: tuple  # ((k, Fraction), ...)
    fit_order: int

    def evaluate(self, x) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative_at(self, x) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for i in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * x + i * self.coeffs[i]
        return acc

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


class _Budget:
    def __init__(self, limit):
        self.limit = limit if limit is not None else DEFAULT_NODE_BUDGET
        self.used = 0

    def charge(self, n):
        self.used += n
        if self.used > self.limit:
            raise CountInfeasible(self.used, self.limit)


# ---------------------------------------------------------------------------
# instance recording (used by the oracle-equivalence battery)

_RECORDING = False
_RECORDED: list = []


class record_instances:
    """Context manager collecting every (L, M, d, count, strategy) counted."""

    def __enter__(self):
        global _RECORDING
        _RECORDING = True
        return _RECORDED

    def __exit__(self, *exc):
        global _RECORDING
        _RECORDING = False
        return False


def recorded_instances():
    return list(_RECORDED)


def clear_recorded():
    _RECORDED.clear()


def clear_caches():
    """Drop memoized counts and histograms (mainly for budget tests)."""
    _COUNT_CACHE.clear()
    _HIST_CACHE.clear()


# ---------------------------------------------------------------------------
# pair encoding of grams over O_F/pi^(2d)


def _rat_mod(r: Fraction, modulus: int, p: int) -> int:
    den = r.denominator
    if den % p == 0:
        raise NotIntegral(f"{r} is not a p-adic integer")
    return (r.numerator % modulus) * pow(den % modulus, -1, modulus) % modulus


def _gram_pairs(L: HermLattice, d: int):
    """pi * gram reduced into O_F/pi^(2d), as (a, b) integer pairs."""
    m = L.p**d
    out = []
    for row in L.gram:
        r = []
        for x in row:
            # pi*(a + b*pi) = p*b + a*pi
            r.append((_rat_mod(L.p * x.b, m, L.p), _rat_mod(x.a, m, L.p)))
        out.append(r)
    return out


def _diag_targets(L: HermLattice, d: int):
    m = L.p**d
    return [_rat_mod(L.gram[i][i].a, m, L.p) for i in range(L.rank)]


# ---------------------------------------------------------------------------
# block structure of targets


def _standard_blocks(M: HermLattice):
    """Block list when the Gram is literally block-shaped, else None.

    Blocks: ("I", beta, b) for a diagonal entry beta*p^b, ("H", c) for a
    hyperbolic pair with off-diagonal +-pi^(2c-1).
    """
    n = M.rank
    p = M.p
    done = [False] * n
    blocks = []
    for i in range(n):
        if done[i]:
            continue
        others = [j for j in range(n) if j != i and not M.gram[i][j].is_zero()]
        if not others:
            if M.gram[i][i].is_zero():
                return None
            x = M.gram[i][i]
            v = x.valuation()
            if v % 2 or v < 0:
                return None
            beta = x.a / Fraction(p) ** (v // 2)
            blocks.append(("I", beta, v // 2))
            done[i] = True
            continue
        if len(others) != 1:
            return None
        j = others[0]
        if j < i or done[j]:
            return None
        w = M.gram[i][j]
        if not M.gram[i][i].is_zero() or not M.gram[j][j].is_zero():
            return None
        if any(k not in (i, j) and not M.gram[j][k].is_zero() for k in range(n)):
            return None
        v = w.valuation()
        if v % 2 == 0:
            return None
        c = (v + 1) // 2
        if w.a != 0 or abs(w.b) != Fraction(p) ** (c - 1):
            return None
        blocks.append(("H", c))
        done[i] = done[j] = True
    return blocks


def _blocks_mod(M: HermLattice, d: int):
    """Block list valid modulo pi^(2d+1); always succeeds for integral M.

    Runs the exact pivoting reduction; hyperbolic diagonals that cannot be
    cleared exactly are pushed above valuation 2d+1 by the quadratic
    contraction step, which does not change any count at precision d.
    """
    from .lattice import _min_val_entry, _row_op, _row_swap, mat_identity

    p = M.p
    n = M.rank
    T = [list(row) for row in M.gram]
    U = [list(row) for row in mat_identity(p, n)]
    thresh = 2 * d + 2
    blocks = []
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
            beta = pivot.a / Fraction(p) ** (v // 2)
            blocks.append(("I", beta, v // 2))
            pos += 1
        else:
            c = (v + 1) // 2
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
            _push_up_diagonal(T, U, pos, pos + 1, c, thresh)
            _push_up_diagonal(T, U, pos + 1, pos, c, thresh)
            blocks.append(("H", c))
            pos += 2
    return blocks


def _push_up_diagonal(T, U, i, j, c, thresh):
    """Raise val(T[i][i]) above thresh by contraction steps along e_j.

    With s = y*pi the diagonal moves to a - 2pyB - py^2 d (W = A + B*pi the
    off-diagonal, d the other diagonal); y = a/(2pB) leaves -p y^2 d, whose
    valuation exceeds the old one by at least 2.
    """
    from .lattice import _row_op

    p = T[0][0].p
    while not T[i][i].is_zero() and T[i][i].valuation() < thresh:
        W = T[i][j]
        B = W.b
        assert val_p(B, p) == c - 1
        y = T[i][i].a / (2 * p * B)
        _row_op(T, U, i, j, fsc(p, 0, y))


def _target_blocks(M: HermLattice, d: int):
    return _standard_blocks(M) or _blocks_mod(M, d)


# ---------------------------------------------------------------------------
# norm histograms over Z/p^d


_HIST_CACHE: dict = {}


def _product_hist(p: int, d: int):
    """P[t] = #{(u, v) in (Z/p^d)^2 : u*v = t}."""
    key = ("prod", p, d)
    if key not in _HIST_CACHE:
        m = p**d
        u = np.arange(m, dtype=np.int64)
        acc = np.zeros(m, dtype=np.int64)
        step = max(1, (1 << 22) // m)
        for lo in range(0, m, step):
            prods = (u[lo : lo + step, None] * u[None, :]) % m
            acc += np.bincount(prods.ravel(), minlength=m)
        _HIST_CACHE[key] = [int(x) for x in acc]
    return _HIST_CACHE[key]


def _hist_H(p: int, d: int, c: int):
    """Norm histogram of one hyperbolic block: values 2*p^c*(det-form)."""
    key = ("H", p, d, c)
    if key not in _HIST_CACHE:
        m = p**d
        P = _product_hist(p, d)
        # D[t] = #{s - r = t}: circular convolution with the reversed histogram
        Prev = [P[(-r) % m] for r in range(m)]
        det = _convolve(P, Prev, m)
        out = [0] * m
        scale = (2 * pow(p, c, m)) % m
        for t in range(m):
            out[(scale * t) % m] += det[t]
        _HIST_CACHE[key] = out
    return _HIST_CACHE[key]


def _hist_I(p: int, d: int, beta: Fraction, b: int):
    """Norm histogram of a rank-1 block beta*p^b: values beta*p^b*Nm(x)."""
    m = p**d
    beta_mod = _rat_mod(beta, m, p)
    key = ("I", p, d, beta_mod, min(b, d))
    if key not in _HIST_CACHE:
        scale = (beta_mod * pow(p, min(b, d), m)) % m
        u = np.arange(m, dtype=np.int64)
        acc = np.zeros(m, dtype=np.int64)
        step = max(1, (1 << 22) // m)
        for lo in range(0, m, step):
            norms = (u[lo : lo + step, None] ** 2 - p * u[None, :] ** 2) % m
            acc += np.bincount(((scale * norms) % m).ravel(), minlength=m)
        _HIST_CACHE[key] = [int(x) for x in acc]
    return _HIST_CACHE[key]


def _convolve(h1, h2, m):
    """Exact circular convolution of integer histograms of length m.

    Histograms are packed into single big integers with fixed-width slots
    so the convolution rides on CPython's fast multiplication; slot width
    is chosen so no intermediate sum can spill into its neighbour.
    """
    if m <= 64:
        out = [0] * m
        for s, c1 in enumerate(h1):
            if not c1:
                continue
            for t, c2 in enumerate(h2):
                if c2:
                    out[(s + t) % m] += c1 * c2
        return out
    peak = max(h1) * max(h2) * m
    width = max(peak.bit_length() + 1, 8)
    mask = (1 << width) - 1
    n1 = sum(c << (width * i) for i, c in enumerate(h1))
    n2 = sum(c << (width * i) for i, c in enumerate(h2))
    prod = n1 * n2
    out = [0] * m
    for i in range(2 * m - 1):
        out[i % m] += (prod >> (width * i)) & mask
    return out


def _norm_histogram(blocks, p: int, d: int):
    m = p**d
    hist = None
    for blk in blocks:
        h = _hist_H(p, d, blk[1]) if blk[0] == "H" else _hist_I(p, d, blk[1], blk[2])
        hist = h if hist is None else _convolve(hist, h, m)
    return hist


def _rank1_count(blocks, p: int, d: int, target: int) -> int:
    return _norm_histogram(blocks, p, d)[target % (p**d)]


# ---------------------------------------------------------------------------
# chunked full enumeration (brute force oracle)


def _decode_digits(idx, n_digits, base):
    """Split flat indices into n_digits base-`base` digits, least significant first."""
    digits = []
    rest = idx
    for _ in range(n_digits):
        digits.append(rest % base)
        rest = rest // base
    return digits


def _scan_chunk(args):
    """Count matrices with flat index in [start, stop) meeting all congruences.

    Runs in worker processes; everything passed in is picklable plain data.
    Conditions are applied with survivor compression in between.
    """
    start, stop, n, mm, p, m, GA, GB, GL, conditions = args
    idx = np.arange(start, stop, dtype=np.int64)
    digits = _decode_digits(idx, mm * n, m * m)
    cols_a = [[digits[i * mm + k] % m for k in range(mm)] for i in range(n)]
    cols_b = [[digits[i * mm + k] // m for k in range(mm)] for i in range(n)]
    alive = idx
    for i, j in conditions:
        ga, gb = _g_columns(GA, GB, cols_a[i], cols_b[i], cols_a[j], cols_b[j], p, m)
        keep = np.nonzero((ga == GL[i][j][0]) & (gb == GL[i][j][1]))[0]
        if len(keep) == 0:
            return 0
        cols_a = [[arr[keep] for arr in col] for col in cols_a]
        cols_b = [[arr[keep] for arr in col] for col in cols_b]
        alive = keep
    return len(alive)


def _scan_space(space, n, mm, p, m, GA, GB, GL, conditions, workers) -> int:
    """Sum _scan_chunk over a fixed chunk partition, optionally in parallel.

    The partition is independent of the worker count, so the total is
    bit-identical regardless of scheduling.
    """
    jobs = [
        (start, min(start + _CHUNK, space), n, mm, p, m, GA, GB, GL, conditions)
        for start in range(0, space, _CHUNK)
    ]
    if workers > 1 and len(jobs) > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(processes=min(workers, len(jobs))) as pool:
            return sum(pool.map(_scan_chunk, jobs))
    return sum(_scan_chunk(job) for job in jobs)


def _pair_mul(a1, b1, a2, b2, p, m):
    return (a1 * a2 + p * b1 * b2) % m, (a1 * b2 + b1 * a2) % m


def _g_columns(GA, GB, xa, xb, ya, yb, p, m):
    """g(x, y) component arrays for column coordinate arrays (length-m lists)."""
    mm = len(GA)
    ga = 0
    gb = 0
    for l in range(mm):
        ua, ub = 0, 0
        for k in range(mm):
            if GA[k][l] == 0 and GB[k][l] == 0:
                continue
            ta, tb = _pair_mul(xa[k], xb[k], GA[k][l], GB[k][l], p, m)
            ua = (ua + ta) % m
            ub = (ub + tb) % m
        # times conj(y_l)
        ga = (ga + ua * ya[l] - p * ub * yb[l]) % m
        gb = (gb + ub * ya[l] - ua * yb[l]) % m
    return ga % m, gb % m


def _count_brute(L: HermLattice, M: HermLattice, d: int, budget: _Budget, workers=1) -> int:
    p = L.p
    m = p**d
    n, mm = L.rank, M.rank
    ring = m * m
    n_coords = mm * n
    space = ring**n_coords
    budget.charge(space)
    if space > 2**62:
        raise CountInfeasible(space, 2**62)
    GL = _gram_pairs(L, d)
    G = _gram_pairs(M, d)
    GA = [[x[0] for x in row] for row in G]
    GB = [[x[1] for x in row] for row in G]
    # evaluate diagonal conditions first; most candidates die on the first
    # norm congruence
    conditions = [(i, i) for i in range(n)] + [
        (i, j) for i in range(n) for j in range(i + 1, n)
    ]
    return _scan_space(space, n, mm, p, m, GA, GB, GL, conditions, workers)


# ---------------------------------------------------------------------------
# chain-ring linear algebra over Z/p^d


def _pval_int(x: int, p: int, d: int) -> int:
    if x == 0:
        return d
    v = 0
    while x % p == 0 and v < d:
        x //= p
        v += 1
    return v


def _solve_mod(A, rhs, p: int, d: int):
    """All solutions of A z = rhs over Z/p^d.

    Returns (z0, gens) where the solution set is
    {z0 + sum w_i * g_i : 0 <= w_i < c_i} with distinct elements, or None.
    """
    m = p**d
    R = len(A)
    C = len(A[0]) if R else 0
    A = [[x % m for x in row] for row in A]
    rhs = [x % m for x in rhs]
    V = [[1 if i == j else 0 for j in range(C)] for i in range(C)]
    r = 0
    pivots = []
    while r < min(R, C):
        best = None
        for i in range(r, R):
            for j in range(r, C):
                v = _pval_int(A[i][j], p, d)
                if best is None or v < best[0]:
                    best = (v, i, j)
                    if v == 0:
                        break
            if best and best[0] == 0:
                break
        if best is None or best[0] >= d:
            break
        e, bi, bj = best
        A[r], A[bi] = A[bi], A[r]
        rhs[r], rhs[bi] = rhs[bi], rhs[r]
        if bj != r:
            for row in A:
                row[r], row[bj] = row[bj], row[r]
            for row in V:
                row[r], row[bj] = row[bj], row[r]
        pe = p**e
        u = A[r][r] // pe
        uinv = pow(u, -1, m)
        A[r] = [(x * uinv) % m for x in A[r]]
        rhs[r] = rhs[r] * uinv % m
        for i in range(R):
            if i != r and A[i][r]:
                q = A[i][r] // pe
                A[i] = [(A[i][k] - q * A[r][k]) % m for k in range(C)]
                rhs[i] = (rhs[i] - q * rhs[r]) % m
        for jcol in range(r + 1, C):
            if A[r][jcol]:
                q = A[r][jcol] // pe
                # column op: col_jcol -= q * col_r  (only row r is nonzero there)
                A[r][jcol] = (A[r][jcol] - q * A[r][r]) % m
                for row in V:
                    row[jcol] = (row[jcol] - q * row[r]) % m
        pivots.append((r, e))
        r += 1
    for i in range(r, R):
        if rhs[i] % m:
            return None
    zp = [0] * C
    gens = []
    for ri, e in pivots:
        pe = p**e
        if rhs[ri] % pe:
            return None
        zp[ri] = rhs[ri] // pe
        if e:
            vec = [V[i][ri] * (p ** (d - e)) % m for i in range(C)]
            gens.append((vec, p**e))
    for c in range(r, C):
        gens.append(([V[i][c] % m for i in range(C)], m))
    z0 = [sum(V[i][k] * zp[k] for k in range(C)) % m for i in range(C)]
    return z0, gens


def _coset_arrays(z0, gens, m):
    """Materialize the solution coset as an int64 array of shape (C, N)."""
    C = len(z0)
    arr = np.array(z0, dtype=np.int64).reshape(C, 1)
    for vec, cnt in gens:
        if cnt == 1:
            continue
        steps = np.outer(np.array(vec, dtype=np.int64), np.arange(cnt, dtype=np.int64))
        arr = (arr[:, :, None] + steps[:, None, :]).reshape(C, -1) % m
    return arr


def _coset_size(gens):
    size = 1
    for _, cnt in gens:
        size *= cnt
    return size


def _qvals(GA, GB, ya, yb, p, m):
    """b-part of g(y, y) for coordinate arrays ya, yb of shape (m, N)."""
    mm = len(GA)
    acc = 0
    for k in range(mm):
        for l in range(mm):
            ga, gb = GA[k][l], GB[k][l]
            if ga == 0 and gb == 0:
                continue
            t1 = (ya[k] * ya[l] - p * yb[k] * yb[l]) % m
            t2 = (ya[l] * yb[k] - ya[k] * yb[l]) % m
            acc = (acc + gb * t1 + ga * t2) % m
    return acc % m


def _count_backtrack(L, M, d, budget: _Budget, workers=1) -> int:
    p = L.p
    m = p**d
    n, mm = L.rank, M.rank
    GL = _gram_pairs(L, d)
    G = _gram_pairs(M, d)
    GA = [[x[0] for x in row] for row in G]
    GB = [[x[1] for x in row] for row in G]
    ring = m * m
    col_space = ring**mm
    budget.charge(col_space)

    def column_linear_rows(fixed_cols, j):
        """Linear system rows/rhs for column j against already-fixed columns."""
        A, rhs = [], []
        for i, (xa, xb) in enumerate(fixed_cols):
            ua, ub = [0] * mm, [0] * mm
            for l in range(mm):
                sa, sb = 0, 0
                for k in range(mm):
                    if GA[k][l] == 0 and GB[k][l] == 0:
                        continue
                    ta, tb = _pair_mul(xa[k], xb[k], GA[k][l], GB[k][l], p, m)
                    sa = (sa + ta) % m
                    sb = (sb + tb) % m
                ua[l], ub[l] = sa, sb
            # g_a = sum(ua_l*ya_l - p*ub_l*yb_l), g_b = sum(ub_l*ya_l - ua_l*yb_l)
            A.append([ua[l] for l in range(mm)] + [(-p * ub[l]) % m for l in range(mm)])
            A.append([ub[l] for l in range(mm)] + [(-ua[l]) % m for l in range(mm)])
            rhs.extend([GL[i][j][0], GL[i][j][1]])
        return A, rhs

    def extend(fixed_cols):
        j = len(fixed_cols)
        A, rhs = column_linear_rows(fixed_cols, j)
        sol = _solve_mod(A, rhs, p, d)
        if sol is None:
            return 0
        z0, gens = sol
        size = _coset_size(gens)
        budget.charge(size)
        arr = _coset_arrays(z0, gens, m)
        ya, yb = arr[:mm], arr[mm:]
        q = _qvals(GA, GB, ya, yb, p, m)
        mask = q == (GL[j][j][1] % m)
        if j + 1 == n:
            return int(np.count_nonzero(mask))
        total = 0
        sel = np.nonzero(mask)[0]
        for t in sel:
            col = ([int(ya[k][t]) for k in range(mm)], [int(yb[k][t]) for k in range(mm)])
            total += extend(fixed_cols + [col])
        return total

    # first column: chunked filtered enumeration (parallelizable for n = 1)
    if n == 1:
        return _scan_space(col_space, 1, mm, p, m, GA, GB, GL, [(0, 0)], workers)
    t0 = GL[0][0][1] % m
    total = 0
    survivors = []
    for start in range(0, col_space, _CHUNK):
        stop = min(start + _CHUNK, col_space)
        idx = np.arange(start, stop, dtype=np.int64)
        digits = _decode_digits(idx, mm, ring)
        ya = [dig % m for dig in digits]
        yb = [dig // m for dig in digits]
        q = _qvals(GA, GB, ya, yb, p, m)
        sel = np.nonzero(q == t0)[0]
        budget.charge(len(sel))
        for t in sel:
            survivors.append(
                ([int(ya[k][t]) for k in range(mm)], [int(yb[k][t]) for k in range(mm)])
            )
    for col in survivors:
        total += extend([col])
    return total


# ---------------------------------------------------------------------------
# fibration counter for rank-2 diagonal sources into sums of hyperbolic planes


def _count_fibration(L, M, d, budget: _Budget) -> int:
    """count(<t1> + <t2> -> H^s) with t2 a unit.

    Restricting a hom to the unit-norm column fibers the count over vectors
    of norm t2; each fiber is a rank-1 count into the orthogonal complement
    of a good lift, which is H^(s-1) + <-t2> exactly.
    """
    p = L.p
    targets = _diag_targets(L, d)
    units = [i for i in range(2) if val_p(L.gram[i][i].a, p) == 0]
    iu = units[0]
    t_unit = L.gram[iu][iu].a
    t_other_mod = targets[1 - iu]
    s = M.rank // 2
    base_blocks = [("H", 0)] * s
    fiber_blocks = [("I", -t_unit, 0)] + [("H", 0)] * (s - 1)
    m = p**d
    base = _rank1_count(base_blocks, p, d, _rat_mod(t_unit, m, p))
    fiber = _rank1_count(fiber_blocks, p, d, t_other_mod)
    return base * fiber


# ---------------------------------------------------------------------------
# optional smooth-lifting (Hensel) counter for rank-1 sources


def _count_hensel_rank1(L, M, d, budget: _Budget) -> int:
    p = L.p
    mm = M.rank
    C = 2 * mm
    if p**C > 2_000_000:
        raise CountInfeasible(p**C, 2_000_000)
    m = p**d
    G = _gram_pairs(M, d)
    Q = [[0] * C for _ in range(C)]
    for k in range(mm):
        for l in range(mm):
            ga, gb = G[k][l]
            Q[k][l] += gb
            Q[mm + k][mm + l] -= p * gb
            Q[mm + k][l] += ga
            Q[k][mm + l] -= ga
    t0 = _diag_targets(L, d)[0]

    Qm = np.array(Q, dtype=np.int64)
    S = Qm + Qm.T

    def residues():
        idx = np.arange(p**C, dtype=np.int64)
        return np.stack(_decode_digits(idx, C, p))

    def count_poly(lin, const, dp):
        """#{z mod p^dp : z^T Q z + lin.z + const = 0 mod p^dp}."""
        if dp <= 0:
            return 1
        budget.charge(p**C)
        Z = residues()
        F = np.einsum("iN,ij,jN->N", Z, Qm, Z) + np.asarray(lin, dtype=np.int64) @ Z + const
        if dp == 1:
            return int(np.count_nonzero(F % p == 0))
        grad = S @ Z + np.asarray(lin, dtype=np.int64)[:, None]
        nonsmooth = np.all(grad % p == 0, axis=0)
        sols = F % p == 0
        smooth_count = int(np.count_nonzero(sols & ~nonsmooth))
        total = smooth_count * p ** ((C - 1) * (dp - 1))
        for t in np.nonzero(sols & nonsmooth)[0]:
            z1 = [int(Z[i][t]) for i in range(C)]
            Fz = int(F[t])
            if dp == 2:
                if Fz % p**2 == 0:
                    total += p**C
                continue
            if Fz % p**2:
                continue
            g1 = [(int(x)) // p for x in (S @ np.array(z1, dtype=np.int64)
                                          + np.asarray(lin, dtype=np.int64))]
            total += p**C * count_poly(g1, Fz // p**2, dp - 2)
        return total

    return count_poly([0] * C, -t0, d)


# ---------------------------------------------------------------------------
# dispatch


_COUNT_CACHE: dict = {}


def _is_diagonal(L: HermLattice) -> bool:
    return all(
        L.gram[i][j].is_zero() for i in range(L.rank) for j in range(L.rank) if i != j
    )


def count_homs(L, M=None, d=None, *, strategy="auto", budget=None, workers=1) -> int:
    """Exact |Herm_{L,M}(O_{F0}/p^d)|.

    Counts m x n matrices X over O_F/pi^(2d) with
    conj-transpose(X) * (pi*T_M) * X = pi*T_L modulo pi^(2d).
    """
    if isinstance(L, CountRequest):
        req = L
    else:
        req = CountRequest(L, M, d)
    key = (req.L.gram, req.M.gram, req.L.p, req.d, strategy)
    if key in _COUNT_CACHE:
        val = _COUNT_CACHE[key]
    else:
        bud = budget if isinstance(budget, _Budget) else _Budget(budget)
        val = _dispatch(req.L, req.M, req.d, strategy, bud, workers)
        _COUNT_CACHE[key] = val
    if _RECORDING:
        _RECORDED.append(
            {
                "L": req.L,
                "M": req.M,
                "d": req.d,
                "count": val,
                "strategy": strategy,
            }
        )
    return val


def _dispatch(L, M, d, strategy, bud, workers) -> int:
    n = L.rank
    if strategy == "brute":
        return _count_brute(L, M, d, bud, workers)
    if strategy == "backtrack":
        return _count_backtrack(L, M, d, bud, workers)
    if strategy == "hensel":
        if n != 1:
            raise ValueError("hensel counter handles rank-1 sources only")
        return _count_hensel_rank1(L, M, d, bud)
    if strategy == "histogram":
        if n != 1:
            raise ValueError("histogram counter handles rank-1 sources only")
        blocks = _target_blocks(M, d)
        bud.charge(len(blocks) * L.p ** (2 * d))
        return _rank1_count(blocks, L.p, d, _diag_targets(L, d)[0])
    if strategy == "fibration":
        blocks = _target_blocks(M, d)
        if not (
            n == 2
            and _is_diagonal(L)
            and all(b == ("H", 0) for b in blocks)
            and any(val_p(L.gram[i][i].a, L.p) == 0 for i in range(2))
        ):
            raise ValueError("fibration counter needs a diagonal rank-2 source "
                             "with a unit entry and a self-dual hyperbolic target")
        return _count_fibration(L, M, d, bud)
    if strategy != "auto":
        raise ValueError(f"unknown strategy {strategy!r}")
    if n == 1:
        blocks = _target_blocks(M, d)
        bud.charge(len(blocks) * L.p ** (2 * d))
        return _rank1_count(blocks, L.p, d, _diag_targets(L, d)[0])
    if n == 2 and _is_diagonal(L):
        blocks = _target_blocks(M, d)
        if all(b == ("H", 0) for b in blocks) and any(
            val_p(L.gram[i][i].a, L.p) == 0 for i in range(2)
        ):
            bud.charge(2 * len(blocks) * L.p ** (2 * d))
            return _count_fibration(L, M, d, bud)
    return _count_backtrack(L, M, d, bud, workers)


# ---------------------------------------------------------------------------
# densities


def hom_dimension(n: int, m: int) -> int:
    return n * (2 * m - n)


def stabilization_floor(L) -> int:
    """Smallest precision from which consecutive agreement is trusted.

    Congruences modulo p^d cannot separate a diagonal target from 0 until
    d exceeds its p-valuation, so ratios below this floor can agree
    spuriously.  Derived from val(L); callers may override with d_min.
    """
    return val_lattice(L) // 2 + 1


def density_series(
    M, L, d_max: int = 4, *, d_min: int = 1, strategy="auto", budget=None, workers=1
) -> DensitySeries:
    """Counts and ratios for d = 1, 2, ... until two consecutive ratios agree.

    Agreement between d and d+1 is only accepted once d >= d_min.
    """
    q = L.params.q
    dim = hom_dimension(L.rank, M.rank)
    counts, ratios = [], []
    prev = None
    stabilized = None
    for d in range(1, max(d_max, d_min) + 1):
        c = count_homs(L, M, d, strategy=strategy, budget=budget, workers=workers)
        r = Fraction(c, q ** (d * dim))
        counts.append((d, c))
        ratios.append((d, r))
        if prev is not None and r == prev and d - 1 >= d_min:
            stabilized = d - 1
            break
        prev = r
    return DensitySeries(tuple(counts), tuple(ratios), stabilized)


def local_density(
    M, L, d_max: int = 4, *, d_min: int = 1, strategy="auto", budget=None, workers=1
) -> Fraction:
    """The stabilized ratio count(d) / q^(d * n * (2m - n))."""
    series = density_series(
        M, L, d_max, d_min=d_min, strategy=strategy, budget=budget, workers=workers
    )
    if series.stabilized_at is None:
        raise NotStabilized(d_max, ratios=series.ratios)
    return series.value()


def _lagrange_coeffs(points):
    """Exact interpolation through (x_i, y_i); coefficients X^0 upward."""
    n = len(points)
    coeffs = [Fraction(0)] * n
    for i, (xi, yi) in enumerate(points):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            # multiply basis by (X - xj)
            basis = [Fraction(0)] + basis
            basis = [basis[k] - xj * basis[k + 1] for k in range(len(basis) - 1)] + [
                basis[-1]
            ]
            denom *= xi - xj
        w = yi / denom
        for k in range(len(basis)):
            coeffs[k] += w * basis[k]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def density_polynomial(
    M,
    L,
    K_max: int | None = None,
    *,
    d_max: int | None = None,
    strategy="auto",
    budget=None,
    workers=1,
) -> DensityPolynomial:
    """The polynomial with P(q^(-2k)) = Den(M + H^k, L), fitted exactly.

    Evaluates the density on the grid k = 0..K and grows K until two
    consecutive Lagrange fits coincide.
    """
    p = L.p
    q = L.params.q
    k0 = val_lattice(L) + L.rank
    cap = K_max if K_max is not None else k0 + 3
    d_min = stabilization_floor(L)
    if d_max is None:
        d_max = d_min + 2
    values: dict = {}

    def value(k: int) -> Fraction:
        if k not in values:
            target = M if k == 0 else orthogonal_direct_sum(standard_H(p, k), M)
            values[k] = local_density(
                target, L, d_max, d_min=d_min, strategy=strategy,
                budget=budget, workers=workers,
            )
        return values[k]

    def fit(K: int):
        pts = [(Fraction(1, q ** (2 * k)), value(k)) for k in range(K + 1)]
        return _lagrange_coeffs(pts)

    prev = fit(k0)
    for K in range(k0 + 1, cap + 1):
        cur = fit(K)
        if cur == prev:
            poly = DensityPolynomial(
                prev, tuple(sorted(values.items())), fit_order=K - 1
            )
            for k, v in poly.grid:
                assert poly.evaluate(Fraction(1, q ** (2 * k))) == v
            return poly
        prev = cur
    raise FitNotStabilized(cap)


def selfdual_density_closed_form(n: int, q: int) -> Fraction:
    """Den(M_n, M_n): prod(1 - q^-2i), doubled when n is odd."""
    if n < 1:
        raise ValueError("rank must be >= 1")
    r = n // 2
    acc = Fraction(1)
    for i in range(1, r + 1):
        acc *= 1 - Fraction(1, q ** (2 * i))
    return acc if n % 2 == 0 else 2 * acc


def derived_density(
    L,
    *,
    K_max=None,
    d_max=None,
    strategy="auto",
    budget=None,
    workers=1,
) -> Fraction:
    """The normalized derivative -2 P'(1) / Den(M_n, M_n) at the split point.

    Defined exactly when L spans a nonsplit space, where Den(M_n, L) = 0.
    """
    n = L.rank
    if same_isometry_class_as_Mn(L):
        raise SplitClass("L spans a split space; the derived density is undefined")
    Mn = standard_Mn(L.p, n)
    P = density_polynomial(
        Mn, L, K_max, d_max=d_max, strategy=strategy, budget=budget, workers=workers
    )
    assert P.evaluate(1) == 0, "nonsplit class must have vanishing density at X=1"
    den_prime = -2 * P.derivative_at(1)
    return den_prime / selfdual_density_closed_form(n, L.params.q)


def whittaker_value(
    L,
    s: int,
    *,
    comparison_rank: int | None = None,
    d_max: int = 4,
    strategy="auto",
    budget=None,
    workers=1,
) -> Fraction:
    """Den(M_n + H^s, L): the degree-s Fourier coefficient value for L.

    comparison_rank overrides n = rank(L), e.g. to compare a rank-n lattice
    inside the even lattice chain M_(n+1) + H^s.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    n = comparison_rank if comparison_rank is not None else L.rank
    M = standard_Mn(L.p, n)
    target = M if s == 0 else orthogonal_direct_sum(standard_H(L.p, s), M)
    d_min = stabilization_floor(L)
    return local_density(
        target, L, max(d_max, d_min + 1), d_min=d_min,
        strategy=strategy, budget=budget, workers=workers,
    )
