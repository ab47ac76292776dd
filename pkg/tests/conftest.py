import random
from fractions import Fraction

import pytest

from hermdense.arith import PrimeParams
from hermdense.errors import WitnessNotRepresentable
from hermdense.lattice import (
    HermLattice,
    conj_transpose,
    fsc,
    mat_mul,
    normal_form,
)


def random_block_diag(rng, p, rank):
    """Random standard block-diagonal Gram: unit blocks and hyperbolic planes."""
    n = rank
    M = [[fsc(p, 0)] * n for _ in range(n)]
    off = 0
    while off < n:
        if off + 2 <= n and rng.random() < 0.5:
            c = rng.choice([0, 0, 1])
            w = fsc(p, 0, Fraction(p) ** (c - 1))
            M[off][off + 1] = w
            M[off + 1][off] = -w
            off += 2
        else:
            beta = rng.choice([u for u in range(-p + 1, p) if u % p])
            b = rng.choice([0, 0, 1, 2])
            M[off][off] = fsc(p, Fraction(beta) * p**b)
            off += 1
    return HermLattice(PrimeParams(p), tuple(tuple(r) for r in M))


def random_unimodular(rng, p, n, steps=8):
    """Product of elementary row operations; invertible over O_F."""
    U = [[fsc(p, 1 if i == j else 0) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        op = rng.random()
        if n > 1:
            i, j = rng.sample(range(n), 2)
        else:
            i = j = 0
        if op < 0.6 and n > 1:
            lam = fsc(p, rng.randint(-2, 2), rng.randint(-2, 2))
            for c in range(n):
                U[i][c] = U[i][c] + lam * U[j][c]
        elif op < 0.8 and n > 1:
            U[i], U[j] = U[j], U[i]
        else:
            U[i] = [x * fsc(p, -1) for x in U[i]]
    return tuple(tuple(r) for r in U)


def conjugated(L, U):
    gram = mat_mul(mat_mul(U, L.gram), conj_transpose(U))
    return HermLattice(L.params, gram)


def random_integral_lattice(rng, p, rank):
    """Unimodular conjugate of a random standard block diagonal (integral)."""
    D = random_block_diag(rng, p, rank)
    U = random_unimodular(rng, p, rank)
    return conjugated(D, U)


def random_lattice_with_exact_witness(rng, p, rank, max_resamples=60):
    """Like random_integral_lattice, resampling past the rational-model
    obstruction so normal_form is guaranteed an exact witness.

    Returns (lattice, resample_count); about 1 in 15 draws is obstructed.
    """
    for tries in range(max_resamples):
        L = random_integral_lattice(rng, p, rank)
        try:
            normal_form(L)
            return L, tries
        except WitnessNotRepresentable:
            continue
    raise RuntimeError("generator kept hitting the witness obstruction")


@pytest.fixture
def rng():
    return random.Random(20250809)
