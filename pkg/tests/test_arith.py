import random

import pytest
from hypothesis import given, settings, strategies as st

from bpthh.arith import AbelianGroup, Prime, cokernel_p, merge, nu_p

from oracles import cokernel_by_enumeration, cokernel_by_minors


def test_prime_validation():
    assert Prime(7) == 7
    for bad in (0, 1, 4, 9):
        with pytest.raises(ValueError):
            Prime(bad)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_nu_p_units_and_powers(p):
    assert nu_p(1, p) == 0
    for s in range(6):
        for m in (1, p + 1, 2 * p - 1):
            if m % p:
                assert nu_p(p ** s * m, p) == s


def test_nu_p_examples():
    assert nu_p(12, 2) == 2
    with pytest.raises(ValueError):
        nu_p(0, 3)


def test_abelian_group_normalizes():
    g = AbelianGroup(1, (3, 1, 2))
    assert g.torsion == (1, 2, 3)
    assert g.length == 6
    assert g == AbelianGroup(1, (2, 3, 1))
    assert g + AbelianGroup(2, (1,)) == AbelianGroup(3, (1, 1, 2, 3))
    assert AbelianGroup.from_record(g.to_record(5)) == g


def test_cokernel_identity_and_zp():
    assert cokernel_p([[1, 0], [0, 1]], 3) == AbelianGroup()
    for p in (2, 3, 5):
        assert cokernel_p([[p]], p) == AbelianGroup(0, (1,))


def test_cokernel_diag_2_12():
    M = [[2, 0], [0, 12]]
    assert cokernel_p(M, 2) == AbelianGroup(0, (1, 2))
    assert cokernel_p(M, 3) == AbelianGroup(0, (1,))
    # brute force on representatives mod 24
    assert cokernel_by_enumeration(M, 2, 3) == [1, 2]
    assert cokernel_by_enumeration(M, 3, 1) == [1]


def test_cokernel_free_part():
    assert cokernel_p([[0], [0]], 2) == AbelianGroup(2)
    assert cokernel_p([[2], [4]], 2) == AbelianGroup(1, (1,))
    assert cokernel_p([], 2) == AbelianGroup()


def _random_matrix(rng, max_dim=4, bound=8):
    r = rng.randint(1, max_dim)
    c = rng.randint(1, max_dim)
    return [[rng.randint(-bound, bound) for _ in range(c)] for _ in range(r)]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_cokernel_matches_minor_oracle(p):
    rng = random.Random(1000 + p)
    for _ in range(300):
        M = _random_matrix(rng)
        assert cokernel_p(M, p) == cokernel_by_minors(M, p), M


def test_cokernel_matches_enumeration_small():
    rng = random.Random(7)
    for _ in range(60):
        M = _random_matrix(rng, max_dim=2, bound=6)
        for p in (2, 3):
            j = 3 if p == 2 else 2
            expected = cokernel_by_enumeration(M, p, j)
            g = cokernel_p(M, p)
            assert sorted([min(e, j) for e in g.torsion] + [j] * g.free_rank) == expected, M


def _unimodular_ops(rng, M):
    M = [list(r) for r in M]
    rows, cols = len(M), len(M[0])
    for _ in range(6):
        kind = rng.randrange(4)
        if kind == 0 and rows > 1:
            i, j = rng.sample(range(rows), 2)
            M[i], M[j] = M[j], M[i]
        elif kind == 1 and cols > 1:
            i, j = rng.sample(range(cols), 2)
            for r in M:
                r[i], r[j] = r[j], r[i]
        elif kind == 2 and rows > 1:
            i, j = rng.sample(range(rows), 2)
            k = rng.randint(-3, 3)
            M[i] = [a + k * b for a, b in zip(M[i], M[j])]
        elif kind == 3 and cols > 1:
            i, j = rng.sample(range(cols), 2)
            k = rng.randint(-3, 3)
            for r in M:
                r[i] += k * r[j]
    return M


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from([2, 3, 5]))
def test_cokernel_invariant_under_unimodular(seed, p):
    rng = random.Random(seed)
    M = _random_matrix(rng)
    assert cokernel_p(_unimodular_ops(rng, M), p) == cokernel_p(M, p)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from([2, 3]))
def test_cokernel_block_diagonal_merges(seed, p):
    rng = random.Random(seed)
    A = _random_matrix(rng, 3)
    B = _random_matrix(rng, 3)
    block = [r + [0] * len(B[0]) for r in A] + [[0] * len(A[0]) + r for r in B]
    assert cokernel_p(block, p) == merge([cokernel_p(A, p), cokernel_p(B, p)])
