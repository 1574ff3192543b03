import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from bpthh.arith import AbelianGroup
from bpthh.graded import (
    Gen,
    GradedMap,
    Monomial,
    Presentation,
    Relation,
    adjoin_exterior,
    direct_sum,
    free_module,
    shift,
    v1_multiplication,
    v1_tower_order,
)

ONE = Gen("1", (), 0)


def unit(p):
    return free_module(p, [ONE], "Z[v1]")


def cyclic_tower(p, order, length, degree=0):
    """Z/p^order on x in ``degree`` with v1^length * x = 0."""
    x = Gen("x", (), degree)
    rels = [Relation([(p ** order, Monomial(x))], p), Relation([(1, Monomial(x, length))], p)]
    return Presentation(p, lambda D: [x], lambda D: [r for r in rels if r.degree <= D], name="tower"), x


def test_free_module_degrees():
    F = unit(2)
    assert F.realize_degree(4) == AbelianGroup(1)
    assert F.realize_degree(3) == AbelianGroup()
    assert unit(3).realize_degree(4) == AbelianGroup(1)
    assert unit(3).realize_degree(2) == AbelianGroup()


def test_shift_moves_groups():
    assert shift(unit(2), 3).realize_degree(3) == AbelianGroup(1)
    assert shift(unit(2), 3).realize_degree(2) == AbelianGroup()
    for d in range(20):
        assert shift(shift(unit(3), 2), 5).realize_degree(d) == shift(unit(3), 7).realize_degree(d)


def test_adjoin_exterior():
    E = adjoin_exterior(unit(2), 7, "sigma_v2")
    assert E.realize_degree(7) == AbelianGroup(1)
    assert E.realize_degree(8) == AbelianGroup(1)
    assert E.realize_degree(9) == AbelianGroup(1)
    assert E.realize_degree(1) == AbelianGroup()


def test_direct_sum_adds():
    M, _ = cyclic_tower(2, 2, 3)
    S = direct_sum([unit(2), M, shift(unit(2), 1)])
    for d in range(12):
        expected = unit(2).realize_degree(d) + M.realize_degree(d) + unit(2).realize_degree(d - 1)
        assert S.realize_degree(d) == expected


def test_inhomogeneous_relation_rejected():
    x, y = Gen("x", (), 0), Gen("y", (), 3)
    with pytest.raises(ValueError):
        Relation([(1, Monomial(x)), (1, Monomial(y))], 2)


def test_unknown_generator_rejected():
    x, y = Gen("x", (), 0), Gen("y", (), 2)
    P = Presentation(2, lambda D: [x], lambda D: [Relation([(1, Monomial(y))], 2)])
    with pytest.raises(ValueError):
        P.realize_degree(2)


def test_tower_and_orders():
    M, x = cyclic_tower(3, 2, 3)
    assert [M.realize_degree(4 * k) for k in range(4)] == [AbelianGroup(0, (2,))] * 3 + [AbelianGroup()]
    assert v1_tower_order(M, x) == 3
    assert v1_tower_order(unit(3), ONE) == math.inf
    assert M.element_order([(1, Monomial(x))], 0) == 2
    assert M.element_order([(3, Monomial(x))], 0) == 1
    assert M.is_zero([(9, Monomial(x))], 0)
    assert not M.is_zero([(3, Monomial(x))], 0)


def test_summand_labels():
    M, x = cyclic_tower(2, 1, 2)
    S = direct_sum([unit(2), M])
    labels = S.summands(0)
    assert sorted(e for _, e in labels) == [0, 1]


def test_enumeration_order_irrelevant():
    rng = random.Random(3)
    gens = [Gen("g", (i,), 2 * i) for i in range(6)]
    rels = [Relation([(2, Monomial(g))], 2) for g in gens[::2]]
    rels += [Relation([(1, Monomial(gens[1], 2)), (-4, Monomial(gens[3]))], 2)]
    base = Presentation(2, lambda D: gens, lambda D: rels)

    def shuffled(xs):
        xs = list(xs)
        rng.shuffle(xs)
        return xs

    other = Presentation(2, lambda D: shuffled(gens), lambda D: shuffled(rels))
    assert base.realize_range(20, workers=1) == other.realize_range(20, workers=1)
    assert base.realize_range(20, workers=4) == base.realize_range(20, workers=1)


def test_map_kernel_cokernel():
    # multiplication by p on Z[v1]: kernel 0, cokernel Z/p in every even degree
    F = unit(2)
    times_p = GradedMap(F, F, lambda g: [(2, Monomial(g))], 0)
    assert times_p.kernel(4) == AbelianGroup()
    assert times_p.image(4) == AbelianGroup(1)
    assert times_p.cokernel_into(4) == AbelianGroup(0, (1,))
    assert times_p.is_well_defined(4)


def test_v1_multiplication_on_tower():
    M, _ = cyclic_tower(2, 1, 2)
    v1 = v1_multiplication(M)
    assert v1.kernel(0) == AbelianGroup()
    assert v1.kernel(2) == AbelianGroup(0, (1,))
    assert v1.cokernel_into(0) == AbelianGroup(0, (1,))
    assert v1.then(v1).kernel(0) == AbelianGroup(0, (1,))


def test_ill_defined_map_detected():
    M, x = cyclic_tower(2, 1, 5)
    F = unit(2)
    include = GradedMap(M, F, lambda g: [(1, Monomial(ONE))], 0)
    assert not include.is_well_defined(0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(1, 5), st.integers(0, 6))
def test_cyclic_tower_property(p, order, length, shift_by):
    M, _ = cyclic_tower(p, order, length)
    S = shift(M, shift_by)
    v = 2 * p - 2
    for k in range(length + 2):
        expected = AbelianGroup(0, (order,)) if k < length else AbelianGroup()
        assert S.realize_degree(shift_by + k * v) == expected
        assert S.realize_degree(shift_by + k * v + 1) == AbelianGroup()
