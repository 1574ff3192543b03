import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from bpthh.arith import AbelianGroup, nu_p
from bpthh.catalog import (
    DegreeTable,
    DimensionSeries,
    IntegralGroup,
    a_gen,
    b_gen,
    cooperations,
    rational_thh,
    thc_bpn_fp,
    thc_z,
    thh_bp2_bp1_closed,
    thh_bp2_zp,
    thh_bpn_fp,
    thh_ell,
    thh_ell_zp,
    thh_fp_module,
    thh_z_integral,
    thh_z_p,
    thh_z_p_module,
    thh_z_table_consistency,
)
from bpthh.graded import Gen, Monomial, adjoin_exterior, v1_multiplication, v1_tower_order


def brute_series(factors, D):
    """Count monomials directly instead of multiplying power series."""
    counts = [0] * (D + 1)
    ranges = []
    for kind, deg in factors:
        top = 1 if kind == "ext" else D // deg
        ranges.append([e * deg for e in range(top + 1)])
    for combo in itertools.product(*ranges):
        s = sum(combo)
        if s <= D:
            counts[s] += 1
    return counts


# -- dimension series ------------------------------------------------------


def test_thh_bpn_fp_examples():
    assert [thh_bpn_fp(-1, 3)(d) for d in range(8)] == [1, 0, 1, 0, 1, 0, 1, 0]
    s = thh_bpn_fp(1, 2)
    assert (s(3), s(8), s(1), s(0)) == (1, 1, 0, 1)


def test_rational_thh_example():
    assert rational_thh(2, 1, 2).coefficients(7) == [1, 0, 1, 1, 1, 1, 1, 2]
    assert rational_thh(0, 0).coefficients(5) == [1, 0, 0, 0, 0, 0]
    with pytest.raises(ValueError):
        rational_thh(1, 2)


def test_cooperations_examples():
    s = cooperations(2, 1, 2)
    assert s(7) == 1 and s(9) == 1
    # m = -1 has the sigma v_0 factor (degree 1) as well
    s = cooperations(2, -1, 2)
    assert [d for d in range(30) if s(d)] == [0, 1, 3, 4, 7, 8, 10, 11]
    assert cooperations(2, 2, 2).coefficients(8) == brute_series([("poly", 2), ("poly", 6)], 8)


def test_thc_matches_thh_over_fp():
    for n, p in [(0, 2), (1, 2), (2, 3)]:
        assert thc_bpn_fp(n, p).coefficients(300) == thh_bpn_fp(n, p).coefficients(300)
    assert thc_bpn_fp(1, 2)(8) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["poly", "ext", "divided"]), st.integers(1, 9)), max_size=4))
def test_series_matches_monomial_count(factors):
    series = DimensionSeries(tuple(factors))
    assert series.coefficients(30) == brute_series(factors, 30)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.sampled_from(["poly", "ext"]), st.integers(1, 7)), max_size=3),
    st.lists(st.tuples(st.sampled_from(["poly", "ext"]), st.integers(1, 7)), max_size=3),
)
def test_series_multiplicative(f, g):
    a, b = DimensionSeries(tuple(f)), DimensionSeries(tuple(g))
    prod = (a * b).coefficients(25)
    ca, cb = a.coefficients(25), b.coefficients(25)
    assert prod == [sum(ca[i] * cb[d - i] for i in range(d + 1)) for d in range(26)]


# -- THH(Z_(p)), THH(Z), THC(Z) --------------------------------------------


def test_thh_z_p_examples():
    assert thh_z_p(0, 2) == AbelianGroup(1)
    assert thh_z_p(3, 2) == AbelianGroup(0, (1,))
    assert thh_z_p(7, 2) == AbelianGroup(0, (2,))
    assert thh_z_p(4, 2) == AbelianGroup()


@pytest.mark.parametrize("p", [2, 3, 5])
def test_thh_z_p_module_matches_formula(p):
    M = thh_z_p_module(p)
    for d in range(200):
        assert M.realize_degree(d) == thh_z_p(d, p)


def test_integral_table_readings():
    assert thh_z_integral(0) == IntegralGroup(1)
    assert thh_z_integral(5) == IntegralGroup(0, (3,))
    assert thh_z_integral(5, "k-1") == IntegralGroup(0, (2,))
    assert thh_z_integral(6) == IntegralGroup()
    result = thh_z_table_consistency()
    assert result["k"] == []
    assert result["k-1"]


def test_thc_z_universal_coefficients():
    assert thc_z(0) == IntegralGroup(1)
    for p in (2, 3, 5, 7):
        assert thc_z(2 * p).localize(p) == AbelianGroup(0, (1,))
    for d in range(1, 60, 2):
        assert thc_z(d) == IntegralGroup()
    # explicit table: THH_{2k-1} = Z/k gives Ext contribution Z/k in degree 2k
    for k in range(2, 30):
        assert thc_z(2 * k) == IntegralGroup(0, (k,))


# -- THH(ell) --------------------------------------------------------------


def test_thh_ell_examples():
    E = thh_ell(2)
    assert E.realize_degree(3) == AbelianGroup(1)
    assert E.realize_degree(10) == AbelianGroup(1, (1,))
    assert thh_ell(3).realize_degree(5) == AbelianGroup(1)


def test_thh_ell_degree_ten_by_hand():
    # monomials of degree 10 at p=2: v1^5, v1^2 a_1 ... a_1 is odd; so v1^5*1, b_1, v0 b_1
    E = thh_ell(2)
    data = E.degree_data(10)
    assert sorted(str(m) for m in data.basis) == ["b(1,0,0)", "b(1,0,1)", "v1^5*1"]


def test_tower_orders():
    E = thh_ell(2)
    assert v1_tower_order(E, b_gen(2, 1)) == 2
    assert v1_tower_order(E, b_gen(2, 1, 1)) == 0
    assert v1_tower_order(E, Gen("lambda1", (), 3)) == math.inf
    assert v1_tower_order(E, Gen("1", (), 0)) == math.inf


@pytest.mark.parametrize("p", [2, 3])
def test_tower_exponents_follow_formula(p):
    E = thh_ell(p)
    for i in range(1, 3 * p):
        if i % p == 0 and i != p:
            continue
        n = nu_p(i, p)
        for h in range(n + 1):
            expected = sum(p ** j for j in range(1, n - h + 2))
            assert v1_tower_order(E, b_gen(p, i, h)) == expected, (i, h)


def test_a_classes_are_v1_free():
    E = thh_ell(2)
    for n in range(3):
        assert v1_tower_order(E, a_gen(2, n), max_power=40) == math.inf


def test_thh_ell_zp_examples():
    Z = thh_ell_zp(2)
    assert Z.realize_degree(7) == AbelianGroup(0, (1,))
    assert Z.realize_degree(26) == AbelianGroup(0, (1,))  # b_3
    assert Z.realize_degree(30) == AbelianGroup()
    assert Z.realize_degree(34) == AbelianGroup(0, (3,))
    assert Z.realize_degree(3) == AbelianGroup(1)


@pytest.mark.parametrize("p,D", [(2, 260), (3, 500)])
def test_thh_ell_zp_from_v1_cofiber_sequence(p, D):
    """THH(ell;Z_(p)) sits between coker(v1) and a shifted ker(v1) on THH(ell)."""
    E, Z = thh_ell(p), thh_ell_zp(p)
    v1 = v1_multiplication(E)
    for d in range(D):
        outer = v1.cokernel_into(d)
        if d - 2 * p + 1 >= 0:
            outer = outer + v1.kernel(d - 2 * p + 1)
        middle = Z.realize_degree(d)
        assert middle.free_rank == outer.free_rank, d
        assert middle.length == outer.length, d


@pytest.mark.parametrize("p,D", [(2, 400), (3, 600)])
def test_thh_ell_rational_rank(p, D):
    E = thh_ell(p)
    series = rational_thh(1, 1, p)
    ranks = [g.free_rank for g in E.realize_range(D)]
    assert ranks == series.coefficients(D)


# -- THH(BP<2>) models ------------------------------------------------------


def test_thh_bp2_zp_examples():
    M = thh_bp2_zp(2)
    assert M.realize_degree(0) == AbelianGroup(1)
    assert M.realize_degree(15) == AbelianGroup(0, (1,))
    assert M.realize_degree(3) == AbelianGroup(1)


def test_thh_bp2_zp_torsion_orders_p3():
    M = thh_bp2_zp(3)
    T = DegreeTable(3)
    # lambda_3 and lambda_3 mu_3 carry Z/3, lambda_4 carries Z/9
    assert M.realize_degree(T.lam(3)) == AbelianGroup(0, (1,))
    assert M.realize_degree(T.lam(3) + T.mu(2)) == AbelianGroup(0, (1,))
    assert M.realize_degree(T.lam(4)) == AbelianGroup(0, (2,))


def test_closed_form_examples():
    C = thh_bp2_bp1_closed(2)
    assert C.realize_degree(0) == AbelianGroup(1)
    assert C.realize_degree(7) == AbelianGroup(2)
    assert C.realize_degree(3) == AbelianGroup(1)


@pytest.mark.parametrize("p", [2, 3])
def test_closed_form_rational_rank(p):
    C = thh_bp2_bp1_closed(p)
    D = 300
    assert [g.free_rank for g in C.realize_range(D)] == rational_thh(2, 1, p).coefficients(D)


def test_adjoin_exterior_n1_e1():
    E1 = adjoin_exterior(thh_z_p_module(2), 3, "sigma_v1")
    assert E1.realize_degree(3) == AbelianGroup(1, (1,))


def test_fp_module():
    M = thh_fp_module(3)
    assert [M.realize_degree(d) for d in range(4)] == [AbelianGroup(0, (1,)), AbelianGroup(), AbelianGroup(0, (1,)), AbelianGroup()]
