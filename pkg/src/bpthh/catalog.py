"""Closed-form models: presentations of THH groups and dimension series.

Naming of the THH(ell) generators keeps the double indexing of the torsion
classes: ``b(alpha, n, h)`` is ``v0^h b_i`` with ``i = alpha * p^n`` and
``p`` not dividing ``alpha``; ``a(n)`` is ``v0^n a_{p^n}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

from .arith import AbelianGroup, as_prime, nu_p
from .graded import Gen, Monomial, Presentation, Relation, direct_sum, free_module, shift


class DegreeTable:
    """Degrees of the named classes at a fixed prime."""

    def __init__(self, p: int):
        self.p = as_prime(p)

    @property
    def v1(self) -> int:
        return 2 * self.p - 2

    def lam(self, s: int) -> int:
        return 2 * self.p ** s - 1

    def mu(self, n: int) -> int:
        """Degree of mu^{p^{n+1}}."""
        return 2 * self.p ** (n + 1)

    def sigma_v(self, n: int) -> int:
        return 2 * self.p ** n - 1

    def a(self, i: int) -> int:
        return 2 * i * self.p ** 2 - 1

    def b(self, i: int) -> int:
        return 2 * i * self.p ** 2 + 2 * self.p - 2

    def c(self, i: int) -> int:
        return 2 * (i + 1) * self.p ** 2 - 2

    def b_alpha(self, alpha: int, n: int) -> int:
        return 2 * self.p ** (n + 2) * alpha + 2 * self.p - 2

    def a_pn(self, n: int) -> int:
        return 2 * self.p ** (n + 2) - 1


def split_index(i: int, p: int) -> Tuple[int, int]:
    """``i = alpha * p^n`` with ``p`` not dividing ``alpha``; returns ``(alpha, n)``."""
    n = nu_p(i, p)
    return i // p ** n, n


def tower_exponent(p: int, top: int, bottom: int = 1) -> int:
    """``p^top + p^(top-1) + ... + p^bottom`` (zero when top < bottom)."""
    return sum(p ** j for j in range(bottom, top + 1))


def _twist_beta(alpha: int, p: int) -> int:
    """``beta >= 1`` with ``alpha = beta*p + p - 1``, or 0 if there is none."""
    if alpha % p == p - 1 and alpha >= 2 * p - 1:
        return (alpha - (p - 1)) // p
    return 0


def _alphas(p: int, limit_deg, D: int) -> Iterator[int]:
    alpha = 1
    while limit_deg(alpha) <= D:
        if alpha % p:
            yield alpha
        alpha += 1


# -- THH(ell) --------------------------------------------------------------


def _torsion_family(p: int, name: str, deg, first_n: int, dead_h, tower_bottom: int):
    """Generators and relations shared by the b- and c-families.

    ``dead_h(n)`` is the first v0-power that vanishes; the tower relation
    for ``v0^h x_{alpha p^n}`` has exponent p^{n-h+1} + ... + p^tower_bottom.
    """

    def g(alpha, n, h):
        return Gen(name, (alpha, n, h), deg(alpha, n))

    def gens(D):
        out = []
        n = first_n
        while deg(1, n) <= D:
            for alpha in _alphas(p, lambda a: deg(a, n), D):
                out += [g(alpha, n, h) for h in range(dead_h(n) + 1)]
            n += 1
        return out

    def rels(D):
        out = []
        n = first_n
        while deg(1, n) <= D:
            for alpha in _alphas(p, lambda a: deg(a, n), D):
                top = dead_h(n)
                out.append(Relation([(1, Monomial(g(alpha, n, top)))], p, "zero"))
                for h in range(top):
                    e = tower_exponent(p, n - h + 1, tower_bottom)
                    out.append(Relation([(1, Monomial(g(alpha, n, h), e))], p, "tower"))
                beta = _twist_beta(alpha, p)
                for h in range(top):
                    if h == 0 and beta:
                        a2, n2 = split_index(beta * p ** (n + 1), p)
                        out.append(Relation(
                            [(p, Monomial(g(alpha, n, 0))), (-1, Monomial(g(alpha, n, 1))),
                             (-1, Monomial(g(a2, n2, nu_p(beta, p)), p ** (n + 2)))],
                            p, "twist"))
                    else:
                        out.append(Relation([(p, Monomial(g(alpha, n, h))), (-1, Monomial(g(alpha, n, h + 1)))], p, "pmul"))
            n += 1
        return out

    return g, gens, rels


def _f_family(p: int, with_lambda: bool):
    T = DegreeTable(p)
    lam1 = Gen("lambda1", (), T.lam(1))

    def a(n):
        return Gen("a", (n,), T.a_pn(n))

    def gens(D):
        out = [lam1] if with_lambda else []
        n = 0
        while T.a_pn(n) <= D:
            out.append(a(n))
            n += 1
        return out

    def rels(D):
        out = []
        if with_lambda and T.a_pn(0) <= D:
            out.append(Relation([(p, Monomial(a(0))), (-1, Monomial(lam1, p))], p, "F"))
        n = 1
        while T.a_pn(n) <= D:
            out.append(Relation([(p, Monomial(a(n))), (-1, Monomial(a(n - 1), p ** (n + 1)))], p, "F"))
            n += 1
        return out

    return a, gens, rels


def b_gen(p: int, i: int, h: int = 0) -> Gen:
    """``v0^h b_i`` in :func:`thh_ell`."""
    alpha, n = split_index(i, p)
    return Gen("b", (alpha, n, h), DegreeTable(p).b(i))


def a_gen(p: int, n: int) -> Gen:
    """``v0^n a_{p^n}`` in :func:`thh_ell`."""
    return Gen("a", (n,), DegreeTable(p).a_pn(n))


def thh_ell(p: int) -> Presentation:
    """THH_*(ell) as a quotient of a free Z_(p)[v1]-module.

    Generators 1, lambda1, v0^n a_{p^n} and v0^h b_{alpha p^n}; the v0-powers
    are cut at h = n+1, which is already zero.
    """
    p = as_prime(p)
    T = DegreeTable(p)
    one = Gen("1", (), 0)
    _, f_gens, f_rels = _f_family(p, with_lambda=True)
    _, b_gens, b_rels = _torsion_family(p, "b", T.b_alpha, 0, lambda n: n + 1, 1)
    return Presentation(
        p,
        lambda D: [one] + f_gens(D) + b_gens(D),
        lambda D: f_rels(D) + b_rels(D),
        name="THH(ell)",
    )


def thh_ell_zp(p: int) -> Presentation:
    """THH_*(ell; Z_(p)): Z_(p){1, lambda1} plus cyclic a_i, b_i of order p^(nu(i)+1)."""
    p = as_prime(p)
    T = DegreeTable(p)
    fixed = [Gen("1", (), 0), Gen("lambda1", (), T.lam(1))]

    def idx(D):
        i = 1
        while T.a(i) <= D:
            yield i
            i += 1

    def gens(D):
        out = list(fixed)
        for i in idx(D):
            out.append(Gen("a", (i,), T.a(i)))
            if T.b(i) <= D:
                out.append(Gen("b", (i,), T.b(i)))
        return out

    def rels(D):
        out = []
        for i in idx(D):
            e = p ** (nu_p(i, p) + 1)
            out.append(Relation([(e, Monomial(Gen("a", (i,), T.a(i))))], p, "order"))
            if T.b(i) <= D:
                out.append(Relation([(e, Monomial(Gen("b", (i,), T.b(i))))], p, "order"))
        return out

    return Presentation(p, gens, rels, v1_trivial=True, name="THH(ell;Z_p)")


# -- THH(Z_(p)) and THH(F_p) -----------------------------------------------


def thh_z_p(d: int, p: int) -> AbelianGroup:
    """THH_d(Z_(p)): Z_(p) at 0, Z/p^(nu(k)+1) at d = 2pk - 1, else 0."""
    p = as_prime(p)
    if d == 0:
        return AbelianGroup(1)
    k, r = divmod(d + 1, 2 * p)
    if d > 0 and r == 0:
        return AbelianGroup(0, (nu_p(k, p) + 1,))
    return AbelianGroup()


def thh_z_p_module(p: int) -> Presentation:
    """THH_*(Z_(p)) with generators 1 and ``lm(j) = lambda1 mu^j`` (degree 2p(j+1)-1)."""
    p = as_prime(p)

    def lm(j):
        return Gen("lm", (j,), 2 * p * (j + 1) - 1)

    def gens(D):
        out, j = [Gen("1", (), 0)], 0
        while lm(j).degree <= D:
            out.append(lm(j))
            j += 1
        return out

    def rels(D):
        return [Relation([(p ** (nu_p(j + 1, p) + 1), Monomial(lm(j)))], p, "order")
                for j in range(D) if lm(j).degree <= D]

    return Presentation(p, gens, rels, v1_trivial=True, name="THH(Z_p)")


def thh_fp_module(p: int) -> Presentation:
    """THH_*(F_p) = F_p[mu], |mu| = 2."""
    p = as_prime(p)

    def mu(k):
        return Gen("mu", (k,), 2 * k)

    return Presentation(
        p,
        lambda D: [mu(k) for k in range(D // 2 + 1)],
        lambda D: [Relation([(p, Monomial(mu(k)))], p, "order") for k in range(D // 2 + 1)],
        v1_trivial=True,
        name="THH(F_p)",
    )


@dataclass(frozen=True)
class IntegralGroup:
    """Z^free_rank plus cyclic groups of the listed orders (orders > 1)."""

    free_rank: int = 0
    orders: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(sorted(o for o in self.orders if o != 1)))
        if any(o <= 0 for o in self.orders):
            raise ValueError("cyclic orders must be positive")

    def localize(self, p: int) -> AbelianGroup:
        return AbelianGroup(self.free_rank, tuple(nu_p(o, p) for o in self.orders if o % p == 0))


def thh_z_integral(d: int, reading: str = "k") -> IntegralGroup:
    """THH_d(Z) from the integral table.

    The table's odd-degree entry can be read as cyclic of order ``k`` or of
    order ``k - 1`` in degree 2k-1.  ``reading="k"`` is the one compatible
    with the p-local formula; ``reading="k-1"`` reproduces the printed table.
    """
    if reading not in ("k", "k-1"):
        raise ValueError("reading must be 'k' or 'k-1'")
    if d == 0:
        return IntegralGroup(1)
    if d > 0 and d % 2 == 1:
        k = (d + 1) // 2
        order = k if reading == "k" else k - 1
        return IntegralGroup(0, (order,)) if order > 1 else IntegralGroup()
    return IntegralGroup()


def thh_z_table_consistency(primes: Sequence[int] = (2, 3, 5, 7, 11, 13), k_max: int = 50) -> dict:
    """Which reading of the integral table p-localizes to :func:`thh_z_p`."""
    out = {}
    for reading in ("k", "k-1"):
        bad = []
        for p in primes:
            for k in range(1, k_max + 1):
                d = 2 * k - 1
                if thh_z_integral(d, reading).localize(p) != thh_z_p(d, p):
                    bad.append((p, d))
        out[reading] = bad
    return out


def thc_z(d: int, reading: str = "k") -> IntegralGroup:
    """THC^d(Z) from the universal coefficient sequence.

    THC^d = Hom(THH_d, Z) + Ext(THH_{d-1}, Z); Hom kills the finite groups and
    Ext(Z/k, Z) = Z/k.
    """
    if d < 0:
        return IntegralGroup()
    hom = thh_z_integral(d, reading).free_rank
    ext = thh_z_integral(d - 1, reading).orders if d >= 1 else ()
    return IntegralGroup(hom, ext)


# -- THH(BP<2>; Z_(p)) -----------------------------------------------------


def thh_bp2_zp(p: int) -> Presentation:
    """F_p<lambda1, lambda2> tensor (Z_(p) + T_0^2), read with free lambda-classes
    on the Z_(p) summand and p^s-torsion on the T_0^2 families."""
    p = as_prime(p)
    T = DegreeTable(p)
    ext = [(e1, e2) for e1 in (0, 1) for e2 in (0, 1)]

    def ext_deg(e1, e2):
        return e1 * T.lam(1) + e2 * T.lam(2)

    def tgen(s, j, m, e1, e2):
        deg = T.lam(s + 2) + j * p ** (s - 1) * T.mu(2) + m * p ** s * T.mu(2) + ext_deg(e1, e2)
        return Gen("t", (s, j, m, e1, e2), deg)

    def tors(D):
        s = 1
        while T.lam(s + 2) <= D:
            for j in range(p - 1):
                m = 0
                while tgen(s, j, m, 0, 0).degree <= D:
                    for e1, e2 in ext:
                        g = tgen(s, j, m, e1, e2)
                        if g.degree <= D:
                            yield s, g
                    m += 1
            s += 1

    def gens(D):
        free = [Gen("ext", (e1, e2), ext_deg(e1, e2)) for e1, e2 in ext]
        return [g for g in free if g.degree <= D] + [g for _, g in tors(D)]

    def rels(D):
        return [Relation([(p ** s, Monomial(g))], p, "order") for s, g in tors(D)]

    return Presentation(p, gens, rels, v1_trivial=True, name="THH(BP<2>;Z_p)")


# -- THH(BP<2>; BP<1>) closed form -----------------------------------------


def f_module(p: int, drop_lambda: bool = False) -> Presentation:
    """Torsion-free part of THH(ell) away from the unit tower (or its part
    in degrees >= 2p^2 - 1 when ``drop_lambda``)."""
    p = as_prime(p)
    _, gens, rels = _f_family(p, with_lambda=not drop_lambda)
    return Presentation(p, gens, rels, name="F>=" if drop_lambda else "F")


def t_module(p: int) -> Presentation:
    """Torsion of THH(ell) in the image of v1^p, on the lifts c_i of v1^p b_i."""
    p = as_prime(p)
    T = DegreeTable(p)
    deg = lambda alpha, n: T.c(alpha * p ** n)  # noqa: E731
    _, gens, rels = _torsion_family(p, "c", deg, 1, lambda n: n, 2)
    return Presentation(p, gens, rels, name="T")


def thh_bp2_bp1_closed(p: int) -> Presentation:
    p = as_prime(p)
    T = DegreeTable(p)
    unit = free_module(p, [Gen("1", (), 0), Gen("sigma_v2", (), T.sigma_v(2))], "Z[v1]<sv2>")
    s = 2 * p - 1
    return direct_sum(
        [unit, f_module(p), shift(f_module(p, drop_lambda=True), s), t_module(p), shift(t_module(p), s)],
        name="THH(BP<2>;BP<1>) closed form",
    )


# -- dimension series ------------------------------------------------------


@dataclass(frozen=True)
class DimensionSeries:
    """Graded dimension of a tensor product of polynomial, exterior and
    divided-power algebras on generators of the given degrees."""

    factors: Tuple[Tuple[str, int], ...]
    ring: str = "Fp"
    p: int = 0

    def __post_init__(self):
        for kind, deg in self.factors:
            if kind not in ("poly", "ext", "divided"):
                raise ValueError(f"unknown factor kind {kind!r}")
            if deg <= 0:
                raise ValueError("generator degrees must be positive")

    def coefficients(self, D: int) -> List[int]:
        coeffs = [1] + [0] * D
        for kind, deg in self.factors:
            if kind == "ext":
                for d in range(D, deg - 1, -1):
                    coeffs[d] += coeffs[d - deg]
            else:
                for d in range(deg, D + 1):
                    coeffs[d] += coeffs[d - deg]
        return coeffs

    def __call__(self, d: int) -> int:
        if d < 0:
            return 0
        return self.coefficients(d)[d]

    def __mul__(self, other: "DimensionSeries") -> "DimensionSeries":
        return DimensionSeries(self.factors + other.factors, self.ring, self.p or other.p)


def thh_bpn_fp(n: int, p: int) -> DimensionSeries:
    """F_p[mu^{p^{n+1}}]<lambda_1..lambda_{n+1}>."""
    if n < -1:
        raise ValueError("n >= -1 required")
    T = DegreeTable(p)
    return DimensionSeries(tuple(("ext", T.lam(i)) for i in range(1, n + 2)) + (("poly", T.mu(n)),), "Fp", p)


def thc_bpn_fp(n: int, p: int) -> DimensionSeries:
    if n < 0:
        raise ValueError("n >= 0 required")
    T = DegreeTable(p)
    return DimensionSeries(tuple(("ext", T.lam(i)) for i in range(1, n + 2)) + (("divided", T.mu(n)),), "Fp", p)


def rational_thh(n: int, m: int, p: int = 2) -> DimensionSeries:
    """Q[v_1..v_m]<sigma v_1 .. sigma v_n>."""
    if not 0 <= m <= n:
        raise ValueError("0 <= m <= n required")
    T = DegreeTable(p)
    poly = tuple(("poly", 2 * p ** i - 2) for i in range(1, m + 1))
    ext = tuple(("ext", T.sigma_v(i)) for i in range(1, n + 1))
    return DimensionSeries(poly + ext, "Q", p)


def cooperations(n: int, m: int, p: int) -> DimensionSeries:
    """Ranks of pi_* BP<m> tensor_{BP<n>} BP<m>."""
    if not -1 <= m <= n:
        raise ValueError("-1 <= m <= n required")
    T = DegreeTable(p)
    poly = tuple(("poly", 2 * p ** i - 2) for i in range(1, m + 1))
    ext = tuple(("ext", T.sigma_v(i)) for i in range(m + 1, n + 1))
    return DimensionSeries(poly + ext, "Fp" if m == -1 else "Zp", p)


def series_as_groups(series: DimensionSeries, d: int) -> AbelianGroup:
    """F_p-dimension ``k`` as (Z/p)^k; Z_(p)/Q rank ``k`` as a free group."""
    k = series(d)
    if series.ring == "Fp":
        return AbelianGroup(0, (1,) * k)
    return AbelianGroup(k)


MODELS = {
    "thh-ell": thh_ell,
    "thh-ell-z": thh_ell_zp,
    "thh-z": thh_z_p_module,
    "thh-fp": thh_fp_module,
    "thh-bp2-z": thh_bp2_zp,
    "thh-bp2-bp1": thh_bp2_bp1_closed,
}

