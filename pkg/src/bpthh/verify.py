"""Verification harness: oracle comparisons, rank checks and lemma scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .arith import ZERO, AbelianGroup, as_prime, nu_p
from .brun import (
    BrunRun,
    ExtensionRecord,
    d1_commutes_with_v1,
    d1_preserves_torsion,
    d1_squares_to_zero,
    length_consistent,
    run_brun,
)
from .catalog import (
    DegreeTable,
    DimensionSeries,
    b_gen,
    f_module,
    rational_thh,
    shift,
    t_module,
    thh_bp2_bp1_closed,
    thh_bp2_zp,
    thh_ell,
    thh_ell_zp,
    thh_z_table_consistency,
)
from .graded import (
    Gen,
    GradedModule,
    Monomial,
    Presentation,
    Relation,
    direct_sum,
    free_module,
    v1_multiplication,
)

PASS, FAIL, FLAGGED = "pass", "fail", "flagged"


@dataclass
class Report:
    name: str
    degrees: Tuple[int, int]
    status: str = PASS
    diffs: List[dict] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def fail(self, degree: Optional[int], expected, computed, what: str = "") -> None:
        self.status = FAIL
        self.diffs.append({"degree": degree, "expected": str(expected), "computed": str(computed), "what": what})

    def finish(self) -> "Report":
        # minimal counterexample first
        self.diffs.sort(key=lambda r: (r["degree"] is None, r["degree"] or 0))
        if self.status == PASS and self.flags:
            self.status = FLAGGED
        return self

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "degrees": list(self.degrees),
            "status": self.status,
            "diffs": self.diffs,
            "notes": self.notes,
            "flags": self.flags,
        }

    def summary(self) -> str:
        line = f"{self.status.upper():7} {self.name} [{self.degrees[0]}..{self.degrees[1]}]"
        if self.diffs:
            d = self.diffs[0]
            line += f" first diff at {d['degree']}: expected {d['expected']}, got {d['computed']}"
        return line


# -- comparisons -------------------------------------------------------------


def compare_degreewise(A: GradedModule, B: GradedModule, D: int, name: str = "") -> Report:
    if A.p != B.p:
        raise ValueError("modules over different primes")
    rep = Report(name or f"{A.name} vs {B.name}", (0, D))
    for d in range(D + 1):
        a, b = A.realize_degree(d), B.realize_degree(d)
        if a != b:
            rep.fail(d, b, a)
    return rep.finish()


def check_rational_ranks(P: GradedModule, series: DimensionSeries, D: int, name: str = "") -> Report:
    rep = Report(name or f"rank {P.name}", (0, D))
    coeffs = series.coefficients(D)
    for d in range(D + 1):
        r = P.realize_degree(d).free_rank
        if r != coeffs[d]:
            rep.fail(d, coeffs[d], r, "free rank")
    return rep.finish()


def thh_z_table_report(primes: Sequence[int] = (2, 3, 5, 7, 11, 13), k_max: int = 50) -> Report:
    rep = Report("THH_*(Z) integral table vs p-local formula", (1, 2 * k_max - 1))
    res = thh_z_table_consistency(primes, k_max)
    if res["k"]:
        p, d = res["k"][0]
        rep.fail(d, f"Z/{(d + 1) // 2} localized at {p}", "mismatch")
    rep.notes.append(f"reading Z/(k-1) disagrees with the p-local formula in {len(res['k-1'])} (p, degree) pairs")
    rep.flags.append(
        "THH_{2k-1}(Z) table reading: the printed Z/(k-1) contradicts the p-local orders p^(nu_p(k)+1); Z/k is used"
    )
    return rep.finish()


# -- lemma scans -------------------------------------------------------------


def _tower(p: int, j: int, h: int) -> int:
    return sum(p ** e for e in range(1, nu_p(j, p) - h + 2))


def lemma_tower_degrees(p: int, i_max: int) -> Report:
    """Degree inequality between v1-towers on v0^h b_j and b_i."""
    p = as_prime(p)
    T = DegreeTable(p)
    v = T.v1
    rep = Report(f"b-tower degree inequality p={p}", (1, i_max))
    strict_ok = True
    for i in range(1, i_max + 1):
        top_i = T.b(i) + v * _tower(p, i, 0)
        for j in range(1, i + 1):
            for h in range(nu_p(j, p) + 1):
                top_j = T.b(j) + v * _tower(p, j, h)
                if T.b(j) <= T.b(i) < top_j and not top_i <= top_j:
                    rep.fail(T.b(i), f"<= {top_j}", top_i, f"i={i} j={j} h={h}")
                    if j < i:
                        strict_ok = False
    if rep.diffs:
        rep.notes.append(
            "every counterexample has j = i and h >= 1"
            if strict_ok
            else "some counterexamples have j < i"
        )
    return rep.finish()


def lemma_v1_torsion(p: int, i_max: int, E: Optional[Presentation] = None) -> Report:
    """In degree |b_i|: v1^(p-1) is injective, and ker v1^(p+1) = ker v1^p."""
    p = as_prime(p)
    E = E or thh_ell(p)
    T = DegreeTable(p)
    rep = Report(f"v1-torsion in degrees |b_i| p={p}", (1, i_max))
    m_low, m_p, m_high = (v1_multiplication(E, k) for k in (p - 1, p, p + 1))
    for i in range(1, i_max + 1):
        d = T.b(i)
        k = m_low.kernel(d)
        if not k.is_zero:
            rep.fail(d, ZERO, k, f"ker v1^{p - 1} at b_{i}")
        a, b = m_p.kernel(d), m_high.kernel(d)
        if a.length != b.length or a.free_rank or b.free_rank:
            rep.fail(d, a, b, f"ker v1^{p + 1} vs ker v1^{p} at b_{i}")
    return rep.finish()


def lemma_b_orders(p: int, i_max: int, E: Optional[Presentation] = None) -> Report:
    """Additive orders of b_i against v0^nu(i-1) b_{i-1}."""
    p = as_prime(p)
    E = E or thh_ell(p)
    rep = Report(f"orders of b_i vs v0^nu(i-1) b_(i-1) p={p}", (2, i_max))

    def order(i, h):
        g = b_gen(p, i, h)
        return E.element_order([(1, Monomial(g))], g.degree)

    for i in range(2, i_max + 1):
        n = nu_p(i, p)
        power = i == p ** n
        here, there = order(i, 0), order(i - 1, nu_p(i - 1, p))
        want = there + 1 if power else there
        if here != want:
            rep.fail(DegreeTable(p).b(i), f"order p^{want}", f"order p^{here}", f"i={i}")
    if rep.diffs:
        bad = [int(x["what"][2:]) for x in rep.diffs]
        kind = "only" if all(twisted_index(p, i) for i in bad) else "not only"
        rep.notes.append(
            f"failing indices are {kind} i = (beta*p + p - 1)*p^n, where p*b_i = v1^(p^(n+2)) v0^nu(beta) b_(beta*p^(n+1)) is nonzero"
        )
    return rep.finish()


def twisted_index(p: int, i: int) -> bool:
    """True when i = (beta*p + p - 1)*p^n with beta >= 1."""
    a = i // p ** nu_p(i, p)
    return a % p == p - 1 and a >= 2 * p - 1


def lemma_suite(p: int, i_max: int) -> List[Report]:
    if i_max < 2:
        raise ValueError("i_max >= 2 required")
    E = thh_ell(p)
    return [lemma_v1_torsion(p, i_max, E), lemma_tower_degrees(p, i_max), lemma_b_orders(p, i_max, E)]


# -- Brun runs ---------------------------------------------------------------


def length_consistency(run: BrunRun, log: Optional[Iterable[ExtensionRecord]] = None) -> Report:
    records = list(run.extension_log if log is None else log)
    by_degree: Dict[int, List[ExtensionRecord]] = {}
    for r in records:
        by_degree.setdefault(r.degree, []).append(r)
    rep = Report(f"length bookkeeping n={run.n} {run.case} p={run.p}", (0, run.D))
    for d in range(run.D + 1):
        res = run.degree(d)
        if not length_consistent(res, by_degree.get(d, [])):
            rep.fail(d, f"{res.kernel} (ker) + {res.cokernel} (coker)", res.abutment, "length/rank bookkeeping")
    return rep.finish()


def structural_checks(run: BrunRun) -> Report:
    rep = Report(f"d1 structure n={run.n} {run.case} p={run.p}", (0, run.D))
    for d in range(run.D + 1):
        if not d1_squares_to_zero(run, d):
            rep.fail(d, "0", "nonzero", "d1 o d1")
        if not run.d1.is_well_defined(d):
            rep.fail(d, "relations to relations", "violated", "well-defined")
        if not d1_preserves_torsion(run, d):
            rep.fail(d, "torsion to torsion", "violated", "torsion")
        if run.case == "n2_ell" and not d1_commutes_with_v1(run, d):
            rep.fail(d, "d1 v1 = v1 d1", "violated", "v1-linearity")
    if run.n == 2:
        rep.flags.append("d1 on a_1, b_1 (and v0^h b_1) is 0: the formula stated for all i >= 1 has no index-0 target at i = 1")
    return rep.finish()


def _m_subgroup(run: BrunRun, d: int, k_min: int) -> List[list]:
    p, v = run.p, 2 * run.p - 2
    out, k = [], k_min
    while b_gen(p, p ** k).degree <= d:
        g = b_gen(p, p ** k, k)
        q, r = divmod(d - g.degree, v)
        if r == 0 and q < p:
            out.append([(1, Monomial(g, q))])
        k += 1
    return out


def torsion_kernel_cokernel_report(run: BrunRun) -> Report:
    """coker d1 = coim(v1^p) and ker d1 = im(v1^p) + M on torsion."""
    if run.case != "n2_ell":
        raise ValueError("only for the THH(ell) sequence")
    p = run.p
    vp = p * (2 * p - 2)
    up_sigma = v1_multiplication(run.sigma, p)
    up_model = v1_multiplication(run.model, p)
    rep = Report(f"torsion of ker/coker d1 p={p}", (0, run.D))
    strict_misses = []
    for d in range(run.D + 1):
        K, C = run.kernel_cokernel(d)
        coim = up_sigma.image(d).torsion_part
        if C.torsion_part != coim:
            rep.fail(d, coim, C.torsion_part, "coker d1 vs coim v1^p")
        im = up_model.image(d - vp).torsion_part if d >= vp else ZERO
        M = run.model.subgroup(_m_subgroup(run, d, 0), d) if _m_subgroup(run, d, 0) else ZERO
        if K.torsion_part != im + M.torsion_part:
            rep.fail(d, im + M, K.torsion_part, "ker d1 vs im v1^p + M")
        gens1 = _m_subgroup(run, d, 1)
        M1 = run.model.subgroup(gens1, d) if gens1 else ZERO
        if K.torsion_part != im + M1.torsion_part:
            strict_misses.append(d)
    if strict_misses:
        rep.notes.append(f"with M generated by v0^k b_(p^k), k >= 1 only, the kernel check fails in degrees {strict_misses[:6]}")
    rep.flags.append("M must contain v0^k b_(p^k) for k >= 0 (b_1 included); it is stated for k >= 1")
    return rep.finish()


# -- low degrees -------------------------------------------------------------


def reduced_closed_form(p: int = 2) -> GradedModule:
    """The closed form without the unit v1-tower."""
    p = as_prime(p)
    T = DegreeTable(p)
    s = 2 * p - 1
    sigma = free_module(p, [Gen("sigma_v2", (), T.sigma_v(2))], "Z[v1]sv2")
    return direct_sum(
        [sigma, f_module(p), shift(f_module(p, drop_lambda=True), s), t_module(p), shift(t_module(p), s)], name="reduced"
    )


def low_degree_ku_check(D: int = 8) -> Report:
    """Degrees <= D: generated by lambda1, a1, sigma v2 (3, 7, 7) with 2 a1 = v1^2 lambda1."""
    p = 2
    lam, a1, sv2 = Gen("lambda1", (), 3), Gen("a1", (), 7), Gen("sigma_v2", (), 7)
    ku = Presentation(p, lambda _: [lam, a1, sv2], lambda _: [Relation([(2, Monomial(a1)), (-1, Monomial(lam, 2))], p)], name="ku-module")
    reduced = reduced_closed_form(p)
    rep = Report("low-degree ku-module generators", (1, D))
    for d in range(1, D + 1):
        want, got = ku.realize_degree(d), reduced.realize_degree(d)
        if want != got:
            rep.fail(d, want, got)
    if reduced.realize_degree(7) != AbelianGroup(2):
        rep.fail(7, AbelianGroup(2), reduced.realize_degree(7))
    closed = thh_bp2_bp1_closed(p)
    a, l = Gen("a", (0,), 7, "1"), Gen("lambda1", (), 3, "1")
    if not closed.is_zero([(2, Monomial(a)), (-1, Monomial(l, 2))], 7):
        rep.fail(7, "2 a1 = v1^2 lambda1", "relation fails")
    return rep.finish()


# -- suites ------------------------------------------------------------------

DEFAULT_D = {"main": 400, "rational": 400, "lemmas": 200, "ku": 8}


def main_suite(p: int = 2, D: int = 400) -> List[Report]:
    p = as_prime(p)
    run = run_brun(2, p, D)
    cmp = compare_degreewise(run.abutment, thh_bp2_bp1_closed(p), D, f"Brun n=2 abutment vs closed form p={p}")
    reports = [cmp, length_consistency(run), structural_checks(run), torsion_kernel_cokernel_report(run)]
    D0 = min(D, 100)
    run0 = run_brun(0, p, D0)
    ref0 = Presentation(
        p,
        lambda X: [Gen("mu", (k,), 2 * p * k) for k in range(X // (2 * p) + 1)]
        + [Gen("smu", (k,), 2 * p * k + 2 * p - 1) for k in range(X // (2 * p) + 1)],
        lambda X: [Relation([(p, Monomial(Gen(n, (k,), 2 * p * k + off)))], p) for k in range(X // (2 * p) + 1) for n, off in (("mu", 0), ("smu", 2 * p - 1))],
        v1_trivial=True,
        name="F_p[mu^p]<sigma v0 mu^(p-1)>",
    )
    reports += [compare_degreewise(run0.abutment, ref0, D0, f"Brun n=0 abutment p={p}"), length_consistency(run0), structural_checks(run0)]
    D1 = min(D, 200)
    run1 = run_brun(1, p, D1)
    reports += [compare_degreewise(run1.abutment, thh_ell_zp(p), D1, f"Brun n=1 abutment p={p}"), length_consistency(run1), structural_checks(run1)]
    return reports


def rational_suite(p: int = 2, D: int = 400) -> List[Report]:
    return [
        check_rational_ranks(thh_ell(p), rational_thh(1, 1, p), D, "rank THH(ell)"),
        check_rational_ranks(thh_bp2_zp(p), rational_thh(2, 0, p), D, "rank THH(BP<2>;Z_p)"),
        check_rational_ranks(thh_bp2_bp1_closed(p), rational_thh(2, 1, p), D, "rank THH(BP<2>;BP<1>)"),
        thh_z_table_report(),
    ]


def run_suite(name: str, p: int = 2, D: Optional[int] = None) -> List[Report]:
    if name == "all":
        # the degree bound applies to the degree-indexed suites only
        return [r for s in ("main", "rational", "lemmas", "ku") for r in run_suite(s, p, D if s in ("main", "rational") else None)]
    if name not in DEFAULT_D:
        raise ValueError(f"unknown suite {name!r}")
    D = DEFAULT_D[name] if D is None else D
    if name == "main":
        return main_suite(p, D)
    if name == "rational":
        return rational_suite(p, D)
    if name == "lemmas":
        return lemma_suite(p, D)
    return [low_degree_ku_check(D)]


def all_flags(reports: Iterable[Report]) -> List[str]:
    return [f for r in reports for f in r.flags]
