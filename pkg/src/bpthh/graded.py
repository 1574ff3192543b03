"""Graded modules over Z_(p)[v1] and their degreewise realization.

A :class:`Presentation` is given by lazily enumerated generator and
relation families.  Each family has a monotone degree formula, so every
degree only sees finitely many generators and relations, and
:meth:`Presentation.realize_degree` reduces to the cokernel of an integer
matrix.  ``v0`` is the scalar ``p``; it never appears as a variable.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from ._lattice import LatticeBasis, Vec, kernel_basis, smith_summands
from .arith import ZERO, AbelianGroup, Prime, as_prime, merge


@dataclass(frozen=True, order=True)
class Gen:
    """A named module generator.

    ``copy`` tags generators that live in a shifted copy (for instance the
    sigma-v_n copy of an E1 page, or a summand index in a direct sum).
    """

    name: str
    params: Tuple[int, ...] = ()
    degree: int = 0
    copy: str = ""

    def __str__(self) -> str:
        base = self.name + (f"({','.join(map(str, self.params))})" if self.params else "")
        return f"{self.copy}*{base}" if self.copy else base

    def shifted(self, t: int, copy: Optional[str] = None) -> "Gen":
        return Gen(self.name, self.params, self.degree + t, self.copy if copy is None else copy)


@dataclass(frozen=True, order=True)
class Monomial:
    """``p**p_exp * v1**v1 * gen``."""

    gen: Gen
    v1: int = 0
    p_exp: int = 0

    def degree(self, p: int) -> int:
        return self.v1 * (2 * p - 2) + self.gen.degree

    def times_v1(self, k: int) -> "Monomial":
        return Monomial(self.gen, self.v1 + k, self.p_exp)

    def basis_key(self) -> "Monomial":
        return Monomial(self.gen, self.v1, 0) if self.p_exp else self

    def __str__(self) -> str:
        out = str(self.gen)
        if self.v1:
            out = f"v1^{self.v1}*{out}" if self.v1 > 1 else f"v1*{out}"
        if self.p_exp:
            out = f"p^{self.p_exp}*{out}"
        return out


Term = Tuple[int, Monomial]


class Relation:
    """A homogeneous relator ``sum(coeff * monomial) = 0``."""

    __slots__ = ("terms", "degree", "tag")

    def __init__(self, terms: Iterable[Term], p: int, tag: str = ""):
        terms = tuple((int(c), m) for c, m in terms if c)
        if not terms:
            raise ValueError("empty relation")
        degs = {m.degree(p) for _, m in terms}
        if len(degs) != 1:
            raise ValueError(f"inhomogeneous relation: {[str(m) for _, m in terms]} has degrees {sorted(degs)}")
        self.terms = terms
        self.degree = degs.pop()
        self.tag = tag

    def __repr__(self) -> str:
        return " + ".join(f"{c}*{m}" for c, m in self.terms) + " = 0"


def gen(name: str, *params: int, degree: int) -> Gen:
    return Gen(name, tuple(params), degree)


def mono(g: Gen, v1: int = 0, p_exp: int = 0) -> Monomial:
    return Monomial(g, v1, p_exp)


def workers_from_env() -> int:
    val = os.environ.get("THH_THREADS")
    if val:
        return max(1, int(val))
    return os.cpu_count() or 1


class GradedModule:
    """Anything that can be realized as a p-local group in each degree."""

    p: Prime
    name: str = ""

    def realize_degree(self, d: int) -> AbelianGroup:
        raise NotImplementedError

    def realize_range(self, D: int, workers: Optional[int] = None) -> List[AbelianGroup]:
        """Groups in degrees ``0..D``; degrees are independent jobs."""
        workers = workers or workers_from_env()
        if workers == 1 or D < 8:
            return [self.realize_degree(d) for d in range(D + 1)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(self.realize_degree, range(D + 1)))

    def table(self, D: int) -> List[dict]:
        return [g.to_record(d) for d, g in enumerate(self.realize_range(D))]


@dataclass
class DegreeData:
    basis: List[Monomial]
    index: Dict[Monomial, int]
    relations: List[Vec]
    tags: List[str] = field(default_factory=list)
    sources: List[Tuple[Relation, int]] = field(default_factory=list)


class Presentation(GradedModule):
    """Finitely presented (degreewise) graded Z_(p)[v1]-module.

    ``generators(D)`` and ``relations(D)`` must yield every generator /
    relation of degree at most ``D`` and terminate.  With ``v1_trivial``
    the module is a plain Z_(p)-module: only ``v1**0`` monomials exist.
    """

    def __init__(
        self,
        p: int,
        generators: Callable[[int], Iterable[Gen]],
        relations: Callable[[int], Iterable[Relation]],
        v1_trivial: bool = False,
        name: str = "",
    ):
        self.p = as_prime(p)
        self._gen_source = generators
        self._rel_source = relations
        self.v1_trivial = v1_trivial
        self.name = name
        self._bound = -1
        self._gens: List[Gen] = []
        self._rels: List[Relation] = []
        self._lock = threading.RLock()
        self._data: Dict[int, DegreeData] = {}
        self._groups: Dict[int, AbelianGroup] = {}
        self._spans: Dict[int, LatticeBasis] = {}

    @property
    def v1_degree(self) -> int:
        return 2 * self.p - 2

    def _ensure(self, D: int) -> None:
        with self._lock:
            if D <= self._bound:
                return
            D = max(D, 2 * self._bound, 16)
            gens = sorted(set(g for g in self._gen_source(D) if g.degree <= D))
            rels = [r for r in self._rel_source(D) if r.degree <= D]
            known = set(gens)
            for r in rels:
                for _, m in r.terms:
                    if m.gen not in known:
                        raise ValueError(f"relation {r!r} uses unknown generator {m.gen}")
            self._gens, self._rels, self._bound = gens, rels, D

    def generators(self, D: int) -> List[Gen]:
        self._ensure(D)
        return [g for g in self._gens if g.degree <= D]

    def relations(self, D: int) -> List[Relation]:
        self._ensure(D)
        return [r for r in self._rels if r.degree <= D]

    def _offset(self, d: int, deg: int) -> Optional[int]:
        if deg > d:
            return None
        if self.v1_trivial:
            return 0 if deg == d else None
        q, r = divmod(d - deg, self.v1_degree)
        return q if r == 0 else None

    def degree_data(self, d: int) -> DegreeData:
        if d in self._data:
            return self._data[d]
        self._ensure(d)
        basis = []
        for g in self._gens:
            k = self._offset(d, g.degree)
            if k is not None:
                basis.append(Monomial(g, k))
        basis.sort()
        index = {m: i for i, m in enumerate(basis)}
        vecs, tags, sources = [], [], []
        for r in self._rels:
            k = self._offset(d, r.degree)
            if k is None:
                continue
            v = self.vector([(c, m.times_v1(k)) for c, m in r.terms], index)
            if v:
                vecs.append(v)
                tags.append(r.tag)
                sources.append((r, k))
        data = DegreeData(basis, index, vecs, tags, sources)
        with self._lock:
            self._data[d] = data
        return data

    def vector(self, terms: Iterable[Term], index: Dict[Monomial, int]) -> Vec:
        """Coordinates of a formal sum of monomials in one degree's basis.

        Monomials outside the basis are zero in the module (only possible
        when v1 acts trivially).
        """
        v: Vec = {}
        for c, m in terms:
            key = m.basis_key()
            i = index.get(key)
            if i is None:
                if self.v1_trivial and m.v1 > 0:
                    continue
                raise KeyError(f"{m} is not a basis monomial")
            x = v.get(i, 0) + c * self.p ** m.p_exp
            if x:
                v[i] = x
            else:
                v.pop(i, None)
        return v

    def realize_degree(self, d: int) -> AbelianGroup:
        if d < 0:
            return ZERO
        g = self._groups.get(d)
        if g is None:
            data = self.degree_data(d)
            free, tors = smith_summands(data.relations, len(data.basis), self.p)
            g = AbelianGroup(len(free), tuple(e for _, e in tors))
            self._groups[d] = g
        return g

    def summands(self, d: int) -> List[Tuple[Monomial, int]]:
        """Cyclic summands in degree ``d`` as ``(leading monomial, exponent)``.

        Exponent 0 marks a free summand.  Sorted by monomial label.
        """
        if d < 0:
            return []
        data = self.degree_data(d)
        free, tors = smith_summands(data.relations, len(data.basis), self.p)
        out = [(data.basis[k], 0) for k in free] + [(data.basis[k], e) for k, e in tors]
        return sorted(out, key=lambda t: (str(t[0]), t[1]))

    def span(self, d: int) -> LatticeBasis:
        """p-local span of the relation vectors in degree ``d``."""
        s = self._spans.get(d)
        if s is None:
            s = LatticeBasis(self.degree_data(d).relations, self.p)
            with self._lock:
                self._spans[d] = s
        return s

    def is_zero(self, terms: Iterable[Term], d: int) -> bool:
        data = self.degree_data(d)
        v = self.vector(terms, data.index)
        if not v:
            return True
        try:
            self.span(d).coordinates(v)
        except ValueError:
            return False
        return True

    def element_order(self, terms: Iterable[Term], d: int) -> float:
        """Additive order exponent of an element (``inf`` if non-torsion)."""
        data = self.degree_data(d)
        v = self.vector(terms, data.index)
        return _cyclic_order([v] + [{k: -x for k, x in r.items()} for r in data.relations], self.p)

    def subgroup(self, elements: Sequence[Sequence[Term]], d: int) -> AbelianGroup:
        """The subgroup of degree ``d`` generated by the given elements."""
        data = self.degree_data(d)
        vecs = [self.vector(e, data.index) for e in elements]
        return _image_group(vecs, data.relations, self.p)

    def __repr__(self) -> str:
        return f"Presentation({self.name or '?'}, p={self.p})"


def _cyclic_order(vectors: List[Vec], p: int) -> float:
    """Order of the element ``vectors[0]`` modulo the span of the rest."""
    ker = kernel_basis(vectors, p)
    vals = [abs(k[0]) for k in ker if k.get(0)]
    if not vals:
        return math.inf
    from .arith import nu_p

    return min(nu_p(x, p) for x in vals)


def _image_group(images: List[Vec], target_rels: List[Vec], p: int) -> AbelianGroup:
    """Subgroup generated by ``images`` in ``Z^n / span(target_rels)``."""
    m = len(images)
    if m == 0:
        return ZERO
    ker = kernel_basis(images + [{k: -x for k, x in r.items()} for r in target_rels], p)
    lat = [{i: x for i, x in k.items() if i < m} for k in ker]
    free, tors = smith_summands([v for v in lat if v], m, p)
    return AbelianGroup(len(free), tuple(e for _, e in tors))


# -- constructions ---------------------------------------------------------


def free_module(p: int, gens: Sequence[Gen], name: str = "", v1_trivial: bool = False) -> Presentation:
    gens = list(gens)
    return Presentation(p, lambda D: [g for g in gens if g.degree <= D], lambda D: [], v1_trivial, name)


def zero_module(p: int) -> Presentation:
    return free_module(p, [], "0")


class ShiftedModule(GradedModule):
    def __init__(self, inner: GradedModule, t: int):
        self.p, self.inner, self.t = inner.p, inner, t
        self.name = f"S^{t}({inner.name})"

    def realize_degree(self, d: int) -> AbelianGroup:
        return self.inner.realize_degree(d - self.t)


class DirectSumModule(GradedModule):
    def __init__(self, parts: Sequence[GradedModule]):
        self.p, self.parts = parts[0].p, list(parts)
        self.name = " + ".join(m.name for m in parts)

    def realize_degree(self, d: int) -> AbelianGroup:
        return merge(m.realize_degree(d) for m in self.parts)


def _map_relation(r: Relation, p: int, fg: Callable[[Gen], Gen]) -> Relation:
    return Relation([(c, Monomial(fg(m.gen), m.v1, m.p_exp)) for c, m in r.terms], p, r.tag)


def shift(pres: GradedModule, t: int, copy: Optional[str] = None) -> GradedModule:
    """Suspension by ``t``: degree ``d`` of the result is degree ``d - t``."""
    if not isinstance(pres, Presentation):
        return ShiftedModule(pres, t)
    p = pres.p

    def fg(g: Gen) -> Gen:
        return g.shifted(t, copy)

    return Presentation(
        p,
        lambda D: [fg(g) for g in pres.generators(D - t)],
        lambda D: [_map_relation(r, p, fg) for r in pres.relations(D - t)],
        pres.v1_trivial,
        f"S^{t}({pres.name})",
    )


def direct_sum(ps: Sequence[GradedModule], name: str = "") -> GradedModule:
    """Direct sum; generator names are tagged with the summand index."""
    if not ps:
        raise ValueError("empty direct sum")
    if len({m.p for m in ps}) != 1:
        raise ValueError("summands over different primes")
    if not all(isinstance(m, Presentation) for m in ps) or len({m.v1_trivial for m in ps}) != 1:
        return DirectSumModule(ps)
    p = ps[0].p

    def tagger(k):
        return lambda g: Gen(g.name, g.params, g.degree, f"{k}:{g.copy}" if g.copy else str(k))

    def gens(D):
        return [tagger(k)(g) for k, m in enumerate(ps) for g in m.generators(D)]

    def rels(D):
        return [_map_relation(r, p, tagger(k)) for k, m in enumerate(ps) for r in m.relations(D)]

    return Presentation(p, gens, rels, ps[0].v1_trivial, name or " + ".join(m.name for m in ps))


def adjoin_exterior(pres: Presentation, sigma_degree: int, sigma_name: str) -> Presentation:
    """``pres <sigma>``: pres plus a copy shifted by ``sigma_degree``."""
    p = pres.p
    tagged = shift(pres, sigma_degree, copy=sigma_name)
    return Presentation(
        p,
        lambda D: list(pres.generators(D)) + list(tagged.generators(D)),
        lambda D: list(pres.relations(D)) + list(tagged.relations(D)),
        pres.v1_trivial,
        f"{pres.name}<{sigma_name}>",
    )


def with_relations(pres: Presentation, extra: Callable[[int], Iterable[Relation]], name: str = "") -> Presentation:
    return Presentation(
        pres.p,
        pres.generators,
        lambda D: list(pres.relations(D)) + list(extra(D)),
        pres.v1_trivial,
        name or pres.name,
    )


# -- maps ------------------------------------------------------------------


@dataclass
class MapDegree:
    """A graded map realized between one source and one target degree."""

    source: DegreeData
    target: DegreeData
    columns: List[Vec]
    p: int
    _kernel_lattice: Optional[LatticeBasis] = None
    _kernel_span: Optional[List[Vec]] = None

    def kernel_span(self) -> List[Vec]:
        """Vectors spanning ``{x : f(x) = 0}`` in source coordinates."""
        if self._kernel_span is None:
            a = len(self.columns)
            vecs = list(self.columns) + [{k: -x for k, x in r.items()} for r in self.target.relations]
            ker = kernel_basis(vecs, self.p)
            span = [{i: x for i, x in k.items() if i < a} for k in ker]
            self._kernel_span = [v for v in span if v]
        return self._kernel_span

    def kernel_lattice(self) -> LatticeBasis:
        if self._kernel_lattice is None:
            self._kernel_lattice = LatticeBasis(self.kernel_span(), self.p)
        return self._kernel_lattice

    def kernel(self) -> AbelianGroup:
        lat = self.kernel_lattice()
        rels = [lat.coordinates(r) for r in self.source.relations]
        free, tors = smith_summands(rels, lat.rank, self.p)
        return AbelianGroup(len(free), tuple(e for _, e in tors))

    def image(self) -> AbelianGroup:
        free, tors = smith_summands(self.kernel_span(), len(self.source.basis), self.p)
        return AbelianGroup(len(free), tuple(e for _, e in tors))

    def cokernel(self) -> AbelianGroup:
        n = len(self.target.basis)
        free, tors = smith_summands(list(self.target.relations) + list(self.columns), n, self.p)
        return AbelianGroup(len(free), tuple(e for _, e in tors))


class GradedMap:
    """Degree-homogeneous homomorphism specified on generators.

    ``images(g)`` returns a list of ``(coeff, Monomial)`` in the target; the
    map is extended v1-linearly.
    """

    def __init__(self, source: Presentation, target: Presentation, images: Callable[[Gen], List[Term]], degree_shift: int, name: str = ""):
        if source.p != target.p:
            raise ValueError("maps between different primes")
        self.source, self.target, self.images, self.degree_shift = source, target, images, degree_shift
        self.p = source.p
        self.name = name
        self._cache: Dict[int, MapDegree] = {}
        self._lock = threading.Lock()

    def image_terms(self, m: Monomial) -> List[Term]:
        out = []
        for c, t in self.images(m.gen):
            if t.degree(self.p) != m.gen.degree + self.degree_shift:
                raise ValueError(f"image of {m.gen} has wrong degree")
            out.append((c * self.p ** m.p_exp, t.times_v1(m.v1)))
        return out

    def at(self, d: int) -> MapDegree:
        """The map from source degree ``d`` to target degree ``d + shift``."""
        md = self._cache.get(d)
        if md is None:
            src = self.source.degree_data(d) if d >= 0 else DegreeData([], {}, [])
            e = d + self.degree_shift
            tgt = self.target.degree_data(e) if e >= 0 else DegreeData([], {}, [])
            cols = [self.target.vector(self.image_terms(m), tgt.index) if tgt.basis else {} for m in src.basis]
            md = MapDegree(src, tgt, cols, self.p)
            with self._lock:
                self._cache[d] = md
        return md

    def kernel(self, d: int) -> AbelianGroup:
        return self.at(d).kernel()

    def image(self, d: int) -> AbelianGroup:
        return self.at(d).image()

    def cokernel_into(self, e: int) -> AbelianGroup:
        """Cokernel in target degree ``e``."""
        return self.at(e - self.degree_shift).cokernel()

    def is_well_defined(self, d: int) -> bool:
        """Source relations in degree ``d`` map into target relations."""
        md = self.at(d)
        e = d + self.degree_shift
        if e < 0:
            return True
        span = self.target.span(e)
        for r in md.source.relations:
            img: Vec = {}
            for i, x in r.items():
                for k, y in md.columns[i].items():
                    img[k] = img.get(k, 0) + x * y
            img = {k: x for k, x in img.items() if x}
            if img:
                try:
                    span.coordinates(img)
                except ValueError:
                    return False
        return True

    def then(self, other: "GradedMap") -> "GradedMap":
        """Composite ``other o self``."""
        p = self.p

        def images(g: Gen) -> List[Term]:
            out = []
            for c, m in self.images(g):
                for c2, m2 in other.image_terms(m):
                    out.append((c * c2, m2))
            return out

        return GradedMap(self.source, other.target, images, self.degree_shift + other.degree_shift, f"{other.name}.{self.name}")


def v1_multiplication(pres: Presentation, k: int = 1) -> GradedMap:
    return GradedMap(pres, pres, lambda g: [(1, Monomial(g, k))], k * (2 * pres.p - 2), f"v1^{k}")


def v1_tower_order(pres: Presentation, g: Gen, max_power: int = 256) -> float:
    """Smallest ``m`` with ``v1^m * g = 0``; ``inf`` for a v1-free class."""
    p = pres.p
    for m in range(max_power + 1):
        d = g.degree + m * (2 * p - 2)
        if pres.v1_trivial and m > 0:
            return m
        if pres.is_zero([(1, Monomial(g, m))], d):
            return m
    d = g.degree + max_power * (2 * p - 2)
    if pres.element_order([(1, Monomial(g, max_power))], d) == math.inf:
        return math.inf
    raise ValueError(f"tower of {g} longer than {max_power}; raise max_power")
