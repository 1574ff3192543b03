"""Sparse exact linear algebra over the p-local integers.

Vectors are ``dict[int, int]`` (index -> nonzero coefficient).  Every
operation below is invertible over Z_(p): rows/columns are only ever scaled
by integers prime to p, so integer entries suffice and no rational
arithmetic is needed for elimination.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

Vec = Dict[int, int]


def split_p(x: int, p: int) -> Tuple[int, int]:
    """Return ``(e, u)`` with ``x = p**e * u`` and ``p`` not dividing ``u``."""
    if x == 0:
        raise ValueError("zero has infinite valuation")
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e, x


def _strip_unit_content(vecs: Sequence[Vec], p: int) -> None:
    """Divide the vectors (jointly, in place) by their prime-to-p content."""
    g = 0
    for v in vecs:
        for x in v.values():
            g = gcd(g, x)
            if g == 1:
                return
    if g == 0:
        return
    while g % p == 0:
        g //= p
    if g > 1:
        for v in vecs:
            for k in v:
                v[k] //= g


def _min_val(v: Vec, p: int) -> int:
    return min(split_p(x, p)[0] for x in v.values())


def _combine(target: Vec, u: int, q: int, pivot: Vec) -> None:
    """target <- u*target - q*pivot, in place, dropping zeros."""
    if u != 1:
        for k in target:
            target[k] *= u
    for k, x in pivot.items():
        y = target.get(k, 0) - q * x
        if y:
            target[k] = y
        else:
            target.pop(k, None)


class _Eliminator:
    """Shared pivot-selection loop.

    Each item is a main vector plus an optional tracker carried along.  A
    pivot is the entry of globally minimal p-valuation (ties broken by
    shortest vector), so it divides every other entry in its coordinate
    p-locally.
    """

    def __init__(self, vectors: Iterable[Vec], p: int, trackers: Optional[List[Vec]] = None):
        self.p = p
        self.vecs: Dict[int, Vec] = {}
        self.trk: Dict[int, Vec] = {}
        self.zero: List[int] = []
        self.index: Dict[int, set] = {}
        self.heap: List[Tuple[int, int, int, int]] = []
        self.version: Dict[int, int] = {}
        for i, v in enumerate(vectors):
            v = {k: x for k, x in v.items() if x}
            t = trackers[i] if trackers is not None else None
            if t is not None:
                self.trk[i] = dict(t)
            if not v:
                self.zero.append(i)
                continue
            self.vecs[i] = v
            for k in v:
                self.index.setdefault(k, set()).add(i)
            self.version[i] = 0
            self._push(i)

    def _push(self, i: int) -> None:
        v = self.vecs[i]
        heapq.heappush(self.heap, (_min_val(v, self.p), len(v), i, self.version[i]))

    def pop_pivot(self) -> Optional[Tuple[int, int]]:
        while self.heap:
            _, _, i, ver = heapq.heappop(self.heap)
            if i in self.vecs and self.version[i] == ver:
                v = self.vecs[i]
                best = None
                for k, x in v.items():
                    key = (split_p(x, self.p)[0], len(self.index[k]), k)
                    if best is None or key < best:
                        best = key
                return i, best[2]
        return None

    def eliminate(self, i: int, k: int) -> int:
        """Clear coordinate ``k`` from all other vectors using vector ``i``.

        Returns the valuation of the pivot.  Vector ``i`` is retired.
        """
        p = self.p
        piv = self.vecs.pop(i)
        ptrk = self.trk.get(i)
        e, u = split_p(piv[k], p)
        pe = p ** e
        for kk in piv:
            self.index[kk].discard(i)
        for j in list(self.index.get(k, ())):
            v = self.vecs[j]
            q = v[k] // pe
            old_keys = set(v)
            _combine(v, u, q, piv)
            t = self.trk.get(j)
            if t is not None:
                _combine(t, u, q, ptrk)
                _strip_unit_content([v, t], p)
            else:
                _strip_unit_content([v], p)
            for kk in old_keys - set(v):
                self.index[kk].discard(j)
            for kk in set(v) - old_keys:
                self.index.setdefault(kk, set()).add(j)
            if not v:
                del self.vecs[j]
                self.zero.append(j)
            else:
                self.version[j] += 1
                self._push(j)
        return e


def smith_summands(relations: Iterable[Vec], n: int, p: int) -> Tuple[List[int], List[Tuple[int, int]]]:
    """Cokernel of the relation vectors inside Z_(p)^n.

    Returns ``(free_coords, torsion)`` where ``free_coords`` lists the basis
    coordinates that survive as free summands and ``torsion`` lists
    ``(coordinate, exponent)`` for each Z/p^e summand (e > 0).  The
    coordinate is the leading basis element of the summand's generator.
    """
    elim = _Eliminator(relations, p)
    pivots = set()
    torsion = []
    while True:
        nxt = elim.pop_pivot()
        if nxt is None:
            break
        i, k = nxt
        e = elim.eliminate(i, k)
        pivots.add(k)
        if e > 0:
            torsion.append((k, e))
    assert not elim.vecs
    free = [k for k in range(n) if k not in pivots]
    return free, torsion


def kernel_basis(vectors: Sequence[Vec], p: int) -> List[Vec]:
    """Z_(p)-basis of ``{x : sum_j x_j * vectors[j] = 0}``."""
    trackers = [{j: 1} for j in range(len(vectors))]
    elim = _Eliminator(vectors, p, trackers)
    while True:
        nxt = elim.pop_pivot()
        if nxt is None:
            break
        elim.eliminate(*nxt)
    return [elim.trk[j] for j in sorted(elim.zero) if elim.trk[j]]


class LatticeBasis:
    """Echelon basis of the Z_(p)-span of some vectors, with coordinates."""

    def __init__(self, vectors: Iterable[Vec], p: int):
        self.p = p
        elim = _Eliminator(list(vectors), p)
        self.basis: List[Vec] = []
        self.pivots: List[Tuple[int, int]] = []
        while True:
            nxt = elim.pop_pivot()
            if nxt is None:
                break
            i, k = nxt
            vec = dict(elim.vecs[i])
            elim.eliminate(i, k)
            self.basis.append(vec)
            self.pivots.append((k, vec[k]))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Vec) -> Vec:
        """Coordinates of ``v`` in this basis, scaled by a unit to be integral.

        Raises ``ValueError`` if ``v`` is not in the p-local span.
        """
        return integralize(self.fraction_coordinates(v), self.p)

    def fraction_coordinates(self, v: Vec) -> Dict[int, Fraction]:
        """Exact (p-local) coordinates of ``v``; see :meth:`coordinates`."""
        rest: Dict[int, Fraction] = {k: Fraction(x) for k, x in v.items() if x}
        coords: Dict[int, Fraction] = {}
        for idx, (k, a) in enumerate(self.pivots):
            x = rest.get(k)
            if not x:
                continue
            c = x / a
            coords[idx] = c
            for kk, y in self.basis[idx].items():
                z = rest.get(kk, 0) - c * y
                if z:
                    rest[kk] = z
                else:
                    rest.pop(kk, None)
        if rest:
            raise ValueError("vector is not in the span")
        return coords


def integralize(v: Dict[int, Fraction], p: int) -> Vec:
    """Clear prime-to-p denominators; p in a denominator is an error."""
    den = 1
    for x in v.values():
        d = Fraction(x).denominator
        den = den * d // gcd(den, d)
    if den % p == 0:
        raise ValueError("coefficient is not p-local")
    out = {}
    for k, x in v.items():
        y = Fraction(x) * den
        if y:
            out[k] = int(y)
    return out
