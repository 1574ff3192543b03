"""p-adic valuations, p-local abelian groups and cokernels of integer matrices."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

from ._lattice import smith_summands


class Prime(int):
    """An ``int`` that has been checked to be prime."""

    def __new__(cls, p: int) -> "Prime":
        p = int(p)
        if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        return super().__new__(cls, p)


def as_prime(p) -> Prime:
    return p if isinstance(p, Prime) else Prime(p)


def nu_p(k: int, p: int) -> int:
    """Exponent of the largest power of ``p`` dividing ``k``.

    >>> nu_p(12, 2)
    2
    """
    if k == 0:
        raise ValueError("nu_p(0) is infinite")
    k = abs(k)
    e = 0
    while k % p == 0:
        k //= p
        e += 1
    return e


@dataclass(frozen=True)
class AbelianGroup:
    """Finitely generated p-local group: Z_(p)^free_rank plus Z/p^e summands.

    ``torsion`` holds the exponents ``e`` and is kept sorted, so equality is
    rank equality plus multiset equality.
    """

    free_rank: int = 0
    torsion: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        tors = tuple(sorted(int(e) for e in self.torsion))
        if any(e <= 0 for e in tors):
            raise ValueError("torsion exponents must be positive")
        object.__setattr__(self, "torsion", tors)

    @property
    def length(self) -> int:
        """p-length of the torsion subgroup (sum of exponents)."""
        return sum(self.torsion)

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def torsion_part(self) -> "AbelianGroup":
        return AbelianGroup(0, self.torsion)

    def __add__(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def without(self, other: "AbelianGroup") -> "AbelianGroup":
        """Remove the summands of ``other`` (which must all be present)."""
        left = Counter(self.torsion)
        left.subtract(other.torsion)
        if any(v < 0 for v in left.values()) or other.free_rank > self.free_rank:
            raise ValueError(f"{other} is not a summand of {self}")
        return AbelianGroup(self.free_rank - other.free_rank, tuple(left.elements()))

    def to_record(self, degree: int) -> dict:
        return {"degree": degree, "free_rank": self.free_rank, "torsion_exponents": list(self.torsion)}

    @classmethod
    def from_record(cls, rec: dict) -> "AbelianGroup":
        return cls(rec["free_rank"], tuple(rec["torsion_exponents"]))

    def __str__(self) -> str:
        parts = ["Z"] * min(self.free_rank, 1)
        if self.free_rank > 1:
            parts = [f"Z^{self.free_rank}"]
        parts += [f"Z/p^{e}" if e > 1 else "Z/p" for e in self.torsion]
        return " + ".join(parts) or "0"


ZERO = AbelianGroup()


def merge(groups: Iterable[AbelianGroup]) -> AbelianGroup:
    out = ZERO
    for g in groups:
        out = out + g
    return out


def cokernel_p(M: Sequence[Sequence[int]], p: int) -> AbelianGroup:
    """p-localized cokernel of the integer matrix ``M : Z^cols -> Z^rows``.

    Prime-to-p torsion disappears; each elementary divisor of positive
    valuation ``e`` contributes a Z/p^e summand.
    """
    p = as_prime(p)
    rows = len(M)
    cols = len(M[0]) if rows else 0
    if any(len(r) != cols for r in M):
        raise ValueError("ragged matrix")
    relations = [{i: int(M[i][j]) for i in range(rows) if M[i][j]} for j in range(cols)]
    free, torsion = smith_summands(relations, rows, p)
    return AbelianGroup(len(free), tuple(e for _, e in torsion))
