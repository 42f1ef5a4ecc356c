"""Graded Z/2 rank arithmetic for the path-space and Floer-side tables.

Ranks are stored explicitly up to a stabilization degree together with an
eventually-constant tail value, which is exact for every space in scope
(loop spaces of spheres, products with circles, and the degree-shifted
sums built from them).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "GradedRanks",
    "kunneth",
    "loop_ranks_sphere",
    "circle_ranks",
    "path_space_ranks",
    "rfh_ranks",
    "NOT_COMPUTED",
]

DEGREE_CAP = 64

NOT_COMPUTED = "not computed"


@dataclass(frozen=True)
class GradedRanks:
    """Eventually-constant sequence of Z/2-vector-space dimensions.

    ranks[d] is the dimension in degree d for 0 <= d < len(ranks); beyond
    that the value is the tail.  Negative degrees have rank 0.
    """

    ranks: tuple
    tail: int

    def __post_init__(self):
        if any(r < 0 for r in self.ranks) or self.tail < 0:
            raise DomainError("ranks must be nonnegative")
        if self.ranks and self.ranks[-1] != self.tail:
            # require the explicit part to have reached the tail
            raise DomainError("explicit ranks must end at the tail value")

    def __getitem__(self, degree: int) -> int:
        if degree < 0:
            return 0
        if degree < len(self.ranks):
            return self.ranks[degree]
        return self.tail

    def stabilization_degree(self) -> int:
        d = len(self.ranks)
        while d > 0 and self.ranks[d - 1] == self.tail:
            d -= 1
        return d

    def table(self, up_to: int) -> dict:
        return {d: self[d] for d in range(up_to + 1)}


def _make(ranks, tail) -> GradedRanks:
    ranks = list(ranks)
    while len(ranks) > 1 and ranks[-1] == tail and ranks[-2] == tail:
        ranks.pop()
    if not ranks:
        ranks = [tail]
    if ranks[-1] != tail:
        ranks.append(tail)
    return GradedRanks(ranks=tuple(ranks), tail=tail)


def kunneth(a: GradedRanks, b: GradedRanks, cap: int = DEGREE_CAP) -> GradedRanks:
    """Rank convolution: rank_n(out) = sum_{i+j=n} rank_i(a) rank_j(b).

    Over a field the product rule has no torsion correction.  The tail is
    finite only when at least one factor is finitely supported; otherwise
    the product has unbounded ranks and a DomainError is raised.
    """
    a_fin = a.tail == 0
    b_fin = b.tail == 0
    if not (a_fin or b_fin):
        raise DomainError("kunneth of two infinitely-supported sequences is unbounded")
    if not b_fin:
        a, b = b, a
        a_fin, b_fin = b_fin, a_fin
    # b finitely supported: tail(out) = tail(a) * total rank of b
    support_b = [d for d in range(len(b.ranks)) if b[d] > 0]
    total_b = sum(b[d] for d in support_b)
    out = []
    top = cap + len(b.ranks) + len(a.ranks) + 2
    for n in range(top):
        out.append(sum(a[n - j] * b[j] for j in support_b))
    return _make(out, a.tail * total_b)


def loop_ranks_sphere(dim: int = 2) -> GradedRanks:
    """H_*(based loop space of S^dim; Z/2) as ranks; only dim = 2 is supported.

    The values (1, 1, 1, ...) are pinned by back-derivation: convolving
    twice with the circle must reproduce the free path-space table
    (1, 3, 4, 4, ...), and rank convolution is injective on the first
    factor given the others.
    """
    if dim != 2:
        raise DomainError("only the 2-sphere loop space is tabulated")
    return GradedRanks(ranks=(1,), tail=1)


def circle_ranks() -> GradedRanks:
    return GradedRanks(ranks=(1, 1, 0), tail=0)


def path_space_ranks() -> GradedRanks:
    """Ranks of the space of paths in S^2 with endpoints on an embedded circle.

    The circle is contractible in the sphere, so the path space splits as
    loops x circle x circle up to homotopy; the ranks are the double
    convolution (1, 3, 4, 4, ...).
    """
    return kunneth(kunneth(loop_ranks_sphere(2), circle_ranks()), circle_ranks())


def rfh_ranks(path_ranks: GradedRanks, d: int, n: int, degrees) -> dict:
    """Floer-side ranks over integer degrees from the path-space table.

    rank(*) = path_rank(*) + path_rank(-* + 2d - n + 1), with degrees 0 and
    1 excluded from the computation's domain (marked, not numbered).
    """
    if not 2 * d <= n:
        raise DomainError("the computation requires d <= n/2")
    shift = 2 * d - n + 1
    out = {}
    for star in degrees:
        if star in (0, 1):
            out[star] = NOT_COMPUTED
            continue
        out[star] = path_ranks[star] + path_ranks[-star + shift]
    return out
