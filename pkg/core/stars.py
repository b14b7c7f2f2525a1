"""
Vertex-disjoint h-star families (the star-family lemma) in a sparse bipartite pair.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from core.bigraph import BipartiteGraph, Side, VertexRef, VertexSet, iter_bits
from core.errors import InvariantViolation, StarLemmaError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Star:
    center: VertexRef
    leaves: VertexSet


def lemma_constant(h: int, delta: int, big_delta: int, size_1: int, size_2: int) -> Optional[Fraction]:
    """
    Smallest admissible c for the lemma's hypotheses, or None if none exists.

    c must satisfy ||U_i| - M| <= cM, delta <= cM, Delta <= cM for some M > 0,
    and c < 1/(6h+7). The size terms alone are best at the midpoint of the
    two class sizes; a large degree bound D pushes the optimum up to
    M = min(|U_i|) + D, where (M - min)/M and D/M meet.
    """
    if size_1 + size_2 == 0:
        return None
    low = min(size_1, size_2)
    d = max(delta, big_delta)
    m = max(Fraction(size_1 + size_2, 2), Fraction(low + d))
    c = max(Fraction(abs(size_1 - m)) / m, Fraction(abs(size_2 - m)) / m, Fraction(d) / m)
    if c >= Fraction(1, 6 * h + 7):
        return None
    return c


def collect_stars(g: BipartiteGraph, h: int, u1: VertexSet, u2: VertexSet,
                  want_1: int, want_2: int,
                  blocked: Tuple[int, int] = (0, 0)) -> Tuple[List[Star], List[Star]]:
    """
    Greedily pick disjoint h-stars centred in u1 and in u2, leaves on the other set.

    Centres are taken lowest free-degree first (ties by index), leaves
    lowest free-degree first, so that high-degree vertices stay available.
    The two families are interleaved so neither side starves the other.

    Args:
        g: Host graph
        h: Leaves per star
        u1, u2: Opposite-side vertex sets
        want_1, want_2: Stars wanted per side
        blocked: (A mask, B mask) of vertices that must not be used

    Returns:
        (stars centred in u1, stars centred in u2); may fall short of the wants
    """
    free = {Side.A: 0, Side.B: 0}
    free[u1.side] = u1.mask
    free[u2.side] = u2.mask
    free[Side.A] &= ~blocked[0]
    free[Side.B] &= ~blocked[1]

    found = {u1.side: [], u2.side: []}
    wants = {u1.side: want_1, u2.side: want_2}

    def pick(side: Side) -> Optional[Star]:
        adj = g.adjacency(side)
        other_adj = g.adjacency(side.other)
        best = None
        for v in iter_bits(free[side]):
            degree = (adj[v] & free[side.other]).bit_count()
            if degree >= h and (best is None or degree < best[0]):
                best = (degree, v)
        if best is None:
            return None
        v = best[1]
        candidates = sorted(
            iter_bits(adj[v] & free[side.other]),
            key=lambda u: ((other_adj[u] & free[side]).bit_count(), u),
        )
        leaves = candidates[:h]
        free[side] &= ~(1 << v)
        for u in leaves:
            free[side.other] &= ~(1 << u)
        return Star(VertexRef(side, v), VertexSet.of(side.other, leaves))

    progress = True
    while progress:
        progress = False
        for side in (u1.side, u2.side):
            if len(found[side]) < wants[side]:
                star = pick(side)
                if star is not None:
                    found[side].append(star)
                    progress = True
    return found[u1.side], found[u2.side]


def find_stars(h: int, u1: VertexSet, u2: VertexSet, g: BipartiteGraph) -> Tuple[List[Star], List[Star]]:
    """
    Disjoint h-stars: 2(delta-h+1) centred in U1 and as many centred in U2.

    Args:
        h: Star size
        u1, u2: The two classes of the sparse pair H = G[U1, U2]
        g: Host graph

    Returns:
        (stars centred in u1, stars centred in u2)

    Raises:
        StarLemmaError: hypotheses fail
        InvariantViolation: greedy stalls although the hypotheses hold
    """
    if u1.side == u2.side:
        raise StarLemmaError("U1 and U2 must lie on opposite sides")
    if h < 1:
        raise StarLemmaError(f"h must be >= 1, got {h}")
    delta = g.delta_between(u1, u2)
    big_delta = g.Delta_between(u2, u1)
    if h > delta:
        raise StarLemmaError(f"h={h} exceeds delta(U1,U2)={delta}")
    c = lemma_constant(h, delta, big_delta, len(u1), len(u2))
    if c is None:
        raise StarLemmaError(
            f"No admissible c < 1/{6 * h + 7} for |U1|={len(u1)}, |U2|={len(u2)}, "
            f"delta={delta}, Delta={big_delta}"
        )

    need = 2 * (delta - h + 1)
    stars_1, stars_2 = collect_stars(g, h, u1, u2, need, need)
    if len(stars_1) < need or len(stars_2) < need:
        raise InvariantViolation(
            f"Greedy found {len(stars_1)}/{len(stars_2)} stars, lemma guarantees {need} "
            f"(c={c}); this is a bug"
        )
    logger.debug(f"Found {need} disjoint {h}-stars per side (c={float(c):.4f})")
    return stars_1, stars_2
