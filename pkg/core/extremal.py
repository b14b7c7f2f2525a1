"""
Lower-bound constructions and their no-factor certificates.
Each builder returns the graph together with its block labeling, so that
certificates and tests refer to blocks by name.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from core.bigraph import BipartiteGraph, Side, VertexSet, consecutive_blocks, iter_bits
from core.c4free import build_P, build_Q, build_R
from core.errors import ConstructionError, GadgetError, GraphError
from utils.logger import get_logger

logger = get_logger(__name__)


class Case(str, Enum):
    EVEN = "even"
    ODD_MID = "odd-mid"
    ODD_SUCC = "odd-succ"


class ObstructionKind(str, Enum):
    DIVISIBILITY_AFTER_UNMIXING = "DivisibilityAfterUnmixing"
    COUNTING_INTEGRALITY = "CountingIntegrality"


@dataclass(frozen=True)
class ConstructionParams:
    s: int
    t: int
    k: int

    def __post_init__(self):
        if self.s < 1:
            raise ConstructionError(f"s must be >= 1, got {self.s}")
        if self.t <= self.s:
            raise ConstructionError(f"t must exceed s, got s={self.s}, t={self.t}")
        if self.k < 1:
            raise ConstructionError(f"k must be >= 1, got {self.k}")

    @property
    def n(self) -> int:
        return self.k * (self.s + self.t)

    @property
    def l(self) -> int:
        """k = 2l+1 for odd k."""
        return (self.k - 1) // 2


@dataclass
class LabeledConstruction:
    graph: BipartiteGraph
    blocks: Dict[str, VertexSet]
    claimed_min_degree: int
    case: Case
    params: ConstructionParams


@dataclass
class Obstruction:
    """
    No-factor certificate.

    forbidden_pairs: (X, Y) block pairs that no K_{s,t} copy may straddle.
    empty_pairs: block pairs that must carry no edge at all.
    block_data: sizes of the unmixed blocks and the congruence they violate.
    bounds: for CountingIntegrality, the closed interval forced on r1.
    """

    kind: ObstructionKind
    forbidden_pairs: List[Tuple[VertexSet, VertexSet]]
    block_data: Dict[str, object]
    empty_pairs: List[Tuple[VertexSet, VertexSet]] = field(default_factory=list)
    bounds: Optional[Tuple[Fraction, Fraction]] = None


def threshold(s: int, t: int, k: int) -> int:
    """Minimum degree that forces a K_{s,t}-factor (n = k(s+t))."""
    n = k * (s + t)
    if k % 2 == 0:
        return n // 2 + s - 1
    return (n + t + s) // 2 - 1


def threshold_kss(s: int, k: int) -> int:
    """Reference threshold for K_{s,s}-factors, n = ks."""
    n = k * s
    if k % 2 == 0:
        return n // 2 + s - 1
    return (n + 3 * s) // 2 - 2


# ----------------------------------------------------------------------
# Assembly helpers
# ----------------------------------------------------------------------

def _join(adj: List[int], a_block: VertexSet, b_block: VertexSet):
    for a in a_block:
        adj[a] |= b_block.mask


def _embed(adj: List[int], a_block: VertexSet, b_block: VertexSet,
           gadget: BipartiteGraph, transposed: bool = False):
    """
    Copy a gadget onto G[a_block, b_block].

    With transposed=True the gadget's A-class lands on b_block.
    """
    a_order = a_block.sorted
    b_order = b_block.sorted
    if transposed:
        if (gadget.n_a, gadget.n_b) != (len(b_order), len(a_order)):
            raise GadgetError("Transposed gadget does not fit its blocks")
        for j, mask in enumerate(gadget.adjacency(Side.A)):
            for i in iter_bits(mask):
                adj[a_order[i]] |= 1 << b_order[j]
    else:
        if (gadget.n_a, gadget.n_b) != (len(a_order), len(b_order)):
            raise GadgetError("Gadget does not fit its blocks")
        for i, mask in enumerate(gadget.adjacency(Side.A)):
            for j in iter_bits(mask):
                adj[a_order[i]] |= 1 << b_order[j]


def _finish(params: ConstructionParams, adj: List[int], blocks: Dict[str, VertexSet],
            claimed: int, case: Case) -> LabeledConstruction:
    graph = BipartiteGraph(params.n, params.n, adj)
    actual = graph.min_degree()
    if actual != claimed:
        raise ConstructionError(
            f"{case.value} construction for (s={params.s}, t={params.t}, k={params.k}) "
            f"has min degree {actual}, expected {claimed}"
        )
    logger.info(
        f"Built {case.value} construction: s={params.s}, t={params.t}, k={params.k}, "
        f"n={params.n}, delta={actual}"
    )
    return LabeledConstruction(graph, blocks, claimed, case, params)


# ----------------------------------------------------------------------
# Builders
# ----------------------------------------------------------------------

def build_even(params: ConstructionParams) -> LabeledConstruction:
    """
    k even: A1, B1 of size n/2+1 and A2, B2 of size n/2-1, diagonal blocks
    complete, G[A1,B2] and G[B1,A2] copies of Q(n/2+1, s-1).
    """
    if params.k % 2:
        raise ConstructionError(f"Even construction needs k even, got k={params.k}")
    n, s = params.n, params.s
    half = n // 2
    a1, a2 = consecutive_blocks(Side.A, [half + 1, half - 1])
    b1, b2 = consecutive_blocks(Side.B, [half + 1, half - 1])
    gadget = build_Q(half + 1, s - 1)

    adj = [0] * n
    _join(adj, a1, b1)
    _join(adj, a2, b2)
    _embed(adj, a1, b2, gadget)
    _embed(adj, a2, b1, gadget, transposed=True)

    blocks = {"A1": a1, "A2": a2, "B1": b1, "B2": b2}
    return _finish(params, adj, blocks, half + s - 2, Case.EVEN)


def build_odd_mid(params: ConstructionParams) -> LabeledConstruction:
    """
    k odd, s+1 < t <= 2s+1: four blocks of size (n-t+s+2)/2, A_*, B_* of size t-s-2,
    cross blocks copies of P(m, s-1), G[A_*, B_*] empty.
    """
    s, t, n = params.s, params.t, params.n
    if params.k % 2 == 0:
        raise ConstructionError(f"Odd-mid construction needs k odd, got k={params.k}")
    if not s + 1 < t <= 2 * s + 1:
        raise ConstructionError(f"Odd-mid construction needs s+1 < t <= 2s+1, got s={s}, t={t}")

    m = (n - t + s + 2) // 2
    star = t - s - 2
    a1, a2, a_star = consecutive_blocks(Side.A, [m, m, star])
    b1, b2, b_star = consecutive_blocks(Side.B, [m, m, star])
    gadget = build_P(m, s - 1)

    adj = [0] * n
    _join(adj, a1, b1)
    _join(adj, a2, b2)
    for a_block in (a1, a2):
        _join(adj, a_block, b_star)
    for b_block in (b1, b2):
        _join(adj, a_star, b_block)
    _embed(adj, a1, b2, gadget)
    _embed(adj, a2, b1, gadget)

    blocks = {"A1": a1, "A2": a2, "A*": a_star, "B1": b1, "B2": b2, "B*": b_star}
    return _finish(params, adj, blocks, (n + t + s) // 2 - 2, Case.ODD_MID)


def build_odd_succ(params: ConstructionParams) -> LabeledConstruction:
    """
    k odd, t = s+1: A1, B1 of size l(s+t)+s, A2, B2 of size l(s+t)+s+1,
    G[B2,A1] and G[A2,B1] copies of R((n+1)/2, s-1).
    """
    s, t, n = params.s, params.t, params.n
    if params.k % 2 == 0:
        raise ConstructionError(f"Odd-succ construction needs k odd, got k={params.k}")
    if t != s + 1:
        raise ConstructionError(f"Odd-succ construction needs t = s+1, got s={s}, t={t}")

    small = params.l * (s + t) + s
    a1, a2 = consecutive_blocks(Side.A, [small, small + 1])
    b1, b2 = consecutive_blocks(Side.B, [small, small + 1])
    gadget = build_R((n + 1) // 2, s - 1)

    adj = [0] * n
    _join(adj, a1, b1)
    _join(adj, a2, b2)
    # R1 = B2, R2 = A1
    _embed(adj, a1, b2, gadget, transposed=True)
    # R1 = A2, R2 = B1
    _embed(adj, a2, b1, gadget)

    blocks = {"A1": a1, "A2": a2, "B1": b1, "B2": b2}
    return _finish(params, adj, blocks, (n + t + s) // 2 - 2, Case.ODD_SUCC)


BUILDERS = {
    Case.EVEN: build_even,
    Case.ODD_MID: build_odd_mid,
    Case.ODD_SUCC: build_odd_succ,
}


def case_for(params: ConstructionParams) -> Case:
    """Applicable construction for (s, t, k)."""
    if params.k % 2 == 0:
        return Case.EVEN
    if params.t == params.s + 1:
        return Case.ODD_SUCC
    if params.t <= 2 * params.s + 1:
        return Case.ODD_MID
    raise ConstructionError(
        f"No tight construction for k odd and t > 2s+1 (s={params.s}, t={params.t})"
    )


def construction_for(params: ConstructionParams) -> LabeledConstruction:
    return BUILDERS[case_for(params)](params)


# ----------------------------------------------------------------------
# Certificates
# ----------------------------------------------------------------------

def obstruction_for(c: LabeledConstruction) -> Obstruction:
    """Certificate matching the construction's impossibility argument."""
    s, t = c.params.s, c.params.t
    b = c.blocks
    forbidden = [(b["A1"], b["B2"]), (b["A2"], b["B1"])]

    if c.case is Case.ODD_MID:
        size_a1 = len(b["A1"])
        size_star = len(b["A*"])
        bounds = (Fraction(size_a1, s + t), Fraction(size_a1 + size_star, s + t))
        return Obstruction(
            kind=ObstructionKind.COUNTING_INTEGRALITY,
            forbidden_pairs=forbidden,
            empty_pairs=[(b["A*"], b["B*"])],
            block_data={
                "A1": size_a1, "B1": len(b["B1"]),
                "A*": size_star, "B*": len(b["B*"]),
                "modulus": s + t,
            },
            bounds=bounds,
        )

    total = len(b["A1"]) + len(b["B1"])
    return Obstruction(
        kind=ObstructionKind.DIVISIBILITY_AFTER_UNMIXING,
        forbidden_pairs=forbidden,
        block_data={
            "A1": len(b["A1"]), "B1": len(b["B1"]),
            "A2": len(b["A2"]), "B2": len(b["B2"]),
            "modulus": s + t,
            "residue": total % (s + t),
        },
    )


def _unmixable(g: BipartiteGraph, x: VertexSet, y: VertexSet, s: int) -> bool:
    """No K_{s,t} copy can use vertices of both X and Y."""
    if x.side == y.side:
        return False
    a_set, b_set = (x, y) if x.side is Side.A else (y, x)
    if s == 1:
        return g.edges_between(a_set, b_set) == 0
    if g.Delta_between(a_set, b_set) > s - 1 or g.Delta_between(b_set, a_set) > s - 1:
        return False
    return g.induced(a_set, b_set).graph.is_k22_free()


def _partitions(g: BipartiteGraph, sets: List[VertexSet], side: Side) -> bool:
    seen = set()
    for vs in sets:
        if vs.side is not side or not seen.isdisjoint(vs.members):
            return False
        seen |= vs.members
    return seen == set(range(g.size(side)))


def _check_divisibility(g: BipartiteGraph, o: Obstruction, s: int, t: int) -> bool:
    (a1, b2), (a2, b1) = o.forbidden_pairs
    if not (_partitions(g, [a1, a2], Side.A) and _partitions(g, [b1, b2], Side.B)):
        return False
    # every copy lies inside A1+B1 or inside A2+B2
    residue = (len(a1) + len(b1)) % (s + t)
    if o.block_data.get("residue") != residue:
        return False
    return residue != 0


def _check_counting(g: BipartiteGraph, o: Obstruction, s: int, t: int) -> bool:
    (a1, b2), (a2, b1) = o.forbidden_pairs
    if len(o.empty_pairs) != 1 or o.bounds is None:
        return False
    a_star, b_star = o.empty_pairs[0]
    if a_star.side is not Side.A:
        a_star, b_star = b_star, a_star
    if not (_partitions(g, [a1, a2, a_star], Side.A) and _partitions(g, [b1, b2, b_star], Side.B)):
        return False
    if len(a1) != len(b1):
        return False
    # r1 != r2 would unbalance the covered sets by at least t-s
    if max(len(a_star), len(b_star)) >= t - s:
        return False
    # an s-side inside A* or B* lets a copy straddle A1 and A2
    if max(len(a_star), len(b_star)) >= s:
        return False

    lo = Fraction(len(a1), s + t)
    hi = Fraction(len(a1) + len(a_star), s + t)
    if (lo, hi) != tuple(o.bounds):
        return False
    return math.ceil(lo) > hi


def check_obstruction(g: BipartiteGraph, o: Obstruction, s: int, t: int) -> bool:
    """
    Verify a no-factor certificate without searching for factors.

    Returns:
        True only if both the unmixability and the arithmetic parts hold
    """
    try:
        for x, y in o.forbidden_pairs:
            if not _unmixable(g, x, y, s):
                logger.debug(f"Unmixability fails for blocks of sizes {len(x)}, {len(y)}")
                return False
        for x, y in o.empty_pairs:
            a_set, b_set = (x, y) if x.side is Side.A else (y, x)
            if a_set.side == b_set.side or g.edges_between(a_set, b_set):
                return False

        if o.kind is ObstructionKind.DIVISIBILITY_AFTER_UNMIXING:
            return _check_divisibility(g, o, s, t)
        return _check_counting(g, o, s, t)

    except (GraphError, ValueError) as e:
        logger.debug(f"Certificate rejected: {e}")
        return False
