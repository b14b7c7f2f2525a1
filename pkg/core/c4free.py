"""
C4-free regular gadgets P(m,p), Q(m,q), R(m,q).
P(m,p) is the circulant graph i ~ i+d (mod m) over a Sidon set D of size p.
Q and R delete two (resp. one) B-vertices from P.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from core.bigraph import BipartiteGraph, Side, iter_bits
from core.errors import GadgetError
from utils.logger import get_logger

logger = get_logger(__name__)


class GadgetKind(str, Enum):
    P = "P"
    Q = "Q"
    R = "R"


@dataclass(frozen=True)
class GadgetSpec:
    kind: GadgetKind
    m: int
    deg: int

    def build(self) -> BipartiteGraph:
        builders = {GadgetKind.P: build_P, GadgetKind.Q: build_Q, GadgetKind.R: build_R}
        return builders[self.kind](self.m, self.deg)


# Optimal Golomb rulers: integer Sidon sets of minimal length. A ruler of
# length L stays Sidon modulo any m > 2L, which covers m >= sidon_bound(p)
# for every p <= 10.
GOLOMB_RULERS = {
    1: (0,),
    2: (0, 1),
    3: (0, 1, 3),
    4: (0, 1, 4, 6),
    5: (0, 1, 4, 9, 11),
    6: (0, 1, 4, 10, 12, 17),
    7: (0, 1, 4, 10, 18, 23, 25),
    8: (0, 1, 4, 9, 15, 22, 32, 34),
    9: (0, 1, 5, 12, 25, 27, 35, 41, 44),
    10: (0, 1, 6, 10, 23, 26, 34, 41, 53, 55),
}

SEARCH_NODE_LIMIT = 200_000


def sidon_bound(size: int) -> int:
    """Modulus from which a Sidon set of this size is always produced for size <= 10."""
    return size * size + size + 1


def _new_differences(candidate: int, chosen: List[int], modulus: int) -> Optional[List[int]]:
    new = []
    for d in chosen:
        new.append((candidate - d) % modulus)
        new.append((d - candidate) % modulus)
    if len(set(new)) != len(new):
        return None
    return new


def _greedy_sidon(size: int, modulus: int) -> List[int]:
    chosen: List[int] = []
    used = set()
    for candidate in range(modulus):
        if len(chosen) == size:
            break
        new = _new_differences(candidate, chosen, modulus)
        if new is None or used.intersection(new):
            continue
        chosen.append(candidate)
        used.update(new)
    return chosen


def _search_sidon(size: int, modulus: int, node_limit: int = SEARCH_NODE_LIMIT) -> Optional[List[int]]:
    """Backtracking over increasing residues starting at 0, bounded by node_limit."""
    chosen: List[int] = [0]
    used = set()
    nodes = 0

    def extend(start: int) -> bool:
        nonlocal nodes
        if len(chosen) == size:
            return True
        for candidate in range(start, modulus - (size - len(chosen)) + 1):
            nodes += 1
            if nodes > node_limit:
                return False
            new = _new_differences(candidate, chosen, modulus)
            if new is None or used.intersection(new):
                continue
            chosen.append(candidate)
            used.update(new)
            if extend(candidate + 1):
                return True
            chosen.pop()
            used.difference_update(new)
        return False

    return chosen if extend(1) else None


def sidon_set(size: int, modulus: int) -> List[int]:
    """
    Sidon set modulo `modulus`.

    The greedy scan runs first: elements are taken smallest-first and a
    candidate is accepted when all its differences to the chosen elements,
    in both directions, are new and pairwise distinct. When the greedy scan
    gets stuck, an optimal Golomb ruler is used if it fits (length below
    modulus/2), and a bounded backtracking search otherwise.

    Args:
        size: Number of elements wanted
        modulus: The cyclic group Z_modulus

    Returns:
        Sorted list of residues with all ordered differences distinct

    Raises:
        GadgetError: if no Sidon set of that size was found
    """
    if size < 0 or modulus < 1:
        raise GadgetError(f"Need size >= 0 and modulus >= 1, got size={size}, modulus={modulus}")
    if size > modulus:
        raise GadgetError(f"Sidon set of size {size} cannot fit in Z_{modulus}")
    if size == 0:
        return []

    chosen = _greedy_sidon(size, modulus)
    if len(chosen) == size:
        return chosen

    ruler = GOLOMB_RULERS.get(size)
    if ruler is not None and 2 * ruler[-1] < modulus:
        logger.debug(f"Greedy Sidon scan stuck at {len(chosen)}/{size} mod {modulus}, using Golomb ruler")
        return list(ruler)

    found = _search_sidon(size, modulus)
    if found is not None:
        logger.debug(f"Sidon set of size {size} mod {modulus} found by backtracking")
        return found

    raise GadgetError(
        f"No Sidon set of size {size} found modulo {modulus} "
        f"(sets are produced for size <= 10 once modulus >= size^2+size+1 = {sidon_bound(size)})"
    )


def build_P(m: int, p: int) -> BipartiteGraph:
    """
    P(m,p): p-regular, K_{2,2}-free bipartite graph with classes of size m.

    Args:
        m: Class size
        p: Degree

    Returns:
        Graph with edges (i, i+d mod m) for d in a Sidon set of size p
    """
    if m < 1 or p < 0:
        raise GadgetError(f"P(m,p) needs m >= 1 and p >= 0, got m={m}, p={p}")
    shifts = sidon_set(p, m)
    adj = []
    for i in range(m):
        mask = 0
        for d in shifts:
            mask |= 1 << ((i + d) % m)
        adj.append(mask)
    graph = BipartiteGraph(m, m, adj)
    logger.debug(f"Built P({m},{p}) with shifts {shifts}: {graph.edge_count} edges")
    return graph


def _drop_b_vertices(graph: BipartiteGraph, dropped: Tuple[int, ...]) -> BipartiteGraph:
    kept = [b for b in range(graph.n_b) if b not in dropped]
    position = {b: j for j, b in enumerate(kept)}
    adj = []
    for mask in graph.adjacency(Side.A):
        new = 0
        for b in iter_bits(mask):
            if b in position:
                new |= 1 << position[b]
        adj.append(new)
    return BipartiteGraph(graph.n_a, len(kept), adj)


def find_disjoint_pair(graph: BipartiteGraph) -> Tuple[int, int]:
    """Lexicographically smallest pair of B-vertices with no common neighbour."""
    adj_b = graph.adjacency(Side.B)
    for w1 in range(graph.n_b):
        for w2 in range(w1 + 1, graph.n_b):
            if not adj_b[w1] & adj_b[w2]:
                return w1, w2
    raise GadgetError(f"No two B-vertices without a common neighbour in a graph with n_b={graph.n_b}")


def build_Q(m: int, q: int) -> BipartiteGraph:
    """
    Q(m,q): |Q1| = m, |Q2| = m-2, Q2-degrees q, Q1-degrees in {q-1, q}, K_{2,2}-free.

    Q(m,0) is the empty m x (m-2) graph.
    """
    if m < 2:
        raise GadgetError(f"Q(m,q) needs m >= 2, got m={m}")
    if q == 0:
        return BipartiteGraph.empty(m, m - 2)
    base = build_P(m, q)
    w1, w2 = find_disjoint_pair(base)
    logger.debug(f"Q({m},{q}): deleting B-vertices {w1}, {w2}")
    return _drop_b_vertices(base, (w1, w2))


def build_R(m: int, q: int) -> BipartiteGraph:
    """R(m,q): |R1| = m, |R2| = m-1, obtained from P(m,q) by deleting B-vertex 0."""
    if m < 1:
        raise GadgetError(f"R(m,q) needs m >= 1, got m={m}")
    if q == 0:
        return BipartiteGraph.empty(m, m - 1)
    return _drop_b_vertices(build_P(m, q), (0,))
