"""
Seeded instance generators: random graphs with a minimum-degree floor and
structured near-extremal graphs with known dense-pair class sizes.
"""

import random
from typing import Dict, List, Optional, Tuple

from core.bigraph import BipartiteGraph, Side, VertexSet, consecutive_blocks, iter_bits
from core.extremal import threshold
from core.tiler import ExtremalLabeling, TilerConfig
from utils.logger import get_logger

logger = get_logger(__name__)


def raise_min_degree(adj_a: List[int], n_a: int, n_b: int, floor: int, rng: random.Random,
                     allowed: Optional[Dict[Side, List[int]]] = None) -> int:
    """
    Add edges until every vertex has degree >= floor.

    The lowest-degree vertex (A before B, then by index) is joined to a
    uniformly chosen non-neighbour among its allowed partners.

    Args:
        adj_a: A-side adjacency masks, updated in place
        n_a, n_b: Class sizes
        floor: Target minimum degree
        rng: Source of randomness
        allowed: Per side, a mask of permitted new partners for each vertex (default: everything)

    Returns:
        Number of edges added

    Raises:
        ValueError: some vertex cannot reach the floor
    """
    adj_b = [0] * n_b
    for a in range(n_a):
        for b in iter_bits(adj_a[a]):
            adj_b[b] |= 1 << a
    full = {Side.A: (1 << n_b) - 1, Side.B: (1 << n_a) - 1}
    adj = {Side.A: adj_a, Side.B: adj_b}
    added = 0
    while True:
        lowest = None
        for side, size in ((Side.A, n_a), (Side.B, n_b)):
            for v in range(size):
                degree = adj[side][v].bit_count()
                if degree < floor and (lowest is None or degree < lowest[0]):
                    lowest = (degree, side, v)
        if lowest is None:
            return added
        _, side, v = lowest
        partners = full[side] if allowed is None else allowed[side][v]
        choices = list(iter_bits(partners & ~adj[side][v]))
        if not choices:
            raise ValueError(f"{side.value.lower()}{v} cannot reach degree {floor}")
        u = rng.choice(choices)
        adj[side][v] |= 1 << u
        adj[side.other][u] |= 1 << v
        added += 1


def random_graph(n: int, density: float, min_degree_floor: int = 0, seed: Optional[int] = None) -> BipartiteGraph:
    """
    Random n x n bipartite graph, each edge present with probability density,
    then topped up to the minimum-degree floor.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not 0 <= density <= 1:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    if min_degree_floor < 0 or min_degree_floor > n:
        raise ValueError(f"min_degree_floor must lie in [0, {n}], got {min_degree_floor}")

    rng = random.Random(seed)
    adj_a = [0] * n
    for a in range(n):
        for b in range(n):
            if rng.random() < density:
                adj_a[a] |= 1 << b
    added = raise_min_degree(adj_a, n, n, min_degree_floor, rng)
    g = BipartiteGraph(n, n, adj_a)
    logger.debug(f"Random graph n={n}, density={density}, seed={seed}: {g.edge_count} edges ({added} for the floor)")
    return g


def extremal_instance(s: int, t: int, k: int, a1_size: int, b1_size: int,
                      a0_size: int = 0, b0_size: int = 0,
                      seed: Optional[int] = None) -> Tuple[BipartiteGraph, ExtremalLabeling]:
    """
    Two crossing complete pairs G[A'1, B'2] and G[A'2, B'1] with specials,
    topped up inside G1 = G[A'1, B'1] and G2 = G[A'2, B'2] to the factor threshold.

    A-side layout is A'1, A0, A'2 by index, B-side is B'1, B0, B'2.
    A0 sees all of B'2, the first half of B'1 and all of B0; B0 sees all of
    A'2 and the first half of A'1.

    Returns:
        (graph, the labeling the instance was built from)
    """
    n = k * (s + t)
    a2_size = n - a1_size - a0_size
    b2_size = n - b1_size - b0_size
    if min(a1_size, a0_size, a2_size, b1_size, b0_size, b2_size) < 0:
        raise ValueError(f"Block sizes do not fit n={n}")
    a1, a0, a2 = consecutive_blocks(Side.A, [a1_size, a0_size, a2_size])
    b1, b0, b2 = consecutive_blocks(Side.B, [b1_size, b0_size, b2_size])

    adj_a = [0] * n
    half_b1 = VertexSet.of(Side.B, b1.sorted[:(len(b1) + 1) // 2])
    half_a1 = set(a1.sorted[:(len(a1) + 1) // 2])
    for a in a1:
        adj_a[a] = b2.mask | (b0.mask if a in half_a1 else 0)
    for a in a0:
        adj_a[a] = b2.mask | half_b1.mask | b0.mask
    for a in a2:
        adj_a[a] = b1.mask | b0.mask

    allowed = {Side.A: [0] * n, Side.B: [0] * n}
    for a in range(n):
        allowed[Side.A][a] = b1.mask if a in a1 else b2.mask if a in a2 else (1 << n) - 1
    for b in range(n):
        allowed[Side.B][b] = a1.mask if b in b1 else a2.mask if b in b2 else (1 << n) - 1

    rng = random.Random(seed)
    added = raise_min_degree(adj_a, n, n, threshold(s, t, k), rng, allowed)
    g = BipartiteGraph(n, n, adj_a)
    lab = ExtremalLabeling(a1, a2, a0, b1, b2, b0, alpha=TilerConfig().alpha, base_pair=(a1, b1))
    logger.debug(f"Extremal instance n={n} sizes {lab.sizes()}, {added} sparse edges added")
    return g, lab
