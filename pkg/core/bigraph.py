"""
Bipartite graph representation.
Adjacency is kept as one integer bitmask per vertex, for both color classes.
All degree, density and neighbourhood statistics derive from it.
"""

import sys
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, List, Sequence, Tuple

import networkx as nx

from core.errors import GraphError

# delta_between over an empty source set
INFINITE_DEGREE = sys.maxsize


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of mask in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


class Side(str, Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "Side":
        return Side.B if self is Side.A else Side.A


@dataclass(frozen=True, order=True)
class VertexRef:
    side: Side
    index: int

    def __str__(self) -> str:
        return f"{self.side.value.lower()}{self.index}"


@dataclass(frozen=True)
class VertexSet:
    """Index set inside one color class."""

    side: Side
    members: frozenset

    @classmethod
    def of(cls, side: Side, indices: Iterable[int] = ()) -> "VertexSet":
        return cls(side, frozenset(indices))

    @classmethod
    def from_mask(cls, side: Side, mask: int) -> "VertexSet":
        return cls(side, frozenset(iter_bits(mask)))

    @cached_property
    def mask(self) -> int:
        return mask_of(self.members)

    @property
    def sorted(self) -> List[int]:
        return sorted(self.members)

    def refs(self) -> List[VertexRef]:
        return [VertexRef(self.side, i) for i in self.sorted]

    def union(self, other: "VertexSet") -> "VertexSet":
        self._same_side(other)
        return VertexSet(self.side, self.members | other.members)

    def difference(self, other: "VertexSet") -> "VertexSet":
        self._same_side(other)
        return VertexSet(self.side, self.members - other.members)

    def isdisjoint(self, other: "VertexSet") -> bool:
        return self.side != other.side or self.members.isdisjoint(other.members)

    def _same_side(self, other: "VertexSet"):
        if self.side != other.side:
            raise GraphError(f"Cannot combine sets on sides {self.side.value} and {other.side.value}")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.sorted)

    def __contains__(self, index: object) -> bool:
        return index in self.members


@dataclass(frozen=True)
class InducedSubgraph:
    """Result of BipartiteGraph.induced: the subgraph and maps back to the parent."""

    graph: "BipartiteGraph"
    a_index: Tuple[int, ...]
    b_index: Tuple[int, ...]


class BipartiteGraph:
    """Immutable bipartite graph G=(A,B;E) with bitset adjacency."""

    def __init__(self, n_a: int, n_b: int, adj_a: Sequence[int]):
        """
        Build a graph from A-side adjacency masks.

        Args:
            n_a: Number of vertices in class A
            n_b: Number of vertices in class B
            adj_a: For each A-vertex, bitmask of its B-neighbours
        """
        if n_a < 0 or n_b < 0:
            raise GraphError(f"Class sizes must be non-negative, got {n_a}, {n_b}")
        if len(adj_a) != n_a:
            raise GraphError(f"Expected {n_a} adjacency masks, got {len(adj_a)}")

        limit = 1 << n_b
        adj_b = [0] * n_b
        for a, mask in enumerate(adj_a):
            if mask < 0 or mask >= limit:
                raise GraphError(f"Adjacency of a{a} references vertices outside B")
            for b in iter_bits(mask):
                adj_b[b] |= 1 << a

        self.n_a = n_a
        self.n_b = n_b
        self._adj = {Side.A: tuple(adj_a), Side.B: tuple(adj_b)}

    # ------------------------------------------------------------------
    # Builders
    # ------------------------------------------------------------------

    @classmethod
    def from_edges(cls, n_a: int, n_b: int, edges: Iterable[Tuple[int, int]]) -> "BipartiteGraph":
        adj = [0] * n_a
        for a, b in edges:
            if not (0 <= a < n_a and 0 <= b < n_b):
                raise GraphError(f"Edge ({a}, {b}) out of range for {n_a}x{n_b} graph")
            adj[a] |= 1 << b
        return cls(n_a, n_b, adj)

    @classmethod
    def complete(cls, n_a: int, n_b: int) -> "BipartiteGraph":
        return cls(n_a, n_b, [(1 << n_b) - 1] * n_a)

    @classmethod
    def empty(cls, n_a: int, n_b: int) -> "BipartiteGraph":
        return cls(n_a, n_b, [0] * n_a)

    def with_edges(self, added: Iterable[Tuple[int, int]] = (),
                   removed: Iterable[Tuple[int, int]] = ()) -> "BipartiteGraph":
        """Return a copy with edges added and removed."""
        adj = list(self._adj[Side.A])
        for a, b in added:
            adj[a] |= 1 << b
        for a, b in removed:
            adj[a] &= ~(1 << b)
        return BipartiteGraph(self.n_a, self.n_b, adj)

    # ------------------------------------------------------------------
    # Basic accessors
    # ------------------------------------------------------------------

    @property
    def n(self) -> int:
        """Common class size of a balanced graph."""
        if self.n_a != self.n_b:
            raise GraphError(f"Graph is not balanced ({self.n_a} vs {self.n_b})")
        return self.n_a

    @property
    def is_balanced(self) -> bool:
        return self.n_a == self.n_b

    def size(self, side: Side) -> int:
        return self.n_a if side is Side.A else self.n_b

    def adjacency(self, side: Side) -> Tuple[int, ...]:
        return self._adj[side]

    def side_set(self, side: Side) -> VertexSet:
        return VertexSet.of(side, range(self.size(side)))

    def neighbors_mask(self, v: VertexRef) -> int:
        self._check_vertex(v)
        return self._adj[v.side][v.index]

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self._adj[Side.A][a] >> b & 1)

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Yield edges (a, b) sorted lexicographically."""
        for a, mask in enumerate(self._adj[Side.A]):
            for b in iter_bits(mask):
                yield a, b

    @cached_property
    def edge_count(self) -> int:
        return sum(mask.bit_count() for mask in self._adj[Side.A])

    def _check_vertex(self, v: VertexRef):
        if not 0 <= v.index < self.size(v.side):
            raise GraphError(f"Vertex {v} out of range (class size {self.size(v.side)})")

    def _check_set(self, s: VertexSet):
        if s.members and (min(s.members) < 0 or max(s.members) >= self.size(s.side)):
            raise GraphError(f"Vertex set on side {s.side.value} has members out of range")

    def _check_opposite(self, x: VertexSet, y: VertexSet):
        self._check_set(x)
        self._check_set(y)
        if x.side == y.side:
            raise GraphError(f"Sets must lie on opposite sides, both are on {x.side.value}")

    # ------------------------------------------------------------------
    # Degree statistics
    # ------------------------------------------------------------------

    def degree(self, v: VertexRef) -> int:
        return self.neighbors_mask(v).bit_count()

    def degree_to(self, v: VertexRef, s: VertexSet) -> int:
        """deg(v, S) for a set S on the opposite side of v."""
        self._check_vertex(v)
        self._check_set(s)
        if s.side == v.side:
            raise GraphError(f"degree_to needs a set opposite to {v}")
        return (self._adj[v.side][v.index] & s.mask).bit_count()

    def min_degree(self) -> int:
        """delta(G) over both classes."""
        masks = self._adj[Side.A] + self._adj[Side.B]
        if not masks:
            raise GraphError("Minimum degree of a graph without vertices is undefined")
        return min(mask.bit_count() for mask in masks)

    def max_degree(self) -> int:
        masks = self._adj[Side.A] + self._adj[Side.B]
        return max((mask.bit_count() for mask in masks), default=0)

    def delta_between(self, x: VertexSet, y: VertexSet) -> int:
        """
        delta(X, Y) = min over v in X of deg(v, Y).

        Returns INFINITE_DEGREE when X is empty.
        """
        self._check_opposite(x, y)
        adj = self._adj[x.side]
        return min(((adj[i] & y.mask).bit_count() for i in x.members), default=INFINITE_DEGREE)

    def Delta_between(self, x: VertexSet, y: VertexSet) -> int:
        """Delta(X, Y) = max over v in X of deg(v, Y); 0 when X is empty."""
        self._check_opposite(x, y)
        adj = self._adj[x.side]
        return max(((adj[i] & y.mask).bit_count() for i in x.members), default=0)

    def edges_between(self, x: VertexSet, y: VertexSet) -> int:
        self._check_opposite(x, y)
        adj = self._adj[x.side]
        return sum((adj[i] & y.mask).bit_count() for i in x.members)

    def density(self, x: VertexSet, y: VertexSet) -> Fraction:
        """d(X, Y) = e(X, Y) / (|X||Y|) as an exact rational."""
        if not x.members or not y.members:
            raise GraphError("Density needs two non-empty sets")
        return Fraction(self.edges_between(x, y), len(x) * len(y))

    # ------------------------------------------------------------------
    # Neighbourhood structure
    # ------------------------------------------------------------------

    def common_neighbors(self, u: VertexRef, v: VertexRef) -> VertexSet:
        if u.side != v.side:
            raise GraphError(f"{u} and {v} lie on different sides")
        if u == v:
            raise GraphError(f"common_neighbors needs two distinct vertices, got {u} twice")
        mask = self.neighbors_mask(u) & self.neighbors_mask(v)
        return VertexSet.from_mask(u.side.other, mask)

    def is_k22_free(self) -> bool:
        """True iff no two same-side vertices share two neighbours."""
        # Checking one side suffices: a K_{2,2} has two vertices on each side.
        side = Side.A if self.n_a <= self.n_b else Side.B
        masks = [m for m in self._adj[side] if m.bit_count() >= 2]
        for u, v in combinations(masks, 2):
            if (u & v).bit_count() >= 2:
                return False
        return True

    def induced(self, x: VertexSet, y: VertexSet) -> InducedSubgraph:
        """
        G[X, Y] with vertices reindexed in ascending order.

        Args:
            x: Subset of A
            y: Subset of B

        Returns:
            InducedSubgraph with the subgraph and index maps back to this graph
        """
        if x.side is not Side.A or y.side is not Side.B:
            raise GraphError("induced expects an A-side set and a B-side set")
        self._check_set(x)
        self._check_set(y)

        a_index = tuple(x.sorted)
        b_index = tuple(y.sorted)
        position = {b: j for j, b in enumerate(b_index)}
        adj = []
        for a in a_index:
            mask = 0
            for b in iter_bits(self._adj[Side.A][a] & y.mask):
                mask |= 1 << position[b]
            adj.append(mask)
        return InducedSubgraph(BipartiteGraph(len(a_index), len(b_index), adj), a_index, b_index)

    # ------------------------------------------------------------------
    # Interop
    # ------------------------------------------------------------------

    def to_networkx(self) -> nx.Graph:
        """Graph with nodes ('A', i) / ('B', j) and the usual bipartite attribute."""
        graph = nx.Graph()
        graph.add_nodes_from((("A", i) for i in range(self.n_a)), bipartite=0)
        graph.add_nodes_from((("B", j) for j in range(self.n_b)), bipartite=1)
        graph.add_edges_from((("A", a), ("B", b)) for a, b in self.edges())
        return graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.n_a, self.n_b, self._adj[Side.A]) == (other.n_a, other.n_b, other._adj[Side.A])

    def __hash__(self) -> int:
        return hash((self.n_a, self.n_b, self._adj[Side.A]))

    def __repr__(self) -> str:
        return f"BipartiteGraph(n_a={self.n_a}, n_b={self.n_b}, edges={self.edge_count})"


def consecutive_blocks(side: Side, sizes: Sequence[int], start: int = 0) -> List[VertexSet]:
    """Split indices start.. into consecutive VertexSets of the given sizes."""
    blocks = []
    offset = start
    for size in sizes:
        blocks.append(VertexSet.of(side, range(offset, offset + size)))
        offset += size
    return blocks

