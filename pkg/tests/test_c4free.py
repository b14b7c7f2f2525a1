"""
Tests for Sidon sets and the C4-free gadgets.
"""

import itertools

import pytest

from core.bigraph import Side
from core.c4free import (
    GadgetKind,
    GadgetSpec,
    _search_sidon,
    build_P,
    build_Q,
    build_R,
    find_disjoint_pair,
    sidon_bound,
    sidon_set,
)
from core.errors import GadgetError


def gadget_cases():
    for p in range(0, 5):
        for m in range(sidon_bound(p), sidon_bound(p) + 5):
            yield p, m
    # moduli where the greedy scan alone gets stuck
    yield from [(8, 73), (8, 74), (9, 91)]


def degrees(g, side):
    return [mask.bit_count() for mask in g.adjacency(side)]


class TestSidonSet:
    @pytest.mark.parametrize("size,modulus", [(2, 7), (3, 13), (4, 21), (4, 30), (5, 31)])
    def test_differences_distinct(self, size, modulus):
        shifts = sidon_set(size, modulus)
        assert len(shifts) == size
        diffs = [(x - y) % modulus for x, y in itertools.permutations(shifts, 2)]
        assert len(diffs) == len(set(diffs))

    def test_greedy_is_smallest_first(self):
        assert sidon_set(4, 21) == [0, 1, 3, 7]

    @pytest.mark.parametrize("size", range(1, 11))
    def test_every_modulus_from_bound(self, size):
        for modulus in range(sidon_bound(size), sidon_bound(size) + 200):
            shifts = sidon_set(size, modulus)
            assert len(shifts) == size, modulus
            diffs = [(x - y) % modulus for x, y in itertools.permutations(shifts, 2)]
            assert len(diffs) == len(set(diffs)), modulus

    @pytest.mark.parametrize("size,modulus", [(8, 73), (8, 74), (9, 91), (9, 107)])
    def test_greedy_dead_ends_recovered(self, size, modulus):
        shifts = sidon_set(size, modulus)
        diffs = [(x - y) % modulus for x, y in itertools.permutations(shifts, 2)]
        assert len(diffs) == len(set(diffs)) == size * (size - 1)

    def test_backtracking_search(self):
        shifts = _search_sidon(4, 13)
        diffs = [(x - y) % 13 for x, y in itertools.permutations(shifts, 2)]
        assert sorted(diffs) == list(range(1, 13))
        # 12 differences cannot be distinct among 11 nonzero residues
        assert _search_sidon(4, 12) is None

    def test_too_small_modulus(self):
        with pytest.raises(GadgetError, match="size\\^2\\+size\\+1"):
            sidon_set(4, 6)

    def test_size_exceeding_modulus(self):
        with pytest.raises(GadgetError):
            sidon_set(5, 3)


class TestGadgets:
    @pytest.mark.parametrize("p,m", list(gadget_cases()))
    def test_P_regular_and_c4_free(self, p, m):
        g = build_P(m, p)
        assert (g.n_a, g.n_b) == (m, m)
        assert set(degrees(g, Side.A)) == {p}
        assert set(degrees(g, Side.B)) == {p}
        assert g.is_k22_free()

    @pytest.mark.parametrize("q,m", [(q, m) for q, m in gadget_cases() if m >= 2])
    def test_Q_degree_lists(self, q, m):
        g = build_Q(m, q)
        assert (g.n_a, g.n_b) == (m, m - 2)
        assert set(degrees(g, Side.B)) <= {q}
        assert set(degrees(g, Side.A)) <= {q - 1, q}
        # two deleted B-vertices of degree q each, no shared neighbour
        assert degrees(g, Side.A).count(q - 1) == (2 * q if q else 0)
        assert g.is_k22_free()

    @pytest.mark.parametrize("q,m", list(gadget_cases()))
    def test_R_degree_lists(self, q, m):
        g = build_R(m, q)
        assert (g.n_a, g.n_b) == (m, m - 1)
        assert set(degrees(g, Side.B)) <= {q}
        assert degrees(g, Side.A).count(q - 1) == q
        assert degrees(g, Side.A).count(q) == m - q
        assert g.is_k22_free()

    def test_P_7_3_has_21_edges(self):
        assert build_P(7, 3).edge_count == 21

    def test_disjoint_pair_is_lexicographic(self):
        g = build_P(7, 2)
        w1, w2 = find_disjoint_pair(g)
        assert not g.adjacency(Side.B)[w1] & g.adjacency(Side.B)[w2]
        for x, y in itertools.combinations(range(g.n_b), 2):
            if (x, y) == (w1, w2):
                break
            assert g.adjacency(Side.B)[x] & g.adjacency(Side.B)[y]

    def test_gadget_build_dispatch(self):
        assert GadgetSpec(GadgetKind.Q, 7, 2).build() == build_Q(7, 2)

    def test_invalid_parameters(self):
        with pytest.raises(GadgetError):
            build_P(0, 1)
        with pytest.raises(GadgetError):
            build_Q(1, 0)
        with pytest.raises(GadgetError):
            build_R(0, 0)
