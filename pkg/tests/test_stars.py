"""
Tests for the disjoint star families.
"""

import random
from fractions import Fraction

import pytest

from core.bigraph import BipartiteGraph, Side, VertexSet
from core.errors import StarLemmaError
from core.stars import collect_stars, find_stars, lemma_constant


def shift_matchings(size: int, shifts) -> BipartiteGraph:
    """Union of the matchings i -> i+d (mod size)."""
    return BipartiteGraph.from_edges(size, size, [(i, (i + d) % size) for i in range(size) for d in shifts])


def check_family(g, h, u1, u2, stars_1, stars_2):
    used = {Side.A: set(), Side.B: set()}
    for star, centre_set in [(st, u1) for st in stars_1] + [(st, u2) for st in stars_2]:
        assert star.center.index in centre_set
        assert star.center.side is centre_set.side
        assert len(star.leaves) == h
        for leaf in star.leaves:
            assert g.neighbors_mask(star.center) >> leaf & 1
        members = {star.center.side: {star.center.index}, star.leaves.side: set(star.leaves)}
        for side, vs in members.items():
            assert not used[side] & vs
            used[side] |= vs
    assert used[u1.side] <= set(u1)
    assert used[u2.side] <= set(u2)


class TestLemmaConstant:
    def test_admissible(self):
        # M = 41 balances 1/M against (M - 40)/M
        assert lemma_constant(1, 1, 1, 40, 40) == Fraction(1, 41)
        assert lemma_constant(1, 0, 0, 100, 104) == Fraction(1, 51)

    def test_shifting_M_past_the_midpoint(self):
        # at M = 130 the degree term is exactly 1/13; M = 140 gives 1/14
        assert lemma_constant(1, 10, 10, 130, 130) == Fraction(1, 14)

    def test_too_dense(self):
        assert lemma_constant(1, 5, 5, 40, 40) is None

    def test_unbalanced_classes(self):
        assert lemma_constant(1, 1, 1, 10, 70) is None


class TestFindStars:
    def test_perfect_matching(self):
        g = shift_matchings(40, [0])
        u1, u2 = g.side_set(Side.A), g.side_set(Side.B)
        stars_1, stars_2 = find_stars(1, u1, u2, g)
        assert len(stars_1) >= 2 and len(stars_2) >= 2
        check_family(g, 1, u1, u2, stars_1, stars_2)

    def test_two_regular(self):
        g = shift_matchings(60, [0, 1])
        u1, u2 = g.side_set(Side.A), g.side_set(Side.B)
        stars_1, stars_2 = find_stars(2, u1, u2, g)
        assert len(stars_1) >= 2 and len(stars_2) >= 2
        check_family(g, 2, u1, u2, stars_1, stars_2)

    def test_h_above_min_degree(self):
        g = shift_matchings(40, [0])
        with pytest.raises(StarLemmaError):
            find_stars(2, g.side_set(Side.A), g.side_set(Side.B), g)

    def test_same_side(self):
        g = shift_matchings(40, [0])
        with pytest.raises(StarLemmaError):
            find_stars(1, g.side_set(Side.A), g.side_set(Side.A), g)

    def test_dense_graph_violates_hypotheses(self):
        g = BipartiteGraph.complete(20, 20)
        with pytest.raises(StarLemmaError):
            find_stars(1, g.side_set(Side.A), g.side_set(Side.B), g)

    @pytest.mark.parametrize("h", [1, 2, 3])
    def test_seeded_instances(self, h):
        rng = random.Random(1000 + h)
        checked = 0
        while checked < 100:
            size = rng.randint(50, 200)
            top = (size - 1) // (6 * h + 7)
            if top < h:
                continue
            degree = rng.randint(h, top)
            shifts = rng.sample(range(size), degree)
            g = shift_matchings(size, shifts)
            u1, u2 = g.side_set(Side.A), g.side_set(Side.B)
            stars_1, stars_2 = find_stars(h, u1, u2, g)
            need = 2 * (degree - h + 1)
            assert len(stars_1) >= need and len(stars_2) >= need
            check_family(g, h, u1, u2, stars_1, stars_2)
            checked += 1


class TestCollectStars:
    def test_blocked_vertices_unused(self):
        g = shift_matchings(10, [0, 1])
        u1, u2 = g.side_set(Side.A), g.side_set(Side.B)
        stars_1, stars_2 = collect_stars(g, 1, u1, u2, 3, 3, blocked=(0b11, 0b1))
        for star in stars_1:
            assert star.center.index not in (0, 1)
            assert 0 not in star.leaves
        for star in stars_2:
            assert star.center.index != 0
            assert not {0, 1} & set(star.leaves)

    def test_may_fall_short(self):
        g = BipartiteGraph.from_edges(3, 3, [(0, 0)])
        stars_1, stars_2 = collect_stars(g, 1, g.side_set(Side.A), g.side_set(Side.B), 2, 2)
        assert len(stars_1) + len(stars_2) == 1

    def test_subsets(self):
        g = shift_matchings(12, [0, 1])
        u1 = VertexSet.of(Side.A, range(6))
        u2 = VertexSet.of(Side.B, range(6, 12))
        stars_1, stars_2 = collect_stars(g, 1, u1, u2, 1, 1)
        check_family(g, 1, u1, u2, stars_1, stars_2)
