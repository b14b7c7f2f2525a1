"""
Tests for the lower-bound constructions and their no-factor certificates.
"""

from fractions import Fraction

import pytest

from core.bigraph import BipartiteGraph, Side, VertexSet, consecutive_blocks
from core.errors import ConstructionError
from core.extremal import (
    Case,
    Obstruction,
    ConstructionParams,
    ObstructionKind,
    build_even,
    build_odd_mid,
    build_odd_succ,
    case_for,
    check_obstruction,
    construction_for,
    obstruction_for,
    threshold,
    threshold_kss,
)
from core.solver import Verdict, has_factor

EVEN_CASES = [(1, 2, 2), (1, 2, 4), (2, 3, 2)]
ODD_CASES = [(1, 2, 3), (2, 3, 3), (1, 3, 3), (2, 4, 3)]


class TestThreshold:
    @pytest.mark.parametrize("s,t,k,expected", [
        (1, 2, 2, 3),    # n=6: n/2+s-1
        (1, 2, 3, 5),    # n=9: (n+t+s)/2-1
        (2, 3, 2, 6),    # n=10
        (1, 3, 3, 7),    # n=12
    ])
    def test_values(self, s, t, k, expected):
        assert threshold(s, t, k) == expected

    def test_kss_reference(self):
        assert threshold_kss(2, 4) == 5     # n=8, even
        assert threshold_kss(2, 3) == 4     # n=6, (n+3s)/2-2


class TestParams:
    def test_validation(self):
        with pytest.raises(ConstructionError):
            ConstructionParams(0, 2, 2)
        with pytest.raises(ConstructionError):
            ConstructionParams(2, 2, 2)
        with pytest.raises(ConstructionError):
            ConstructionParams(1, 2, 0)

    def test_case_dispatch(self):
        assert case_for(ConstructionParams(1, 2, 2)) is Case.EVEN
        assert case_for(ConstructionParams(1, 2, 3)) is Case.ODD_SUCC
        assert case_for(ConstructionParams(1, 3, 3)) is Case.ODD_MID
        with pytest.raises(ConstructionError):
            case_for(ConstructionParams(1, 4, 3))

    def test_builders_reject_wrong_parity(self):
        with pytest.raises(ConstructionError):
            build_even(ConstructionParams(1, 2, 3))
        with pytest.raises(ConstructionError):
            build_odd_mid(ConstructionParams(1, 3, 2))
        with pytest.raises(ConstructionError):
            build_odd_succ(ConstructionParams(1, 3, 3))


class TestConstructions:
    @pytest.mark.parametrize("s,t,k", EVEN_CASES + ODD_CASES)
    def test_min_degree_one_below_threshold(self, s, t, k):
        c = construction_for(ConstructionParams(s, t, k))
        assert c.graph.min_degree() == c.claimed_min_degree == threshold(s, t, k) - 1

    @pytest.mark.parametrize("s,t,k", EVEN_CASES + ODD_CASES)
    def test_certificate_holds(self, s, t, k):
        c = construction_for(ConstructionParams(s, t, k))
        assert check_obstruction(c.graph, obstruction_for(c), s, t)

    @pytest.mark.parametrize("s,t,k", [
        case for case in EVEN_CASES + ODD_CASES if case[2] * (case[0] + case[1]) <= 15
    ])
    def test_exact_solver_agrees(self, s, t, k):
        c = construction_for(ConstructionParams(s, t, k))
        assert has_factor(c.graph, s, t).verdict is Verdict.NO_FACTOR

    def test_even_block_sizes(self):
        c = build_even(ConstructionParams(1, 2, 2))
        assert c.graph.n == 6
        assert {name: len(vs) for name, vs in c.blocks.items()} == {"A1": 4, "A2": 2, "B1": 4, "B2": 2}
        assert c.graph.min_degree() == 2

    def test_even_residue(self):
        c = build_even(ConstructionParams(1, 2, 2))
        o = obstruction_for(c)
        assert o.kind is ObstructionKind.DIVISIBILITY_AFTER_UNMIXING
        # |A1| + |B1| = 8 is not a multiple of 3
        assert o.block_data["residue"] == 2


class TestCountingCertificate:
    @pytest.mark.parametrize("s,t,k", [(1, 3, 3), (2, 4, 3)])
    def test_r1_interval(self, s, t, k):
        c = construction_for(ConstructionParams(s, t, k))
        o = obstruction_for(c)
        assert o.kind is ObstructionKind.COUNTING_INTEGRALITY
        big = ((k - 1) // 2) * (s + t)
        assert o.bounds == (Fraction(big + s + 1, s + t), Fraction(big + t - 1, s + t))
        lo, hi = o.bounds
        assert not any(lo <= r <= hi for r in range(int(lo), int(hi) + 2))

    def test_tampered_bounds_rejected(self):
        c = construction_for(ConstructionParams(1, 3, 3))
        o = obstruction_for(c)
        o.bounds = (Fraction(1), Fraction(2))
        assert not check_obstruction(c.graph, o, 1, 3)

    def test_specials_large_enough_to_host_an_s_side(self):
        # s=1, t=3, n=8: A1, A2, A* of sizes 2, 5, 1 on both sides. B* sees A1 and A2,
        # A* sees B1 and B2, A1 x B1 and A2 x B2 complete. The arithmetic looks
        # like a certificate but the graph has a factor.
        a1, a2, a_star = consecutive_blocks(Side.A, [2, 5, 1])
        b1, b2, b_star = consecutive_blocks(Side.B, [2, 5, 1])
        edges = [(a, 7) for a in range(7)] + [(7, b) for b in range(7)]
        edges += [(a, b) for a in a1.sorted for b in b1.sorted]
        edges += [(a, b) for a in a2.sorted for b in b2.sorted]
        g = BipartiteGraph.from_edges(8, 8, edges)
        o = Obstruction(
            kind=ObstructionKind.COUNTING_INTEGRALITY,
            forbidden_pairs=[(a1, b2), (a2, b1)],
            block_data={},
            empty_pairs=[(a_star, b_star)],
            bounds=(Fraction(2, 4), Fraction(3, 4)),
        )
        assert has_factor(g, 1, 3).verdict is Verdict.FOUND
        assert not check_obstruction(g, o, 1, 3)


class TestTampering:
    def test_edge_in_forbidden_pair_breaks_unmixability(self):
        c = build_even(ConstructionParams(1, 2, 2))
        a = c.blocks["A1"].sorted[0]
        b = c.blocks["B2"].sorted[0]
        tampered = c.graph.with_edges(added=[(a, b)])
        assert not check_obstruction(tampered, obstruction_for(c), 1, 2)

    def test_k22_in_forbidden_pair_breaks_unmixability(self):
        c = build_even(ConstructionParams(2, 3, 2))
        a1 = c.blocks["A1"].sorted
        b2 = c.blocks["B2"].sorted
        added = [(a1[0], b2[0]), (a1[0], b2[1]), (a1[1], b2[0]), (a1[1], b2[1])]
        tampered = c.graph.with_edges(added=added)
        assert not check_obstruction(tampered, obstruction_for(c), 2, 3)

    def test_blocks_must_partition(self):
        c = build_even(ConstructionParams(1, 2, 2))
        o = obstruction_for(c)
        shrunk = VertexSet.of(Side.A, c.blocks["A1"].sorted[1:])
        o.forbidden_pairs[0] = (shrunk, c.blocks["B2"])
        assert not check_obstruction(c.graph, o, 1, 2)
