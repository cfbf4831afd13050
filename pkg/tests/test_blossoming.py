"""
Tests for the blossoming component: charges, tree generation, orientation
of trees, closure, opening and the trumpet/cornet decomposition.
"""

from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from src.blossom.blossoming import (
    ChargeError, OpeningMismatch, StemKind, blossoming_code, blossoming_from_record, charge,
    closure, complete_closure, decompose_doubly_rooted, enumerate_well_charged_trees, forget_orientation,
    format_blossoming, glue, is_well_charged, match_stems, materialize, open_blossoming, open_pointed,
    opening, orient_tree, tree_weight,
)
from src.blossom.orientation import Tightness, classify_tightness, initial_alpha_d, minimal_alpha_d
from src.blossom.planar_map import (
    Color, DegreeProfile, canonical_code, enumerate_bipartite_plane_maps, enumerate_doubly_rooted_maps,
    enumerate_pointed_maps, parse_record,
)

O, C = StemKind.OPENING, StemKind.CLOSING


class TestMatching:

    @pytest.mark.parametrize("kinds,pairs,unmatched", [
        ([O, C], [(0, 1)], []),
        ([C, O], [(1, 0)], []),
        ([O, O, C], [(1, 2)], [0]),
        ([C, C, O, O], [(2, 1), (3, 0)], []),
        ([C, O, C], [(1, 2)], [0]),
    ])
    def test_cyclic_matching(self, kinds, pairs, unmatched):
        assert match_stems(kinds) == (pairs, unmatched)

    @pytest.mark.property_based
    @given(st.lists(st.sampled_from([O, C]), max_size=12))
    def test_leftovers_are_all_one_kind(self, kinds):
        pairs, unmatched = match_stems(kinds)
        openings = kinds.count(O)
        assert len(pairs) == min(openings, len(kinds) - openings)
        assert len(unmatched) == abs(2 * openings - len(kinds))
        assert len({kinds[i] for i in unmatched}) <= 1
        assert all(kinds[i] is O and kinds[j] is C for i, j in pairs)


class TestCharge:

    def test_double_edge_tree(self, double_edge_tree):
        assert double_edge_tree.charge() == 0
        assert double_edge_tree.is_tree()
        assert is_well_charged(double_edge_tree).ok
        assert charge(double_edge_tree).per_vertex == {0: 0, 1: -1}
        assert tree_weight(double_edge_tree) == {"u": 1, "x2": 1, "y2": 1}

    def test_white_vertex_with_an_opening_stem(self):
        witness = is_well_charged(materialize((O,), Color.WHITE))
        assert not witness.ok
        assert "opening stem" in witness.violations[0][1]


class TestGeneration:

    def test_charge_zero_up_to_two_edges(self):
        # vertex map, single edge, two paths, and the double edge twice
        assert len(enumerate_well_charged_trees(0, 2)) == 6

    def test_single_stem_tree(self):
        trees = enumerate_well_charged_trees(1, 1)
        assert len(trees) == 1
        assert trees[0].stems == (C,)

    @pytest.mark.slow
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4, 5])
    def test_closure_hits_every_plane_map_once(self, n_edges):
        closed = [closure(t).to_plane_map() for t in enumerate_well_charged_trees(0, n_edges)]
        codes = [canonical_code(m) for m in closed]
        by_profile = Counter((m.num_edges, DegreeProfile.of(m)) for m in closed)
        maps = [m for n in range(n_edges + 1) for m in enumerate_bipartite_plane_maps(n)]
        assert by_profile == Counter((m.num_edges, DegreeProfile.of(m)) for m in maps)
        assert len(codes) == len(set(codes))
        assert set(codes) == {canonical_code(m) for m in maps}

    @pytest.mark.property_based
    @given(st.integers(min_value=0, max_value=4), st.integers(min_value=-2, max_value=2))
    @settings(max_examples=25, deadline=None)
    def test_generated_trees_are_well_charged(self, n_edges, k):
        for tree in enumerate_well_charged_trees(k, n_edges):
            assert tree.charge() == k
            assert is_well_charged(tree).ok


class TestOrientation:

    def test_orient_double_edge_tree(self, double_edge_tree):
        oriented = orient_tree(double_edge_tree, 2)
        assert oriented.k == 3
        assert oriented.values == (0, 2, 1, 3)

    def test_single_closing_stem_orients_at_d_one(self, single_edge):
        oriented = orient_tree(materialize((C,), Color.WHITE), 1)
        assert oriented.values == (0,)
        assert oriented.k == 2
        m, tau = complete_closure(forget_orientation(oriented))
        assert canonical_code(m, marked=False, pointed=tau) == canonical_code(
            single_edge, marked=False, pointed=1)
        opened = open_pointed(single_edge, 1, 1)
        assert blossoming_code(opened, with_values=False) == blossoming_code(oriented, with_values=False)

    def test_single_opening_stem_orients_at_d_one(self):
        oriented = orient_tree(materialize((O,), Color.BLACK), 1)
        assert oriented.values == (2,)
        m, tau = complete_closure(forget_orientation(oriented))
        assert m.num_edges == 1
        assert m.color(tau) is Color.WHITE

    @pytest.mark.parametrize("kind,color", [(C, Color.BLACK), (O, Color.WHITE)])
    def test_excluded_single_stem_trees_are_refused(self, kind, color):
        with pytest.raises(ChargeError, match="well-charged"):
            orient_tree(materialize((kind,), color), 1)

    def test_not_well_charged_tree_is_refused(self):
        with pytest.raises(ChargeError, match="well-charged"):
            orient_tree(materialize((O,), Color.WHITE), 2)


class TestClosureAndOpening:

    def test_closure_of_double_edge_tree(self, double_edge_tree):
        closed = closure(orient_tree(double_edge_tree, 2))
        assert closed.alpha == (3, 2, 1, 0)
        assert not closed.stem_darts()
        m = closed.to_plane_map()
        assert (m.num_vertices, m.num_edges, m.num_faces) == (2, 2, 2)
        assert closed.orientation() == minimal_alpha_d(m, 2)

    def test_opening_inverts_closure(self, double_edge_tree):
        oriented = orient_tree(double_edge_tree, 2)
        closed = closure(oriented)
        assert open_blossoming(closed) == oriented
        assert opening(closed.to_plane_map(), closed.orientation()) == oriented

    def test_opening_needs_the_minimal_orientation(self, square_map):
        with pytest.raises(OpeningMismatch, match="2 faces remain"):
            opening(square_map, initial_alpha_d(square_map, 2))

    def test_exchange_format(self, double_edge_tree):
        oriented = orient_tree(double_edge_tree, 2)
        text = format_blossoming(oriented)
        assert "stems C - - O" in text
        assert blossoming_from_record(parse_record(text)) == oriented

    @pytest.mark.slow
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4, 5])
    def test_map_round_trip(self, n_edges):
        for m in enumerate_bipartite_plane_maps(n_edges):
            d = max(m.degree(v) for v in range(m.num_vertices))
            tree = opening(m, minimal_alpha_d(m, d))
            assert tree.is_tree()
            assert canonical_code(closure(tree).to_plane_map()) == canonical_code(m)

    @pytest.mark.slow
    @pytest.mark.parametrize("extra", [0, 1])
    def test_tree_round_trip(self, extra):
        for tree in enumerate_well_charged_trees(0, 6):
            delta = max([tree.degree(v) for v in range(len(tree.vertices))] + [1])
            oriented = orient_tree(tree, delta + extra)
            assert blossoming_code(open_blossoming(closure(oriented))) == blossoming_code(oriented)


class TestPointedMaps:

    def test_complete_closure_of_single_stem(self):
        m, tau = complete_closure(materialize((C,), Color.WHITE))
        assert m.num_edges == 1
        assert m.color(tau) is Color.BLACK
        assert classify_tightness(m, tau).verdict is Tightness.TRUMPET

    def test_complete_closure_needs_charge(self, double_edge_tree):
        with pytest.raises(ChargeError):
            complete_closure(double_edge_tree)

    def test_open_pointed_single_edge(self, single_edge):
        tree = open_pointed(single_edge, 1, 1)
        assert tree.stems == (C,)
        assert tree.charge() == 1

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("sign,tau_color,verdict", [
        (1, Color.BLACK, Tightness.TRUMPET),
        (-1, Color.WHITE, Tightness.CORNET),
    ])
    def test_complete_closure_counts_match_pointed_maps(self, k, sign, tau_color, verdict):
        closed = [complete_closure(t) for t in enumerate_well_charged_trees(sign * k, 4, root_color=Color.WHITE)]
        tight = [(m, tau) for n in range(1, 5) for m, tau in enumerate_pointed_maps(n, Color.WHITE, tau_color)
                 if m.degree(tau) == k and classify_tightness(m, tau).verdict is verdict]
        assert Counter((m.num_edges, DegreeProfile.of(m, skip=[tau])) for m, tau in closed) == Counter(
            (m.num_edges, DegreeProfile.of(m, skip=[tau])) for m, tau in tight)
        codes = [canonical_code(m, marked=False, pointed=tau) for m, tau in closed]
        assert len(codes) == len(set(codes))
        assert set(codes) == {canonical_code(m, marked=False, pointed=tau) for m, tau in tight}


class TestDoublyRooted:

    @staticmethod
    def _pair_code(pair):
        (m1, tau1), (m2, tau2) = pair
        return (canonical_code(m1, marked=False, pointed=tau1),
                canonical_code(m2, marked=False, pointed=tau2))

    @pytest.mark.slow
    @pytest.mark.parametrize("colors", ["ww", "wb", "bb"])
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4])
    def test_decomposition_is_k_to_one(self, colors, n_edges):
        doubly = enumerate_doubly_rooted_maps(n_edges, colors)
        codes = {canonical_code(m, marked=False, second_root=r2) for m, r2 in doubly}
        fibers = {}
        for m, r2 in doubly:
            pair = decompose_doubly_rooted(m, m.root_dart, r2)
            trumpet, cornet = pair
            k = trumpet[0].degree(trumpet[1])
            glued = [glue(trumpet, cornet, r) for r in range(k)]
            glued_codes = {canonical_code(g, marked=False, second_root=s) for g, s in glued}
            assert canonical_code(m, marked=False, second_root=r2) in glued_codes
            assert len(glued_codes) == k
            assert glued_codes <= codes
            for g, s in glued:
                assert self._pair_code(decompose_doubly_rooted(g, g.root_dart, s)) == self._pair_code(pair)
            fibers[self._pair_code(pair)] = k
        assert sum(fibers.values()) == len(doubly)
