"""
Tests for the planar map component: validation, duality, codes, the
exchange format, enumeration oracles and weights.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.blossom.planar_map import (
    BudgetExceeded, Color, MapError, build_map, canonical_code, compose, cycles_of,
    double_dual, dual, enumerate_bipartite_planar_maps, enumerate_bipartite_plane_maps,
    enumerate_doubly_rooted_maps, enumerate_pointed_maps, enumerate_spin_maps,
    enumerate_sphere_bipartite_maps, format_map, invert, parse_map, parse_spin_map,
    random_relabel, two_coloring, unrooted_code, weight,
)


class TestPermutations:

    def test_cycles_start_at_their_least_dart(self):
        assert cycles_of((2, 0, 1, 4, 3)) == [(0, 2, 1), (3, 4)]

    def test_compose_applies_inner_first(self):
        assert compose((1, 2, 0), (0, 2, 1)) == (1, 0, 2)

    @pytest.mark.property_based
    @given(st.permutations(list(range(7))))
    def test_inverse_composes_to_identity(self, perm):
        assert compose(perm, invert(perm)) == tuple(range(7))
        assert compose(invert(perm), perm) == tuple(range(7))


class TestValidation:

    def test_square_faces_and_vertices(self, square_map):
        assert square_map.vertices == ((0, 7), (1, 2), (3, 4), (5, 6))
        assert square_map.faces == ((0, 2, 4, 6), (1, 7, 5, 3))
        assert square_map.colors == (Color.WHITE, Color.BLACK, Color.WHITE, Color.BLACK)
        assert square_map.outer_darts() == (0, 2, 4, 6)

    def test_single_edge(self, single_edge):
        assert (single_edge.num_vertices, single_edge.num_edges, single_edge.num_faces) == (2, 1, 1)
        assert single_edge.color(single_edge.root_vertex) is Color.WHITE

    def test_root_color_is_respected(self):
        m = build_map((0, 1), (1, 0), root_color=Color.BLACK)
        assert m.colors == (Color.BLACK, Color.WHITE)

    def test_alpha_fixed_point_is_rejected(self):
        with pytest.raises(MapError, match="fixed point"):
            build_map((0, 1), (0, 1))

    def test_disconnected_is_rejected(self):
        with pytest.raises(MapError, match="disconnected"):
            build_map((1, 0, 3, 2), (1, 0, 3, 2))

    def test_torus_is_rejected(self):
        with pytest.raises(MapError, match="genus 1"):
            build_map((1, 2, 3, 0), (2, 3, 0, 1))

    def test_improper_coloring_is_rejected(self):
        with pytest.raises(MapError, match="not proper"):
            build_map((0, 1), (1, 0), colors=(Color.WHITE, Color.WHITE))

    def test_loop_has_no_bipartite_coloring(self, loop_map):
        assert loop_map.colors is None
        assert loop_map.num_faces == 2
        with pytest.raises(MapError):
            loop_map.color(0)

    def test_odd_cycle_has_no_bipartite_coloring(self):
        triangle = build_map((5, 2, 1, 4, 3, 0), (1, 0, 3, 2, 5, 4))
        assert (triangle.num_vertices, triangle.num_faces) == (3, 2)
        assert triangle.colors is None
        assert two_coloring(triangle) is None

    def test_two_coloring_follows_the_root(self, path_map):
        colors = two_coloring(path_map, Color.BLACK)
        assert colors[path_map.root_vertex] is Color.BLACK
        assert all(colors[path_map.vertex_of[h]] is not colors[path_map.vertex_of[g]] for h, g in path_map.edges())


class TestDuality:

    def test_dual_of_square(self, square_map):
        d = dual(square_map)
        assert d.underlying.num_vertices == square_map.num_faces
        assert d.underlying.num_faces == square_map.num_vertices
        assert d.pointed == square_map.outer_face
        assert d.canonical_darts == frozenset({0, 7, 3, 4})

    def test_canonical_arcs_follow_white_darts(self, square_map):
        arcs = dual(square_map).canonical_arcs()
        assert [(tail, head) for tail, head, _ in arcs] == [(0, 1), (1, 0), (0, 1), (1, 0)]

    def test_double_dual_is_the_same_sphere_map(self, square_map, path_map):
        for m in (square_map, path_map):
            back = double_dual(m)
            assert unrooted_code(back) == unrooted_code(m)
            assert back.num_faces == m.num_faces


class TestCodesAndFormat:

    def test_format_is_one_based(self, single_edge):
        assert format_map(single_edge) == "darts 2\nsigma 1 2\nalpha 2 1\nroot 1 outer 1\ncolors w b"

    def test_parse_gives_the_map_back(self, square_map):
        assert parse_map(format_map(square_map)) == square_map

    def test_spins_line(self):
        maps = enumerate_spin_maps(n_vertices=1, degree=4)
        m, spins = maps[0]
        parsed, parsed_spins = parse_spin_map(format_map(m, spins))
        assert parsed_spins == spins

    def test_marked_face_changes_the_code(self, square_map):
        other = build_map(square_map.sigma, square_map.alpha, 0, 1)
        assert canonical_code(other) != canonical_code(square_map)
        assert canonical_code(other, marked=False) == canonical_code(square_map, marked=False)

    @pytest.mark.property_based
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_codes_ignore_dart_names(self, seed):
        rng = np.random.default_rng(seed)
        for m in enumerate_bipartite_plane_maps(3):
            assert canonical_code(random_relabel(m, rng)) == canonical_code(m)


class TestEnumeration:

    @pytest.mark.parametrize("n_edges,expected", [(1, 1), (2, 3), (3, 12), (4, 56)])
    def test_rooted_planar_counts(self, n_edges, expected):
        assert len(enumerate_bipartite_planar_maps(n_edges)) == expected

    def test_plane_maps_with_two_edges(self):
        # two paths with one face each, and the double edge with either face marked
        assert len(enumerate_bipartite_plane_maps(2)) == 4

    def test_sphere_maps_with_two_edges(self):
        assert len(enumerate_sphere_bipartite_maps(2)) == 2

    def test_white_degree_filter(self):
        maps = enumerate_bipartite_plane_maps(2, max_white_degree=1)
        assert all(m.degree(v) <= 1 for m in maps for v in range(m.num_vertices)
                   if m.color(v) is Color.WHITE)
        assert len(maps) == 1

    def test_pointed_maps_skip_the_root_vertex(self):
        pointed = enumerate_pointed_maps(2)
        assert all(tau != m.root_vertex for m, tau in pointed)
        # path rooted at a leaf: 2 targets; path rooted at its middle: 2; double edge: 1
        assert len(pointed) == 5

    def test_doubly_rooted_with_one_edge(self):
        assert len(enumerate_doubly_rooted_maps(1, "wb")) == 1
        assert enumerate_doubly_rooted_maps(1, "ww") == []

    def test_quartic_spin_maps_with_one_vertex(self):
        spin_maps = enumerate_spin_maps(n_vertices=1, degree=4)
        assert len(spin_maps) == 4
        assert all(s.mono_count == 2 for _, s in spin_maps)

    def test_budget_is_enforced(self):
        with pytest.raises(BudgetExceeded):
            enumerate_bipartite_plane_maps(7)


class TestWeights:

    def test_planar_and_plane_weights(self, single_edge):
        assert weight(single_edge, "planar") == {"u": 1, "x1": 1, "y1": 1}
        assert weight(single_edge, "plane") == {"x1": 1, "y1": 1}

    def test_square_weight_counts_chains(self, path_map):
        # the black middle vertex is one chain of one square
        assert weight(path_map, "square", squares=[1]) == {"t": 1, "nu": 1, "u": 1, "x1": 2}

    def test_ising_weight(self):
        m, spins = enumerate_spin_maps(n_vertices=1, degree=4)[0]
        monomial = weight(m, "ising", spins)
        assert monomial["t"] == 2 and monomial["nu"] == 2 and monomial["u"] == 3

    def test_unknown_scheme(self, single_edge):
        with pytest.raises(ValueError, match="Unknown weight scheme"):
            weight(single_edge, "toric")
