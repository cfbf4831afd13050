"""
Tests for the orientation component: alpha_d targets, minimality, flows,
cuts and the trumpet/cornet classification.
"""

import pytest
from hypothesis import given, settings, strategies as st

from src.blossom.orientation import (
    FractionalOrientation, OrientationError, OutdegreeTarget, TargetKind, Tightness,
    all_alpha_orientations, alpha_dk_orientation, check_target, classify_tightness,
    enumerate_cuts, find_counterclockwise_cycle, format_orientation, initial_alpha_d,
    is_accessible, min_cut, minimal_alpha_d, orientation_from_record, outdegrees,
    quasi_eulerian_minimal, saturated_edges, tightness_by_flow,
)
from src.blossom.planar_map import Color, enumerate_bipartite_plane_maps, enumerate_pointed_maps, parse_record


def _max_white(m):
    return max([m.degree(v) for v in range(m.num_vertices) if m.color(v) is Color.WHITE] + [1])


class TestAlphaD:

    def test_initial_orientation(self, square_map):
        o = initial_alpha_d(square_map, 2)
        assert o.k == 3
        assert o.values == (1, 2, 2, 1, 1, 2, 2, 1)
        check_target(square_map, o, OutdegreeTarget(TargetKind.ALPHA_D, 2))

    def test_minimal_on_square(self, square_map):
        o = minimal_alpha_d(square_map, 2)
        assert o.values == (0, 3, 1, 2, 0, 3, 1, 2)
        assert find_counterclockwise_cycle(square_map, o) is None
        assert is_accessible(square_map, o)
        assert saturated_edges(square_map, o) == {(1, 0), (5, 4)}

    def test_initial_square_has_a_counterclockwise_cycle(self, square_map):
        assert find_counterclockwise_cycle(square_map, initial_alpha_d(square_map, 2)) is not None

    def test_d_must_be_positive(self, square_map):
        with pytest.raises(OrientationError):
            initial_alpha_d(square_map, 0)

    def test_alpha_d_needs_a_bipartite_map(self, loop_map):
        with pytest.raises(OrientationError, match="bipartite"):
            initial_alpha_d(loop_map, 1)

    def test_outdegree_mismatch_is_reported(self, single_edge):
        with pytest.raises(OrientationError, match="outdegree"):
            check_target(single_edge, FractionalOrientation(2, (0, 2)),
                         OutdegreeTarget(TargetKind.ALPHA_D, 1))

    @pytest.mark.slow
    @pytest.mark.parametrize("extra", [0, 1, 2])
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4])
    def test_minimal_is_unique_among_all(self, n_edges, extra):
        """Exactly one alpha_d orientation has no counterclockwise cycle."""
        for m in enumerate_bipartite_plane_maps(n_edges):
            d = _max_white(m) + extra
            target = OutdegreeTarget(TargetKind.ALPHA_D, d)
            minimal = [o for o in all_alpha_orientations(m, target)
                       if find_counterclockwise_cycle(m, o) is None]
            assert minimal == [minimal_alpha_d(m, d)]

    @pytest.mark.property_based
    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=3))
    @settings(max_examples=20, deadline=None)
    def test_minimal_meets_its_target(self, n_edges, extra):
        for m in enumerate_bipartite_plane_maps(n_edges):
            d = _max_white(m) + extra
            o = minimal_alpha_d(m, d)
            check_target(m, o, OutdegreeTarget(TargetKind.ALPHA_D, d))
            assert is_accessible(m, o)

    @pytest.mark.slow
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4])
    def test_minimal_is_stable_in_d(self, n_edges):
        for m in enumerate_bipartite_plane_maps(n_edges):
            low = _max_white(m)
            small, large = minimal_alpha_d(m, low), minimal_alpha_d(m, low + 2)
            for h in range(m.num_darts):
                if m.dart_color(h) is Color.WHITE:
                    assert large[h] == small[h]
                else:
                    assert large[h] == small[h] + 2

    @pytest.mark.slow
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4])
    def test_saturated_edges_run_black_to_white(self, n_edges):
        for m in enumerate_bipartite_plane_maps(n_edges):
            for extra in (0, 1):
                o = minimal_alpha_d(m, _max_white(m) + extra)
                assert all(m.dart_color(tail) is Color.BLACK for tail, _ in saturated_edges(m, o))

    def test_quasi_eulerian_on_a_loop(self, loop_map):
        o = quasi_eulerian_minimal(loop_map)
        assert o == FractionalOrientation(2, (0, 2))
        assert outdegrees(loop_map, o) == [2]

    def test_exchange_format(self, square_map):
        o = minimal_alpha_d(square_map, 2)
        assert format_orientation(o) == "orient k 3\nvalues 0 3 1 2 0 3 1 2"
        assert orientation_from_record(parse_record(format_orientation(o))) == o


class TestCutsAndFlows:

    def test_cuts_of_the_path(self, path_map):
        cuts = enumerate_cuts(path_map, 2)
        assert sorted(c.weight for c in cuts) == [1, 1]
        assert {c.color for c in cuts} == {Color.WHITE, Color.BLACK}

    def test_unique_white_min_cut(self, path_map):
        best = min_cut(path_map, 2, Color.WHITE)
        assert best.unique
        assert best.cut.S == frozenset({2})

    def test_cornet_by_cuts_and_flows(self, path_map):
        assert classify_tightness(path_map, 2).verdict is Tightness.CORNET
        assert tightness_by_flow(path_map, 2, 2) is Tightness.CORNET

    def test_trumpet_by_cuts_and_flows(self, single_edge):
        assert classify_tightness(single_edge, 1).verdict is Tightness.TRUMPET
        assert tightness_by_flow(single_edge, 1, 1) is Tightness.TRUMPET

    def test_alpha_dk_minus_on_single_edge(self, single_edge):
        o = alpha_dk_orientation(single_edge, 1, 1, 1, "minus")
        assert o == FractionalOrientation(2, (0, 2))

    def test_tau_must_differ_from_root(self, path_map):
        with pytest.raises(OrientationError, match="tau"):
            classify_tightness(path_map, 0)

    def test_degree_of_tau_must_be_k(self, path_map):
        with pytest.raises(OrientationError, match="k=2"):
            alpha_dk_orientation(path_map, 2, 2, 2)

    @pytest.mark.slow
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4])
    def test_cut_and_flow_verdicts_agree(self, n_edges):
        for m in enumerate_bipartite_plane_maps(n_edges):
            for tau in range(m.num_vertices):
                if tau == m.root_vertex:
                    continue
                d = max(m.degree(v) for v in range(m.num_vertices))
                assert classify_tightness(m, tau).verdict is tightness_by_flow(m, tau, d)

    @pytest.mark.slow
    @pytest.mark.parametrize("n_edges", [1, 2, 3, 4])
    def test_cornets_carry_quasi_accessible_plus_orientations(self, n_edges):
        for m, tau in enumerate_pointed_maps(n_edges, Color.WHITE, Color.WHITE):
            if classify_tightness(m, tau).verdict is not Tightness.CORNET:
                continue
            d = max(m.degree(v) for v in range(m.num_vertices))
            o = alpha_dk_orientation(m, tau, d, m.degree(tau), "plus")
            assert o is not None
            check_target(m, o, OutdegreeTarget(TargetKind.ALPHA_DK_PLUS, d, m.degree(tau), m.root_vertex, tau))
            assert is_accessible(m, o, except_vertex=tau)
