"""
Tests for the series component: truncated arithmetic, the tree system,
map series and the quartic closed forms.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.blossom.blossoming import enumerate_well_charged_trees, tree_weight
from src.blossom.planar_map import (
    Color, enumerate_bipartite_planar_maps, enumerate_bipartite_plane_maps, enumerate_doubly_rooted_maps,
    enumerate_r_maps, enumerate_spin_maps, weight,
)
from src.blossom.series import (
    ClosedFormCatalog, SeriesError, ThetaDirection, doubly_rooted_series, ising_from_bipartite, ising_ring,
    ising_series, make_ring, plane_map_series, q_from_p, quartic_closed_forms, quartic_P, quartic_ring,
    series_arith, series_from_weights, solve_Q, solve_tree_system, square_substitution, swap_colors,
    theta_apply, tree_ring, trumpet_cornet_series, xi_extract,
)

_QUARTIC_NAMES = {"x4": "x", "y4": "y"}


def _xy_ring(order=4):
    return make_ring(("x", "y"), {"x": 1, "y": 1}, order)


_terms = st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(-4, 4)), max_size=5)


def _polynomial(ring, terms):
    s = ring.zero()
    for a, b, c in terms:
        s = s + ring.monomial({"x": a, "y": b}, c)
    return s


class TestArithmetic:

    def test_truncation_drops_high_grades(self):
        ring = _xy_ring(2)
        x = ring.var("x")
        assert (x * x * x).is_zero()
        assert (1 + x) ** 2 == 1 + 2 * x + x * x

    def test_coefficients_are_exact_rationals(self):
        ring = _xy_ring()
        half = ring.var("x") / 2
        assert half.coefficient({"x": 1}) == Fraction(1, 2)
        assert (half * 2).coefficient({"x": 1}) == 1

    def test_geometric_inverse(self):
        ring = _xy_ring(3)
        x = ring.var("x")
        assert (1 - x).invert_unit() == 1 + x + x * x + x * x * x

    def test_zero_constant_term_is_not_invertible(self):
        with pytest.raises(SeriesError, match="not invertible"):
            _xy_ring().var("x").invert_unit()

    def test_inexact_monomial_division(self):
        ring = _xy_ring()
        with pytest.raises(SeriesError, match="inexact"):
            (ring.var("x") + ring.var("y")).divide_monomial({"x": 1})

    def test_polynomial_division(self):
        ring = make_ring(("x", "nu"), {"x": 1}, 4)
        nu = ring.var("nu")
        assert ((1 - nu * nu) * ring.var("x")).divide_polynomial(1 - nu * nu, "nu") == ring.var("x")

    def test_missing_variable_is_an_error(self):
        with pytest.raises(SeriesError, match="not in the ring"):
            _xy_ring().monomial({"z": 1})

    def test_xi_window_overflow_is_an_error(self):
        ring = tree_ring((1, 2), 1)
        with pytest.raises(SeriesError, match="outside the window"):
            ring.monomial({"xi": ring.xi_window + 1})

    def test_xi_extraction(self):
        ring = tree_ring((1, 2), 2)
        s = ring.monomial({"xi": -1, "u": 1}) + ring.var("x1") + ring.monomial({"xi": 2, "y1": 1})
        assert xi_extract(s, "coeff", 2) == ring.var("y1")
        assert xi_extract(s, "le", 0) == ring.monomial({"xi": -1, "u": 1}) + ring.var("x1")
        with pytest.raises(ValueError, match="Unknown xi extraction mode"):
            xi_extract(s, "median")

    def test_swap_colors(self):
        ring = tree_ring((1, 2), 2)
        assert swap_colors(ring.monomial({"x1": 1, "y2": 1})) == ring.monomial({"y1": 1, "x2": 1})

    def test_series_arith_dispatch(self):
        ring = make_ring(("x", "u"), {"x": 1}, 3)
        x, u = ring.var("x"), ring.var("u")
        assert series_arith(x * u * u, None, "differentiate_u") == 2 * x * u
        assert series_arith(x * u, None, "integrate_u") == x * u * u / 2
        assert series_arith(x, u, "substitute", "x") == u
        with pytest.raises(ValueError, match="Unknown series operation"):
            series_arith(x, None, "sqrt")

    @pytest.mark.property_based
    @given(_terms)
    @settings(max_examples=50, deadline=None)
    def test_unit_times_inverse_is_one(self, terms):
        ring = _xy_ring()
        s = 1 + _polynomial(ring, [t for t in terms if t[0] or t[1]])
        assert s * s.invert_unit() == 1

    @pytest.mark.property_based
    @given(_terms, _terms, _terms)
    @settings(max_examples=50, deadline=None)
    def test_multiplication_distributes(self, a, b, c):
        ring = _xy_ring()
        p, q, r = (_polynomial(ring, t) for t in (a, b, c))
        assert p * (q + r) == p * q + p * r
        assert p * q == q * p

    def test_theta_round_trip(self):
        ring = ising_ring(4, nu_cap=2)
        t, x = ring.var("t"), ring.var("x")
        s = t + x * t * t
        there = theta_apply(s, ThetaDirection.THETA_INVERSE)
        assert there == t * (1 - ring.var("nu") ** 2) + x * t * t * (1 - ring.var("nu") ** 2) ** 2
        assert theta_apply(there, "theta") == s


class TestTreeSystem:

    def test_leaves_only(self):
        pair = solve_tree_system(1, 1)
        assert pair.W == pair.ring.var("x1")
        assert pair.B == pair.ring.var("y1")

    def test_black_vertex_with_three_opening_stems(self):
        pair = solve_tree_system(4, 2)
        assert pair.component(Color.BLACK, -3).coefficient({"y4": 1, "u": 3}) == 1

    @pytest.mark.slow
    @pytest.mark.parametrize("max_degree,order", [(2, 2), (3, 3), (3, 6)])
    def test_series_count_planted_trees(self, max_degree, order):
        pair = solve_tree_system(max_degree, order)
        for color, series, charges in ((Color.WHITE, pair.W, range(0, 2 * order + 1)),
                                       (Color.BLACK, pair.B, range(-2 * order, 2))):
            weights = [tree_weight(t) for k in charges
                       for t in enumerate_well_charged_trees(k, order, root_color=color, planted=True,
                                                             degrees=pair.degrees)]
            assert series == series_from_weights(pair.ring, weights)

    def test_single_edge_plane_map(self):
        series = plane_map_series(solve_tree_system(2, 1))
        assert series.coefficient({"x1": 1, "y1": 1}) == 1

    @pytest.mark.slow
    def test_plane_map_series_counts_maps(self):
        pair = solve_tree_system(4, 5)
        weights = [weight(m, "plane") for n in range(1, 6) for m in enumerate_bipartite_plane_maps(n)
                   if all(m.degree(v) <= 4 for v in range(m.num_vertices))]
        assert plane_map_series(pair) == series_from_weights(pair.ring, weights)

    def test_trumpet_needs_positive_k(self):
        with pytest.raises(SeriesError):
            trumpet_cornet_series(solve_tree_system(1, 1), 0, Color.WHITE, "trumpet")

    @pytest.mark.slow
    @pytest.mark.parametrize("colors", ["ww", "wb", "bb"])
    def test_doubly_rooted_series(self, colors):
        pair = solve_tree_system(4, 4)
        oracle = series_from_weights(pair.ring, [weight(m, "planar") for n in (1, 2, 3, 4)
                                                 for m, _ in enumerate_doubly_rooted_maps(n, colors)])
        assert doubly_rooted_series(pair, colors) == oracle


class TestQuartic:

    @pytest.fixture(scope="class")
    def P(self):
        return quartic_P(4)

    def test_low_coefficients(self, P):
        assert P.constant_term() == 0
        assert P.coefficient({"u": 1}) == 1
        assert P.coefficient({"x2": 1, "y2": 1, "u": 1}) == 1
        assert P.coefficient({"x4": 1, "y4": 1, "u": 3}) == 3

    def test_P_solves_its_equation(self, P):
        assert ClosedFormCatalog.p_equation(P) == P

    def test_closed_forms_match_small_maps(self, P):
        forms = quartic_closed_forms(P)
        ring = P.ring.with_order(4)
        planar = [weight(m, "planar") for n in (1, 2) for m in enumerate_bipartite_planar_maps(n)
                  if all(m.degree(v) in (2, 4) for v in range(m.num_vertices))]
        assert forms.planar.to_ring(ring) == series_from_weights(ring, planar)
        assert forms.planar.coefficient({"x2": 1, "y2": 1, "u": 2}) == 1

    @pytest.mark.slow
    def test_root_degree_four_matches_small_maps(self):
        forms = quartic_closed_forms(quartic_P(6))
        root4 = forms.planar_root4
        assert root4.ring.order >= 8
        ring = root4.ring.with_order(8)
        weights = [weight(m, "planar") for n in range(1, 5) for m in enumerate_bipartite_planar_maps(n)
                   if m.degree(m.root_vertex) == 4 and all(m.degree(v) in (2, 4) for v in range(m.num_vertices))]
        assert root4.to_ring(ring) == series_from_weights(ring, weights)
        # two double edges on one white vertex, and a quadruple edge
        assert root4.coefficient({"x4": 1, "y2": 2, "u": 3}) == 2
        assert root4.coefficient({"x4": 1, "y4": 1, "u": 4}) == 1

    def test_raising_the_order_keeps_lower_coefficients(self):
        assert quartic_P(4).retruncate(6) == quartic_P(3)
        small, large = solve_tree_system(2, 2), solve_tree_system(2, 3)
        assert large.W.to_ring(small.ring) == small.W
        assert solve_Q(8).retruncate(6) == solve_Q(6)

    def test_pol_at_zero(self):
        ring = quartic_ring(4)
        x2, x4, u = ring.var("x2"), ring.var("x4"), ring.var("u")
        assert ClosedFormCatalog.pol(ring.zero()) == u * (9 * x4 * u - x2 * x2)


class TestIsing:

    def test_Q_coefficients(self):
        Q = solve_Q(6)
        assert Q.is_nonnegative_integral()
        assert Q.coefficient({"t": 2, "u": 1}) == 1
        assert Q.coefficient({"t": 4, "nu": 2, "x": 1, "u": 2}) == 3
        assert Q.coefficient({"t": 4, "nu": 2, "y": 1, "u": 2}) == 3

    def test_square_substitution(self):
        source = quartic_ring(2)
        target = ising_ring(4)
        s = source.var("x2") + source.var("x4")
        expected = target.var("nu") + target.var("x") * target.var("t") ** 2
        assert square_substitution(s, target, _QUARTIC_NAMES) == expected

    def test_Q_counts_pendant_rooted_spin_maps(self):
        # pendant root and tau carry no vertex weight; Q has one extra t
        weights = []
        for n in (0, 1, 2):
            for m, tau, spins in enumerate_r_maps(n):
                w = weight(m, "ising", spins, unweighted=(m.root_vertex, tau))
                w["t"] += 1
                weights.append({_QUARTIC_NAMES.get(v, v): e for v, e in w.items()})
        ring = ising_ring(6)
        assert solve_Q(6).to_ring(ring) == series_from_weights(ring, weights)

    @pytest.mark.slow
    def test_Q_is_nonnegative_to_t12(self):
        Q = solve_Q(12)
        assert Q.is_nonnegative_integral()
        assert ClosedFormCatalog.lagrangian(Q) == Q

    @pytest.mark.slow
    def test_Q_from_square_substituted_P(self):
        from_p = q_from_p(8, 2)
        assert solve_Q(8).to_ring(from_p.ring) == from_p

    @pytest.mark.slow
    def test_ising_from_root_degree_four_maps(self):
        from_m4 = ising_from_bipartite(4, 2)
        assert ising_series(solve_Q(8)).to_ring(from_m4.ring) == from_m4

    @pytest.mark.slow
    @pytest.mark.parametrize("n_vertices", [2, 3])
    def test_ising_counts_spin_maps(self, n_vertices):
        ising = ising_series(solve_Q(2 * n_vertices + 4))
        ring = ising_ring(2 * n_vertices)
        weights = []
        for nv in range(1, n_vertices + 1):
            for m, spins in enumerate_spin_maps(n_vertices=nv, degree=4):
                if spins.spins[m.root_vertex] is Color.WHITE:
                    w = weight(m, "ising", spins)
                    weights.append({_QUARTIC_NAMES.get(v, v): e for v, e in w.items()})
        assert ising.to_ring(ring) == series_from_weights(ring, weights)

    @pytest.mark.slow
    def test_one_quartic_vertex(self):
        ising = ising_series(solve_Q(8))
        assert ising.coefficient({"x": 1, "t": 2, "nu": 2, "u": 3}) == 2
        ring = ising_ring(2)
        weights = []
        for m, spins in enumerate_spin_maps(n_vertices=1, degree=4):
            if spins.spins[m.root_vertex] is Color.WHITE:
                w = weight(m, "ising", spins)
                weights.append({_QUARTIC_NAMES.get(v, v): e for v, e in w.items()})
        assert ising.to_ring(ring) == series_from_weights(ring, weights)
