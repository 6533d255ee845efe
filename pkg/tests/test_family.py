"""The X_{n,k} family: structure, intersections, obstructions, searches."""

from fractions import Fraction

import pytest

from pluricalc.dualgraph import graph_det
from pluricalc.errors import PluricalcError
from pluricalc.family import (
    OutOfRangeError,
    SearchTooLargeError,
    build_family,
    check_ample_degrees,
    check_curve_intersection,
    check_fractional_obstruction,
    check_mld,
    coefficient_bounds,
    exhaustive_non_nef,
    grid,
)
from pluricalc.singularity import hj_expand, mld_of
from pluricalc.zariski import CANONICAL_ID, LatticeDivisor, divisor_dot_external, iterate_reduction

GRID = [(n, k) for n in range(4, 9) for k in range(2, 11)]


class TestBuild:
    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            build_family(3, 2)
        with pytest.raises(OutOfRangeError):
            build_family(4, 1)

    def test_fixture_4_2(self):
        inst = build_family(4, 2)
        assert inst.d == 176
        assert inst.ambient_weights == (1, 1, 8, 25)
        assert (inst.o_type.order, inst.o_type.weight) == (25, 8)
        assert inst.o1_graph.weights() == (2, 2, 2, 2, 2, 3)
        assert inst.o2_graph.weights() == (3, 4)
        assert graph_det(inst.o1_graph) == 13
        assert graph_det(inst.o2_graph) == 11
        assert inst.w_graph.vertex("C").pullback_coeff == Fraction(1, 25)

    def test_o1_coefficients_4_2(self):
        inst = build_family(4, 2)
        for i in range(1, 7):
            assert inst.coeffs_X[f"E{i}"] == Fraction(i, 13)

    def test_hypersurface_coefficients(self):
        inst = build_family(4, 2)
        for i in range(1, 9):
            assert inst.coeffs_Y[f"E{i}"] == Fraction(2 * i, 25)
        assert inst.coeffs_Y["C"] == Fraction(1, 25)

    def test_degree_divisibilities_on_grid(self):
        for n, k in GRID:
            inst = build_family(n, k)
            assert inst.d % (2 * k * (n - 2)) == 0
            assert (inst.d - 1) % inst.order == 0

    def test_component_determinants_on_grid(self):
        for n, k in GRID:
            inst = build_family(n, k)
            kp = k * (n - 1)
            assert graph_det(inst.o1_graph) == 2 * kp + 1
            assert graph_det(inst.o2_graph) == (n - 3) * (2 * kp - 1)

    def test_o2_type_cross_validation(self):
        # The stated second singularity type must resolve to the observed
        # chain; discrepancies would be flagged, not silently corrected.
        for n, k in GRID:
            inst = build_family(n, k)
            assert inst.o2_type_matches_graph
            assert sorted(hj_expand(inst.o2_type)) == sorted(inst.o2_graph.weights())


class TestCurveIntersection:
    def test_value_4_2(self):
        assert check_curve_intersection(build_family(4, 2)).value == Fraction(1, 143)

    def test_inequality_at_4_2_is_tight_side(self):
        report = check_curve_intersection(build_family(4, 2))
        assert report.value < Fraction(1, 140)
        assert report.strict_chain_holds

    def test_strictly_decreasing_in_n_and_k(self):
        values = {
            (n, k): check_curve_intersection(build_family(n, k)).value for n, k in GRID
        }
        for n, k in GRID:
            if (n + 1, k) in values:
                assert values[(n + 1, k)] < values[(n, k)]
            if (n, k + 1) in values:
                assert values[(n, k + 1)] < values[(n, k)]


class TestFractionalObstruction:
    def test_fixture_4_2_m_2(self):
        report = check_fractional_obstruction(build_family(4, 2), 2)
        assert report.frac_over_m == Fraction(6, 13)
        assert report.threshold_k == Fraction(5, 24)
        assert report.holds

    def test_even_m_required(self):
        with pytest.raises(PluricalcError):
            check_fractional_obstruction(build_family(4, 2), 3)

    def test_l_at_most_k_required(self):
        with pytest.raises(PluricalcError):
            check_fractional_obstruction(build_family(4, 2), 6)

    def test_k_equals_l_boundary(self):
        # m = 2k exactly: the fractional deficit still clears 5/(12k).
        for k in range(2, 11):
            report = check_fractional_obstruction(build_family(4, k), 2 * k)
            assert report.holds

    def test_whole_even_range(self):
        for k in range(2, 8):
            inst = build_family(4, k)
            for l in range(1, k + 1):
                assert check_fractional_obstruction(inst, 2 * l).holds


class TestExhaustiveNonNef:
    def test_desk_scale_4_2(self):
        report = exhaustive_non_nef(build_family(4, 2), 2)
        assert report.total_vectors == 4
        assert report.bounds == {f"E{i}": 0 for i in range(1, 7)} | {"E7": 1, "E8": 1}
        assert report.all_non_nef

    def test_m_1_forces_zero(self):
        report = exhaustive_non_nef(build_family(4, 2), 1)
        assert report.total_vectors == 1
        assert report.all_non_nef  # K_W . C = -1 < 0

    def test_desk_scale_5_2(self):
        report = exhaustive_non_nef(build_family(5, 2), 2)
        assert report.total_vectors == 16
        assert report.all_non_nef

    def test_budget_guard(self):
        inst = build_family(4, 2)
        with pytest.raises(SearchTooLargeError) as exc:
            exhaustive_non_nef(inst, 2000, budget=1000)
        assert exc.value.bounds == coefficient_bounds(inst, 2000)

    def test_agrees_with_reduction_loop(self):
        # The reduction loop from the admissible upper bounds stops at a
        # vertex-nef vector that still fails against the inserted curve.
        inst = build_family(4, 2)
        m = 2
        cfg = inst.configuration()
        result = iterate_reduction(cfg, m, coefficient_bounds(inst, m))
        divisor = LatticeDivisor(
            {v: Fraction(c, m) for v, c in result.coeffs.items()}, CANONICAL_ID, 1
        )
        c_curve = cfg.external("C")
        assert divisor_dot_external(cfg, divisor, c_curve) < 0
        assert not result.relatively_nef  # the C test curve is part of nefness here


class TestDegrees:
    def test_fixture_4_2(self):
        report = check_ample_degrees(build_family(4, 2))
        assert report.d_prime == 141
        assert report.shifted == 116
        assert report.identity_holds and report.at_least_116 and report.z_witness_holds

    def test_grid(self):
        for n, k in GRID:
            report = check_ample_degrees(build_family(n, k))
            assert report.identity_holds
            assert report.at_least_116
            assert report.z_witness_holds
            assert report.d_prime > 0


class TestMld:
    def test_fixture_4_2(self):
        report = check_mld(build_family(4, 2))
        assert report.value == Fraction(4, 11)
        assert report.mld_o1 == Fraction(7, 13)
        assert report.attained_at_o2

    def test_closed_form_on_grid(self):
        for n, k in GRID:
            report = check_mld(build_family(n, k))
            assert report.value == Fraction(2 * k, 2 * k * (n - 1) - 1)
            assert report.value == 1 / (n - 1 - Fraction(1, 2 * k))
            assert report.mld_o1 > Fraction(1, 2) > report.mld_o2

    def test_decreasing_in_k_with_limit(self):
        for n in range(4, 9):
            values = [check_mld(build_family(n, k)).value for k in range(2, 11)]
            assert all(a > b for a, b in zip(values, values[1:]))
            assert all(v > Fraction(1, n - 1) for v in values)
            # within 1/(2k(n-1)-1)-ish of the limit at the top of the range
            assert values[-1] - Fraction(1, n - 1) < Fraction(1, 10 * (n - 1))

    def test_graph_mld_matches_formula(self):
        inst = build_family(6, 3)
        assert mld_of(inst.o2_graph) == Fraction(2 * 3, 2 * 3 * 5 - 1)


class TestGrid:
    def test_iteration_order(self):
        members = list(grid(range(4, 6), range(2, 4)))
        assert [(m.n, m.k) for m in members] == [(4, 2), (4, 3), (5, 2), (5, 3)]
