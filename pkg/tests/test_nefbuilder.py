"""Nef coefficient scheme: canonical coefficients, certificates, external cases."""

from fractions import Fraction
from math import floor

import pytest

from pluricalc.dualgraph import chain
from pluricalc.nefbuilder import (
    NefInputError,
    build_coeffs,
    build_input,
    chain_vertex_id,
    compose_multipliers,
    external_inequalities,
    verify_exceptional,
)
from pluricalc.zariski import Configuration, iterate_reduction


class TestBuildInput:
    def test_chain_shape(self):
        inp = build_input(5, 2, [4])
        assert inp.graph.weights() == (2, 2, 2, 3)
        assert inp.graph.vertex("E1_4").self_intersection == -3

    def test_divisibility_required(self):
        with pytest.raises(NefInputError):
            build_input(6, 2, [4])

    def test_chain_length_cut(self):
        with pytest.raises(NefInputError):
            build_input(5, 2, [1])

    def test_f_part_integrality(self):
        f = chain([4, 2], prefix="F").with_coeffs(
            {"F1": Fraction(4, 7), "F2": Fraction(2, 7)}
        )
        with pytest.raises(NefInputError):
            build_input(5, 2, [4], f)  # 5 * 4/7 is not an integer
        inp = build_input(35, 2, [4], f)  # 35 = 5 * 7 clears both hypotheses
        assert inp.f_coeffs == {"F1": Fraction(4, 7), "F2": Fraction(2, 7)}

    def test_f_part_needs_coefficients(self):
        with pytest.raises(NefInputError):
            build_input(5, 2, [4], chain([2], prefix="F"))


class TestBuildCoeffs:
    def test_fixture_n2_2_m0_5_k_4(self):
        inp = build_input(5, 2, [4])
        assert build_coeffs(inp) == {"E1_1": 0, "E1_2": 0, "E1_3": 1, "E1_4": 2}

    def test_top_coefficient(self):
        # c at j = k is m0 * n2 / (2 n2 + 1).
        for n2 in range(2, 6):
            m0 = 3 * (2 * n2 + 1)
            inp = build_input(m0, n2, [n2 + 5])
            coeffs = build_coeffs(inp)
            assert coeffs[chain_vertex_id(1, n2 + 5)] == m0 * n2 // (2 * n2 + 1)

    def test_boundary_chain_no_zero_prefix(self):
        inp = build_input(5, 2, [2])
        assert build_coeffs(inp) == {"E1_1": 1, "E1_2": 2}

    def test_f_part_scaled(self):
        f = chain([4, 2], prefix="F").with_coeffs(
            {"F1": Fraction(4, 7), "F2": Fraction(2, 7)}
        )
        inp = build_input(35, 2, [4], f)
        coeffs = build_coeffs(inp)
        assert coeffs["F1"] == 20 and coeffs["F2"] == 10


class TestVerifyExceptional:
    def test_fixture_values(self):
        inp = build_input(5, 2, [4])
        cert = verify_exceptional(inp, build_coeffs(inp))
        assert [str(cert.intersections[f"E1_{j}"]) for j in (1, 2, 3, 4)] == ["0", "1", "0", "0"]
        assert cert.positive_slots == ("E1_2",)
        assert cert.all_nef and cert.all_bounds

    def test_all_zero_on_du_val_f_part(self):
        f = chain([2, 2], prefix="F").with_coeffs({"F1": Fraction(0), "F2": Fraction(0)})
        inp = build_input(5, 2, [4], f)
        cert = verify_exceptional(inp, build_coeffs(inp))
        assert cert.intersections["F1"] == 0 and cert.intersections["F2"] == 0

    def test_f_part_products_vanish(self):
        f = chain([4, 2], prefix="F").with_coeffs(
            {"F1": Fraction(4, 7), "F2": Fraction(2, 7)}
        )
        inp = build_input(35, 2, [4], f)
        cert = verify_exceptional(inp, build_coeffs(inp))
        assert cert.intersections["F1"] == 0 and cert.intersections["F2"] == 0

    def test_boundary_chain_all_zero(self):
        inp = build_input(5, 2, [2])
        cert = verify_exceptional(inp, build_coeffs(inp))
        assert set(cert.intersections.values()) == {Fraction(0)}

    def test_case_pattern_on_grid(self):
        for n2 in range(2, 6):
            m0 = 2 * n2 + 1
            lengths = list(range(n2, 16))
            inp = build_input(m0, n2, lengths)
            cert = verify_exceptional(inp, build_coeffs(inp))
            assert cert.all_bounds
            for i, k in enumerate(lengths, start=1):
                for j in range(1, k + 1):
                    expected = Fraction(1) if j == k - n2 else Fraction(0)
                    assert cert.intersections[chain_vertex_id(i, j)] == expected

    def test_bound_invariant_on_grid(self):
        # 0 <= c_{i,j} <= floor(m0 j / (2 k_i + 1)) for the canonical c.
        for n2 in (2, 4, 6):
            m0 = 2 * n2 + 1
            lengths = list(range(n2, 21))
            inp = build_input(m0, n2, lengths)
            coeffs = build_coeffs(inp)
            for i, k in enumerate(lengths, start=1):
                for j in range(1, k + 1):
                    c = coeffs[chain_vertex_id(i, j)]
                    assert 0 <= c <= floor(Fraction(m0 * j, 2 * k + 1))

    def test_user_supplied_coefficients(self):
        inp = build_input(5, 2, [4])
        cert = verify_exceptional(inp, {"E1_1": 0, "E1_2": 0, "E1_3": 0, "E1_4": 0})
        # K alone is not nef against the (-3)-curve... it is: K.E = 1 >= 0.
        assert cert.intersections["E1_4"] == 5
        assert cert.all_nef


class TestReductionConsistency:
    def test_reduction_from_upper_bounds_reaches_canonical(self):
        # Starting the reduction loop at floor(m0 * a) on a single deep chain
        # lands on a relatively nef fixpoint >= the canonical coefficients.
        n2, m0, k = 2, 5, 4
        universe = Configuration(chain([2] * (k - 1) + [3]))
        start = {f"E{j}": floor(Fraction(m0 * j, 2 * k + 1)) for j in range(1, k + 1)}
        result = iterate_reduction(universe, m0, start)
        assert result.relatively_nef
        canonical = build_coeffs(build_input(m0, n2, [k]))
        for j in range(1, k + 1):
            assert result.coeffs[f"E{j}"] >= canonical[chain_vertex_id(1, j)]


class TestExternalInequalities:
    def test_t_zero(self):
        report = external_inequalities(4, Fraction(1, 3), 0, [], 9)
        assert report.value == 3 and report.passed

    def test_t_two_slack(self):
        n2, m0 = 5, 11
        report = external_inequalities(n2, Fraction(1, 4), 2, [7, 9], m0)
        expected = (
            m0 * Fraction(1, 4)
            - (Fraction(m0 * 7, 15) - Fraction(m0 * n2, 11))
            - (Fraction(m0 * 9, 19) - Fraction(m0 * n2, 11))
        )
        assert report.value == expected
        assert report.worst_case == m0 * Fraction(1, 4) - Fraction(m0, 11)
        assert report.passed and report.precondition_ok

    def test_t_three_value(self):
        report = external_inequalities(2, Fraction(1, 2), 3, [], 5)
        assert report.value == 5 * (Fraction(6, 5) - 1) == 1
        assert report.passed

    def test_worst_case_positive_once_n2_large_enough(self):
        gamma0 = Fraction(1, 7)
        for n2 in range(7, 12):
            report = external_inequalities(n2, gamma0, 2, [n2, n2], 2 * n2 + 1)
            assert report.precondition_ok and report.worst_case > 0

    def test_precondition_reported_not_fatal(self):
        report = external_inequalities(2, Fraction(1, 9), 1, [5], 5)
        assert not report.precondition_ok
        assert report.notes

    def test_needs_enough_depths(self):
        with pytest.raises(Exception):
            external_inequalities(3, Fraction(1, 2), 2, [5], 7)


class TestMultipliers:
    def test_composition(self):
        report = compose_multipliers(5, 7)
        assert (report.m2, report.m) == (35, 192 * 35)

    def test_custom_factor(self):
        assert compose_multipliers(5, 7, bpf_factor=10).m == 350
