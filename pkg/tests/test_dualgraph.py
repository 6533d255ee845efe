"""Dual graphs: construction, determinants, blow-ups, splitting, JSON."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pluricalc.dualgraph import (
    CurveVertex,
    DualGraph,
    ExternalClass,
    GraphError,
    TangentialBlowUpError,
    blow_up_edge,
    chain,
    external_from_json,
    external_to_json,
    graph_det,
    graph_from_json,
    graph_to_json,
    k_dot_vertex,
    split_at,
    validate,
)

weight_lists = st.lists(st.integers(min_value=1, max_value=7), min_size=0, max_size=8)


class TestChain:
    def test_three_vertex_path(self):
        g = chain([2, 2, 3])
        assert [v.self_intersection for v in g.vertices] == [-2, -2, -3]
        assert g.edges == (("E1", "E2", 1), ("E2", "E3", 1))

    def test_empty(self):
        g = chain([])
        assert g.vertices == ()
        assert graph_det(g) == 1

    def test_two_vertex(self):
        g = chain([4, 2])
        assert g.weights() == (4, 2)
        assert g.chain_order() == ("E1", "E2")

    def test_non_chain_has_no_order(self):
        fork = DualGraph(
            (CurveVertex("A", -2), CurveVertex("B", -2), CurveVertex("C", -2), CurveVertex("D", -2)),
            (("A", "B", 1), ("B", "C", 1), ("B", "D", 1)),
        )
        assert fork.chain_order() is None

    def test_double_edge_is_not_a_chain(self):
        g = DualGraph((CurveVertex("A", -2), CurveVertex("B", -2)), (("A", "B", 2),))
        assert g.chain_order() is None


class TestGraphInvariants:
    def test_rejects_self_loop(self):
        with pytest.raises(GraphError):
            DualGraph((CurveVertex("A", -2),), (("A", "A", 1),))

    def test_rejects_zero_multiplicity(self):
        with pytest.raises(GraphError):
            DualGraph((CurveVertex("A", -2), CurveVertex("B", -2)), (("A", "B", 0),))

    def test_rejects_duplicate_ids(self):
        with pytest.raises(GraphError):
            DualGraph((CurveVertex("A", -2), CurveVertex("A", -3)), ())

    def test_rejects_duplicate_edges(self):
        with pytest.raises(GraphError):
            DualGraph(
                (CurveVertex("A", -2), CurveVertex("B", -2)),
                (("A", "B", 1), ("B", "A", 1)),
            )

    def test_intersection_matrix_symmetric(self):
        g = chain([2, 3, 2])
        m = g.intersection_matrix()
        assert m.is_symmetric
        assert m[0, 0] == -2 and m[1, 1] == -3
        assert m[0, 1] == m[1, 0] == 1
        assert m[0, 2] == 0


class TestGraphDet:
    def test_fixtures(self):
        assert graph_det(chain([2, 2, 3])) == 7
        assert graph_det(chain([2] * 7 + [4])) == 25
        assert graph_det(chain([])) == 1

    @given(weight_lists)
    @settings(max_examples=80, deadline=None)
    def test_continued_fraction_recursion(self, weights):
        # det([w1..wr]) = w1 det([w2..wr]) - det([w3..wr]) for r >= 2
        # (the r = 1 case is the seed det([w1]) = w1 instead).
        if len(weights) >= 2:
            lhs = graph_det(chain(weights))
            rhs = weights[0] * graph_det(chain(weights[1:])) - graph_det(chain(weights[2:]))
            assert lhs == rhs
        elif len(weights) == 1:
            assert graph_det(chain(weights)) == weights[0]

    @given(st.integers(min_value=0, max_value=12), st.integers(min_value=1, max_value=9))
    @settings(max_examples=60, deadline=None)
    def test_two_block_closed_form(self, t, w):
        assert graph_det(chain([2] * t + [w])) == t * (w - 1) + w

    @given(weight_lists)
    @settings(max_examples=40, deadline=None)
    def test_chain_path_agrees_with_matrix_path(self, weights):
        g = chain(weights)
        from pluricalc.ratmat import det

        assert graph_det(g) == det(g.intersection_matrix().neg())


class TestAdjunction:
    def test_k_trivial_two_curve(self):
        assert k_dot_vertex(chain([2]), "E1") == 0

    def test_weight_three(self):
        assert k_dot_vertex(chain([3]), "E1") == 1

    @given(st.integers(min_value=1, max_value=12))
    def test_weight_n(self, n):
        assert k_dot_vertex(chain([n]), "E1") == n - 2

    def test_genus_contributes(self):
        g = DualGraph((CurveVertex("A", -2, genus=1),), ())
        assert k_dot_vertex(g, "A") == 2


def pullback_residuals(g: DualGraph) -> dict[str, Fraction]:
    """(K + sum b_i E_i) . E_j for each j, from declared coefficients."""
    coeffs = g.coeffs()
    m = g.intersection_matrix()
    out = {}
    for j, v in enumerate(g.vertices):
        total = k_dot_vertex(g, v.id)
        for i, u in enumerate(g.vertices):
            total += coeffs[u.id] * m[i, j]
        out[v.id] = total
    return out


class TestBlowUpEdge:
    def family_chain(self):
        return chain([2] * 7 + [4]).with_coeffs(
            {f"E{i}": Fraction(2 * i, 25) for i in range(1, 9)}
        )

    def test_new_coefficient(self):
        w = blow_up_edge(self.family_chain(), ("E6", "E7"), new_id="C")
        assert w.vertex("C").pullback_coeff == Fraction(1, 25)
        assert w.vertex("C").self_intersection == -1

    def test_k_trivial_endpoints_give_minus_one(self):
        g = chain([2, 2]).with_coeffs({"E1": Fraction(0), "E2": Fraction(0)})
        w = blow_up_edge(g, ("E1", "E2"))
        new = [v for v in w.vertices if v.id not in ("E1", "E2")][0]
        assert new.pullback_coeff == -1

    def test_endpoint_weights_bump(self):
        w = blow_up_edge(self.family_chain(), ("E6", "E7"), new_id="C")
        assert w.vertex("E6").self_intersection == -3
        assert w.vertex("E7").self_intersection == -3
        assert w.multiplicity("E6", "E7") == 0
        assert w.multiplicity("E6", "C") == 1
        assert w.multiplicity("C", "E7") == 1

    def test_rejects_tangential(self):
        g = DualGraph(
            (CurveVertex("A", -2, 0, Fraction(0)), CurveVertex("B", -2, 0, Fraction(0))),
            (("A", "B", 2),),
        )
        with pytest.raises(TangentialBlowUpError):
            blow_up_edge(g, ("A", "B"))

    def test_rejects_missing_edge(self):
        with pytest.raises(GraphError):
            blow_up_edge(self.family_chain(), ("E1", "E3"))

    def test_requires_coefficients(self):
        with pytest.raises(GraphError):
            blow_up_edge(chain([2, 2]), ("E1", "E2"))

    def test_preserves_pullback_identity(self):
        g = self.family_chain()
        assert all(r == 0 for r in pullback_residuals(g).values())
        w = blow_up_edge(g, ("E6", "E7"), new_id="C")
        assert all(r == 0 for r in pullback_residuals(w).values())

    @given(st.integers(min_value=4, max_value=7), st.integers(min_value=2, max_value=5))
    @settings(max_examples=20, deadline=None)
    def test_preserves_pullback_identity_on_grid(self, n, k):
        big_n = 2 * k * (n - 2) * (n - 1) + 1
        q = 2 * k * (n - 2)
        g = chain([2] * (q - 1) + [n]).with_coeffs(
            {f"E{i}": Fraction(i * (n - 2), big_n) for i in range(1, q + 1)}
        )
        assert all(r == 0 for r in pullback_residuals(g).values())
        kp = k * (n - 1)
        w = blow_up_edge(g, (f"E{kp}", f"E{kp + 1}"), new_id="C")
        assert all(r == 0 for r in pullback_residuals(w).values())


class TestSplitAt:
    def test_family_split(self):
        g = chain([2] * 7 + [4]).with_coeffs({f"E{i}": Fraction(2 * i, 25) for i in range(1, 9)})
        w = blow_up_edge(g, ("E6", "E7"), new_id="C")
        parts = split_at(w, "C")
        assert [p.weights() for p in parts] == [(2, 2, 2, 2, 2, 3), (3, 4)]
        assert [graph_det(p) for p in parts] == [13, 11]

    def test_endpoint_removal(self):
        parts = split_at(chain([2, 2]), "E1")
        assert len(parts) == 1 and parts[0].ids == ("E2",)

    def test_interior_removal(self):
        parts = split_at(chain([2, 2, 2, 2, 2]), "E3")
        assert [p.ids for p in parts] == [("E1", "E2"), ("E4", "E5")]

    def test_split_grid_determinants(self):
        for n in range(4, 8):
            for k in range(2, 6):
                big_n = 2 * k * (n - 2) * (n - 1) + 1
                q = 2 * k * (n - 2)
                kp = k * (n - 1)
                g = chain([2] * (q - 1) + [n]).with_coeffs(
                    {f"E{i}": Fraction(i * (n - 2), big_n) for i in range(1, q + 1)}
                )
                w = blow_up_edge(g, (f"E{kp}", f"E{kp + 1}"), new_id="C")
                dets = [graph_det(p) for p in split_at(w, "C")]
                assert dets == [2 * kp + 1, (n - 3) * (2 * kp - 1)]


class TestValidate:
    def test_epsilon_bound_satisfied(self):
        assert validate(chain([2, 3]), epsilon=Fraction(1, 2)) == []

    def test_epsilon_bound_violated(self):
        report = validate(chain([5]), epsilon=Fraction(1, 2))
        assert len(report) == 1 and "weight 5" in report[0]

    def test_empty_graph_clean(self):
        assert validate(chain([]), epsilon=Fraction(1, 2), minimal_resolution=True) == []

    def test_minimal_resolution_flags_minus_one(self):
        g = DualGraph((CurveVertex("A", -1),), ())
        assert validate(g, minimal_resolution=True) != []
        assert validate(g) == []

    def test_never_raises_on_bad_epsilon(self):
        assert "not positive" in validate(chain([2]), epsilon=Fraction(-1))[0]


class TestJson:
    def test_graph_round_trip(self):
        g = chain([2, 3]).with_coeffs({"E1": Fraction(1, 5), "E2": Fraction(2, 5)})
        data = graph_to_json(g)
        assert data["vertices"][0] == {"id": "E1", "self": -2, "genus": 0, "coeff": "1/5"}
        assert graph_from_json(data) == g

    def test_documented_shape(self):
        data = {
            "vertices": [
                {"id": "E1", "self": -2, "genus": 0, "coeff": "2/25"},
                {"id": "E2", "self": -2},
            ],
            "edges": [["E1", "E2", 1]],
        }
        g = graph_from_json(data)
        assert g.vertex("E1").pullback_coeff == Fraction(2, 25)
        assert g.vertex("E2").pullback_coeff is None

    def test_malformed_raises(self):
        with pytest.raises(GraphError):
            graph_from_json({"vertices": [{"id": "E1"}]})

    def test_external_round_trip(self):
        ext = ExternalClass(
            "C",
            k_dot=Fraction(-1),
            dots={"E1": Fraction(1)},
            self_sq=Fraction(-1),
            genus=0,
            test_curve=True,
        )
        assert external_from_json(external_to_json(ext)) == ext
