"""Zariski decomposition, monotonicity, floor loop, coefficient reduction."""

import random
from fractions import Fraction

import pytest

from pluricalc.accept import (
    _oracle_decomposition,
    random_configuration,
    random_divisor,
    random_negdef_graph,
)
from pluricalc.dualgraph import CurveVertex, DualGraph, ExternalClass, chain
from pluricalc.zariski import (
    CANONICAL_ID,
    Configuration,
    DecompositionError,
    LatticeDivisor,
    PreconditionError,
    check_monotone,
    coefficient_reduction,
    divisor_dot_external,
    divisor_dot_vertex,
    floor_round_loop,
    is_relatively_nef,
    iterate_reduction,
    zariski_decompose,
)


def simple_cfg(weights, dots=None):
    g = chain(weights)
    base = ExternalClass("B", k_dot=Fraction(0), dots=dots or {})
    return Configuration(g, (base,))


class TestDots:
    def test_canonical_base_uses_adjunction(self):
        cfg = Configuration(chain([3]))
        d = LatticeDivisor({}, CANONICAL_ID, 2)
        assert divisor_dot_vertex(cfg, d, "E1") == 2  # 2 * (K.E) = 2 * 1

    def test_external_base(self):
        cfg = simple_cfg([2], dots={"E1": Fraction(3)})
        d = LatticeDivisor({"E1": Fraction(1)}, "B", 1)
        assert divisor_dot_vertex(cfg, d, "E1") == 3 - 2

    def test_external_test_curve_product(self):
        c = ExternalClass("C", k_dot=Fraction(-1), dots={"E1": Fraction(1)}, test_curve=True)
        cfg = Configuration(chain([2]), (c,))
        d = LatticeDivisor({"E1": Fraction(1, 2)}, CANONICAL_ID, 1)
        assert divisor_dot_external(cfg, d, c) == -1 + Fraction(1, 2)

    def test_undeclared_pairing_raises(self):
        b = ExternalClass("B", k_dot=Fraction(0))
        c = ExternalClass("C", k_dot=Fraction(0), test_curve=True)
        cfg = Configuration(chain([2]), (b, c))
        with pytest.raises(PreconditionError):
            divisor_dot_external(cfg, LatticeDivisor({}, "B", 1), c)


class TestDecompose:
    def test_already_nef(self):
        cfg = simple_cfg([2], dots={"E1": Fraction(2)})
        d = LatticeDivisor({}, "B", 1)
        result = zariski_decompose(cfg, d)
        assert all(c == 0 for c in result.N.coeffs.values())
        assert result.support == frozenset()
        assert result.P.same_base(d)

    def test_single_curve(self):
        # universe {E: E^2 = -2}, D = B + E with B.E = 0: N = E, P = B.
        cfg = simple_cfg([2], dots={"E1": Fraction(0)})
        d = LatticeDivisor({"E1": Fraction(1)}, "B", 1)
        result = zariski_decompose(cfg, d)
        assert result.N.coeffs == {"E1": Fraction(1)}
        assert result.P.coeff("E1") == 0
        assert result.support == frozenset({"E1"})

    def test_two_curve_chain(self):
        # universe chain [2,3], D = B + E1 + E2, B orthogonal: N = E1 + E2.
        cfg = simple_cfg([2, 3])
        d = LatticeDivisor({"E1": Fraction(1), "E2": Fraction(1)}, "B", 1)
        result = zariski_decompose(cfg, d)
        assert dict(result.N.coeffs) == {"E1": Fraction(1), "E2": Fraction(1)}
        # the 2x2 solve: -2 n1 + n2 = -1, n1 - 3 n2 = -2
        assert divisor_dot_vertex(cfg, d, "E1") == -1
        assert divisor_dot_vertex(cfg, d, "E2") == -2

    def test_growing_support(self):
        # Initially only E2 violates; solving on {E2} drags E1 negative.
        # (D.E1 = 1, D.E2 = -4, so n2 = 2 on the first round and then
        # P.E1 = 1 - 2 < 0 forces E1 into the support.)
        cfg = simple_cfg([2, 2], dots={"E1": Fraction(-1), "E2": Fraction(0)})
        d = LatticeDivisor({"E2": Fraction(2)}, "B", 1)
        result = zariski_decompose(cfg, d)
        assert result.support == frozenset({"E1", "E2"})
        assert len(result.rounds) >= 2
        assert result.N.coeffs == {"E1": Fraction(2, 3), "E2": Fraction(7, 3)}

    def test_failure_on_non_negative_definite_support(self):
        # A square-zero curve can absorb no negative part.
        g = DualGraph((CurveVertex("A", 0),), ())
        bad = Configuration(g, (ExternalClass("B", k_dot=Fraction(0), dots={"A": Fraction(-1)}),))
        with pytest.raises(DecompositionError):
            zariski_decompose(bad, LatticeDivisor({}, "B", 1))

    def test_oracle_on_small_universes(self):
        rng = random.Random(7)
        for _ in range(150):
            cfg = random_configuration(rng, max_vertices=4)
            d = random_divisor(cfg, rng)
            result = zariski_decompose(cfg, d)
            ids = list(cfg.graph.ids)
            mine = tuple(result.N.coeff(v) for v in ids)
            assert _oracle_decomposition(cfg, d) == {mine}

    def test_invariants_randomized(self):
        rng = random.Random(11)
        for _ in range(200):
            cfg = random_configuration(rng)
            d = random_divisor(cfg, rng)
            result = zariski_decompose(cfg, d)
            ids = list(cfg.graph.ids)
            assert all(result.N.coeff(v) >= 0 for v in ids)
            dots = {v: divisor_dot_vertex(cfg, result.P, v) for v in ids}
            assert all(dots[v] == 0 for v in result.support)
            assert all(dots[v] >= 0 for v in ids)
            assert all(
                result.P.coeff(v) + result.N.coeff(v) == d.coeff(v) for v in ids
            )


class TestMonotone:
    def test_nef_input_is_its_own_positive_part(self):
        cfg = simple_cfg([2], dots={"E1": Fraction(1)})
        d = LatticeDivisor({}, "B", 1)
        assert check_monotone(cfg, d, d)

    def test_chain_example(self):
        cfg = simple_cfg([2, 3])
        d = LatticeDivisor({"E1": Fraction(1), "E2": Fraction(1)}, "B", 1)
        assert check_monotone(cfg, d, LatticeDivisor({}, "B", 1))

    def test_precondition_difference_effective(self):
        cfg = simple_cfg([2])
        d = LatticeDivisor({"E1": Fraction(0)}, "B", 1)
        dt = LatticeDivisor({"E1": Fraction(1)}, "B", 1)
        with pytest.raises(PreconditionError):
            check_monotone(cfg, d, dt)

    def test_precondition_nef_minorant(self):
        cfg = simple_cfg([2])
        d = LatticeDivisor({"E1": Fraction(2)}, "B", 1)
        dt = LatticeDivisor({"E1": Fraction(1)}, "B", 1)  # dt.E1 = -2 < 0
        with pytest.raises(PreconditionError):
            check_monotone(cfg, d, dt)

    def test_precondition_same_base(self):
        cfg = simple_cfg([2])
        with pytest.raises(PreconditionError):
            check_monotone(cfg, LatticeDivisor({}, "B", 1), LatticeDivisor({}, "B", 2))

    def test_randomized_always_true(self):
        rng = random.Random(23)
        for _ in range(150):
            cfg = random_configuration(rng)
            nef = zariski_decompose(cfg, random_divisor(cfg, rng)).P
            bumped = {
                v: nef.coeff(v) + Fraction(rng.randint(0, 5), rng.choice((1, 2)))
                for v in cfg.graph.ids
            }
            assert check_monotone(cfg, LatticeDivisor(bumped, "B", 1), nef)


class TestFloorLoop:
    def test_nef_input_zero_steps(self):
        cfg = simple_cfg([2], dots={"E1": Fraction(1)})
        d = LatticeDivisor({"E1": Fraction(0)}, "B", 1)
        result = floor_round_loop(cfg, d, d)
        assert result.steps == 0 and result.divisor == d

    def test_single_step_example(self):
        cfg = simple_cfg([2], dots={"E1": Fraction(0)})
        d = LatticeDivisor({"E1": Fraction(1)}, "B", 1)
        dt = LatticeDivisor({"E1": Fraction(0)}, "B", 1)
        result = floor_round_loop(cfg, d, dt)
        assert result.steps == 1
        assert result.divisor.coeff("E1") == 0

    def test_requires_integer_coefficients(self):
        cfg = simple_cfg([2], dots={"E1": Fraction(1)})
        d = LatticeDivisor({"E1": Fraction(1, 2)}, "B", 1)
        with pytest.raises(PreconditionError):
            floor_round_loop(cfg, d, LatticeDivisor({}, "B", 1))

    def test_randomized_bound_and_sandwich(self):
        rng = random.Random(31)
        for _ in range(120):
            g = random_negdef_graph(rng)
            ids = list(g.ids)
            tilde = {v: Fraction(rng.randint(0, 3)) for v in ids}
            probe = Configuration(g)
            needed = {
                v: divisor_dot_vertex(probe, LatticeDivisor(tilde), v) for v in ids
            }
            base = ExternalClass(
                "B",
                k_dot=Fraction(0),
                dots={v: max(Fraction(0), -needed[v]) + rng.randint(0, 2) for v in ids},
            )
            cfg = Configuration(g, (base,))
            dt = LatticeDivisor(tilde, "B", 1)
            bumps = {v: rng.randint(0, 3) for v in ids}
            d = LatticeDivisor({v: tilde[v] + bumps[v] for v in ids}, "B", 1)
            result = floor_round_loop(cfg, d, dt)
            assert result.steps <= sum(bumps.values())
            assert is_relatively_nef(cfg, result.divisor)
            assert all(
                d.coeff(v) >= result.divisor.coeff(v) >= dt.coeff(v) for v in ids
            )


class TestReduction:
    def test_fixpoint_when_nef(self):
        cfg = Configuration(chain([2, 2, 2, 3]))
        c = {"E1": 0, "E2": 0, "E3": 1, "E4": 2}
        assert coefficient_reduction(cfg, 5, c) == c

    def test_du_val_strict_decrease(self):
        cfg = Configuration(chain([2, 2]))
        c = {"E1": 1, "E2": 0}
        reduced = coefficient_reduction(cfg, 1, c)
        assert reduced == {"E1": 0, "E2": 0}
        assert any(reduced[v] < c[v] for v in c)

    def test_monotone_non_increasing(self):
        cfg = Configuration(chain([2, 2, 2, 3]))
        rng = random.Random(5)
        for _ in range(40):
            c = {f"E{i}": rng.randint(0, 3) for i in range(1, 5)}
            reduced = coefficient_reduction(cfg, 4, c)
            assert all(reduced[v] <= c[v] for v in c)
            if reduced != c:
                assert any(reduced[v] < c[v] for v in c)
            else:
                divisor = LatticeDivisor(
                    {v: Fraction(x, 4) for v, x in c.items()}, CANONICAL_ID, 1
                )
                assert is_relatively_nef(cfg, divisor)

    def test_iterate_reaches_nef_fixpoint(self):
        cfg = Configuration(chain([2, 2, 2, 3]))
        start = {"E1": 0, "E2": 1, "E3": 1, "E4": 2}  # floor(5 * i/9)
        result = iterate_reduction(cfg, 5, start)
        assert result.coeffs == {"E1": 0, "E2": 0, "E3": 1, "E4": 2}
        assert result.relatively_nef
        assert result.steps == 1

    def test_rejects_negative(self):
        cfg = Configuration(chain([2]))
        with pytest.raises(PreconditionError):
            coefficient_reduction(cfg, 1, {"E1": -1})
