"""Zariski decomposition over a declared finite curve universe.

A :class:`Configuration` fixes the universe: the exceptional curves of a
dual graph (with their full intersection matrix) plus external classes whose
products against the vertices are declared data. Divisors are formal sums
``mult * base + sum_i c_i E_i`` where the base is either an external class
or the canonical class ``K`` (whose vertex products come from adjunction).

"Nef" in this module always means *relatively* nef: non-negative against
every vertex and every external class flagged as a test curve. Global
nefness on an actual surface is not decidable from finite lattice data.

The decomposition itself runs a growing-support iteration: start with the
curves the divisor fails against, solve the exact linear system on that
support, re-test, and enlarge. The support only grows, every solve is
exact, and each grown support must stay negative definite or the input is
rejected as not relatively pseudo-effective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Mapping

from .dualgraph import DualGraph, ExternalClass, adjacency, k_dot_vertex
from .errors import PluricalcError
from .ratmat import is_negative_definite, solve

CANONICAL_ID = "K"


class DecompositionError(PluricalcError):
    """The divisor admits no Zariski decomposition over this universe."""


class PreconditionError(PluricalcError):
    """An operation's input hypothesis is violated."""


@dataclass(frozen=True)
class Configuration:
    """A curve universe: dual-graph vertices plus declared external classes."""

    graph: DualGraph
    externals: tuple[ExternalClass, ...] = ()

    def __post_init__(self):
        ids = [e.id for e in self.externals]
        if len(set(ids)) != len(ids):
            raise PluricalcError("duplicate external ids")
        clash = set(ids) & set(self.graph.ids) | ({CANONICAL_ID} & (set(ids) | set(self.graph.ids)))
        if clash:
            raise PluricalcError(f"reserved or clashing ids: {sorted(clash)}")

    def external(self, ext_id: str) -> ExternalClass:
        for e in self.externals:
            if e.id == ext_id:
                return e
        raise PluricalcError(f"no external class {ext_id!r}")

    def test_curves(self) -> tuple[ExternalClass, ...]:
        return tuple(e for e in self.externals if e.test_curve)


@dataclass(frozen=True)
class LatticeDivisor:
    """``base_mult * base + sum coeffs[v] * v`` over a configuration's vertices.

    ``base_id`` may be ``"K"`` (canonical class), an external id, or None.
    Missing vertex coefficients are zero.
    """

    coeffs: Mapping[str, Fraction] = field(default_factory=dict)
    base_id: str | None = None
    base_mult: int = 1

    def coeff(self, vid: str) -> Fraction:
        return Fraction(self.coeffs.get(vid, 0))

    def with_coeffs(self, coeffs: Mapping[str, Fraction]) -> "LatticeDivisor":
        return LatticeDivisor(dict(coeffs), self.base_id, self.base_mult)

    def same_base(self, other: "LatticeDivisor") -> bool:
        if self.base_id is None and other.base_id is None:
            return True
        return self.base_id == other.base_id and self.base_mult == other.base_mult


def divisor_dot_vertex(cfg: Configuration, d: LatticeDivisor, vid: str) -> Fraction:
    """Exact product ``D . E_vid`` from the declared intersection data."""
    total = Fraction(0)
    if d.base_id == CANONICAL_ID:
        total += d.base_mult * k_dot_vertex(cfg.graph, vid)
    elif d.base_id is not None:
        total += d.base_mult * cfg.external(d.base_id).dot(vid)
    coeffs = d.coeffs
    self_coeff = coeffs.get(vid, 0)
    if self_coeff:
        total += Fraction(self_coeff) * cfg.graph.vertex(vid).self_intersection
    for uid, mult in adjacency(cfg.graph)[vid]:
        c = coeffs.get(uid, 0)
        if c:
            total += Fraction(c) * mult
    return total


def divisor_dot_external(cfg: Configuration, d: LatticeDivisor, ext: ExternalClass) -> Fraction:
    """Exact product ``D . B`` against an external class.

    Defined when the base is K (uses the declared ``K . B``), the class
    itself (uses ``B^2``), or absent; products between two distinct
    external classes are not declared data and raise.
    """
    if d.base_id is None:
        base_part = Fraction(0)
    elif d.base_id == CANONICAL_ID:
        base_part = d.base_mult * Fraction(ext.k_dot)
    elif d.base_id == ext.id:
        if ext.self_sq is None:
            raise PreconditionError(f"external class {ext.id!r} has no declared self-intersection")
        base_part = d.base_mult * Fraction(ext.self_sq)
    else:
        raise PreconditionError(
            f"product of external base {d.base_id!r} against {ext.id!r} is not declared data"
        )
    return base_part + sum((Fraction(c) * ext.dot(uid) for uid, c in d.coeffs.items()), Fraction(0))


def is_relatively_nef(cfg: Configuration, d: LatticeDivisor) -> bool:
    """Non-negative against every vertex and every test-curve external."""
    if any(divisor_dot_vertex(cfg, d, vid) < 0 for vid in cfg.graph.ids):
        return False
    return all(divisor_dot_external(cfg, d, e) >= 0 for e in cfg.test_curves())


@dataclass(frozen=True)
class ZariskiResult:
    """Decomposition ``D = P + N`` with its support and the support trace."""

    P: LatticeDivisor
    N: LatticeDivisor
    support: frozenset[str]
    rounds: tuple[tuple[str, ...], ...]


def zariski_decompose(cfg: Configuration, d: LatticeDivisor) -> ZariskiResult:
    """Relative Zariski decomposition of ``d`` over the vertex universe.

    ``N >= 0`` is supported on vertices, its support is negative definite,
    ``P = D - N`` is orthogonal to the support and non-negative against
    every vertex. When the whole universe is negative definite this always
    succeeds; otherwise a grown support that fails definiteness (or a
    negative solved coefficient) raises :class:`DecompositionError`.
    """
    ids = list(cfg.graph.ids)
    index = {vid: i for i, vid in enumerate(ids)}
    matrix = cfg.graph.intersection_matrix()
    d_dots = {vid: divisor_dot_vertex(cfg, d, vid) for vid in ids}

    support: list[str] = sorted((vid for vid in ids if d_dots[vid] < 0), key=index.__getitem__)
    rounds: list[tuple[str, ...]] = []
    coeffs: dict[str, Fraction] = {}
    while True:
        rounds.append(tuple(support))
        if support:
            sub_idx = [index[vid] for vid in support]
            sub = matrix.submatrix(sub_idx, sub_idx)
            if not is_negative_definite(sub):
                raise DecompositionError(
                    f"support {support} is not negative definite; divisor is not "
                    "relatively pseudo-effective over this universe"
                )
            solution = solve(sub, [d_dots[vid] for vid in support])
            coeffs = dict(zip(support, solution))
            if any(c < 0 for c in coeffs.values()):
                raise DecompositionError(
                    "negative part acquired a negative coefficient; divisor is not "
                    "relatively pseudo-effective over this universe"
                )
        else:
            coeffs = {}
        n_div = LatticeDivisor(coeffs)
        violations = [
            vid
            for vid in ids
            if vid not in coeffs and d_dots[vid] - divisor_dot_vertex(cfg, n_div, vid) < 0
        ]
        if not violations:
            break
        support = sorted(set(support) | set(violations), key=index.__getitem__)

    p_coeffs = {vid: d.coeff(vid) - coeffs.get(vid, Fraction(0)) for vid in ids}
    p_div = LatticeDivisor(p_coeffs, d.base_id, d.base_mult)
    n_support = frozenset(vid for vid, c in coeffs.items() if c != 0)
    return ZariskiResult(P=p_div, N=LatticeDivisor(coeffs), support=n_support, rounds=tuple(rounds))


def check_monotone(cfg: Configuration, d: LatticeDivisor, d_tilde: LatticeDivisor) -> bool:
    """Whether the positive part of ``d`` dominates a nef minorant coefficientwise.

    Preconditions (raise :class:`PreconditionError`): ``d`` and ``d_tilde``
    share the same base, ``d - d_tilde >= 0`` on vertex coefficients, and
    ``d_tilde`` is relatively nef. Under those hypotheses the result is
    always True; the function computes it rather than assuming it.
    """
    if not d.same_base(d_tilde):
        raise PreconditionError("divisors must share the same base part")
    for vid in cfg.graph.ids:
        if d.coeff(vid) < d_tilde.coeff(vid):
            raise PreconditionError(f"d - d_tilde has negative coefficient on {vid!r}")
    if not is_relatively_nef(cfg, d_tilde):
        raise PreconditionError("d_tilde is not relatively nef")
    p = zariski_decompose(cfg, d).P
    return all(p.coeff(vid) >= d_tilde.coeff(vid) for vid in cfg.graph.ids)


@dataclass(frozen=True)
class FloorLoopResult:
    """Outcome of the floor-rounding loop.

    ``defines_birational_map`` is an uninterpreted bookkeeping flag: whether
    the input's linear system defines a birational map is not decidable
    from lattice data, but the property survives passing to the floored
    positive part, so the declared flag carries over to the output as-is.
    """

    divisor: LatticeDivisor
    steps: int
    trace: tuple[dict[str, Fraction], ...]
    defines_birational_map: bool


def floor_round_loop(
    cfg: Configuration,
    d: LatticeDivisor,
    d_tilde: LatticeDivisor,
    defines_birational_map: bool = False,
) -> FloorLoopResult:
    """Iterate ``D <- floor(P(D))`` until the negative part vanishes.

    Floors apply to vertex coefficients only; the base part is integral by
    hypothesis and untouched. Requires integer vertex coefficients on ``d``,
    ``d >= d_tilde`` coefficientwise with the same base, and ``d_tilde``
    relatively nef. Returns a relatively nef ``D'`` with
    ``d >= D' >= d_tilde``; the number of floor steps never exceeds the
    coefficient sum of ``d - d_tilde``.
    """
    for vid in cfg.graph.ids:
        if d.coeff(vid).denominator != 1:
            raise PreconditionError(f"coefficient of {vid!r} is not an integer")
    if not d.same_base(d_tilde):
        raise PreconditionError("divisors must share the same base part")
    for vid in cfg.graph.ids:
        if d.coeff(vid) < d_tilde.coeff(vid):
            raise PreconditionError(f"d - d_tilde has negative coefficient on {vid!r}")
    if not is_relatively_nef(cfg, d_tilde):
        raise PreconditionError("d_tilde is not relatively nef")

    current = d
    steps = 0
    trace = [dict(current.coeffs)]
    while True:
        result = zariski_decompose(cfg, current)
        if all(c == 0 for c in result.N.coeffs.values()):
            return FloorLoopResult(
                divisor=current,
                steps=steps,
                trace=tuple(trace),
                defines_birational_map=defines_birational_map,
            )
        floored = {vid: Fraction(floor(result.P.coeff(vid))) for vid in cfg.graph.ids}
        current = current.with_coeffs(floored)
        steps += 1
        trace.append(dict(current.coeffs))


def coefficient_reduction(cfg: Configuration, m: int, c: Mapping[str, int]) -> dict[str, int]:
    """One reduction step ``c_i -> floor(c_i - m b_i)`` toward a relatively nef divisor.

    ``b`` is the relative negative part of ``K + sum (c_i/m) E_i`` over the
    vertex universe. The step is the identity exactly when that divisor is
    already relatively nef against the vertices; otherwise it strictly
    decreases at least one coordinate and never increases any.

    Coefficients must be non-negative integers. (The canonical use starts
    from ``c_i <= floor(m * b_i^max)`` with ``b^max`` the pullback
    coefficients of the universe, but the step itself does not need that
    upper bound, and on a universe of weight >= 2 curves the output stays
    non-negative automatically.)
    """
    if m < 1:
        raise PreconditionError("m must be a positive integer")
    values: dict[str, int] = {}
    for vid in cfg.graph.ids:
        ci = c.get(vid, 0)
        if ci != int(ci):
            raise PreconditionError(f"coefficient of {vid!r} is not an integer")
        ci = int(ci)
        if ci < 0:
            raise PreconditionError(f"coefficient {ci} of {vid!r} is negative")
        values[vid] = ci
    divisor = LatticeDivisor({vid: Fraction(ci, m) for vid, ci in values.items()}, CANONICAL_ID, 1)
    negative = zariski_decompose(cfg, divisor).N
    return {vid: floor(values[vid] - m * negative.coeff(vid)) for vid in cfg.graph.ids}


@dataclass(frozen=True)
class ReductionResult:
    """Fixpoint of the coefficient-reduction loop with its trace.

    ``fixed_part_hypothesis`` echoes the declared (unverifiable from
    lattice data) hypothesis that the fixed part of the corresponding
    linear system sits on the exceptional locus; the loop's interpretation
    as a fixed-part statement is only as good as that flag.
    """

    coeffs: dict[str, int]
    steps: int
    trace: tuple[dict[str, int], ...]
    relatively_nef: bool
    fixed_part_hypothesis: bool


def iterate_reduction(
    cfg: Configuration,
    m: int,
    c: Mapping[str, int],
    fixed_part_on_exceptional: bool = True,
) -> ReductionResult:
    """Run :func:`coefficient_reduction` to its fixpoint.

    Terminates because each non-fixpoint step strictly decreases the
    (non-negative) coefficient sum. The fixpoint divisor
    ``K + sum (c_i/m) E_i`` is relatively nef against the vertices; whether
    it also clears the flagged test curves is reported separately.
    """
    current = {vid: int(c.get(vid, 0)) for vid in cfg.graph.ids}
    trace = [dict(current)]
    steps = 0
    while True:
        reduced = coefficient_reduction(cfg, m, current)
        if reduced == current:
            divisor = LatticeDivisor({v: Fraction(x, m) for v, x in current.items()}, CANONICAL_ID, 1)
            return ReductionResult(
                coeffs=current,
                steps=steps,
                trace=tuple(trace),
                relatively_nef=is_relatively_nef(cfg, divisor),
                fixed_part_hypothesis=fixed_part_on_exceptional,
            )
        current = reduced
        steps += 1
        trace.append(dict(current))
