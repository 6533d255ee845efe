"""Explicit nef coefficients on configurations of deep chains plus a tame part.

The setting: the minimal resolution carries some chains of shape
``[2, ..., 2, 3]`` of length ``k_i >= n2`` (resolving ``1/(2k_i+1)(1,k_i)``)
together with a remaining exceptional part ``F`` on which ``m0 K`` is
already Cartier. With ``m0`` divisible by ``2 n2 + 1`` the integer
coefficients

    c_{i,j} = m0 (j - (k_i - n2)) / (2 n2 + 1)   for k_i - n2 + 1 <= j <= k_i,
    c_{i,j} = 0 otherwise,  and  m0 * b on the F part,

make ``m0 K + sum c E`` non-negative against every exceptional curve, with
exactly one strictly positive product per chain (value ``m0/(2n2+1)`` at
``j = k_i - n2``). The products against the classified non-exceptional
curves reduce to two parameterized inequalities which this module evaluates
exactly; see :func:`external_inequalities`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Mapping, Sequence

from .dualgraph import CurveVertex, DualGraph, chain
from .errors import PluricalcError
from .ratmat import format_rational
from .zariski import CANONICAL_ID, Configuration, LatticeDivisor, divisor_dot_vertex


class NefInputError(PluricalcError):
    """Invalid divisibility, chain length, or F-part data."""


def chain_vertex_id(chain_index: int, j: int) -> str:
    """Vertex id of the j-th curve of the i-th deep chain (both 1-based)."""
    return f"E{chain_index}_{j}"


@dataclass(frozen=True)
class NefInput:
    """Assembled input: multiplier, depth cut, deep chains, and F part.

    ``chains[i]`` is the length ``k_i`` of the i-th chain, which has weights
    ``[2 x (k_i - 1), 3]`` and pullback coefficients ``j/(2 k_i + 1)``.
    ``f_graph`` carries the bounded-index part with its pullback
    coefficients declared on the vertices; ``m0`` times each must be an
    integer.
    """

    m0: int
    n2: int
    chains: tuple[int, ...]
    graph: DualGraph
    f_coeffs: dict[str, Fraction]

    @property
    def f_ids(self) -> tuple[str, ...]:
        return tuple(self.f_coeffs)

    def chain_coeff(self, chain_index: int, j: int) -> Fraction:
        """Pullback coefficient ``j/(2k+1)`` of a deep-chain vertex."""
        return Fraction(j, 2 * self.chains[chain_index - 1] + 1)

    def pullback_coeff(self, vid: str) -> Fraction:
        if vid in self.f_coeffs:
            return self.f_coeffs[vid]
        i, j = (int(part) for part in vid[1:].split("_"))
        return self.chain_coeff(i, j)


def build_input(m0: int, n2: int, chains: Sequence[int], f_graph: DualGraph | None = None) -> NefInput:
    """Assemble and validate a :class:`NefInput`.

    Requires ``(2 n2 + 1) | m0``, every chain length >= n2, and on the F
    part: declared pullback coefficients in [0, 1) with ``m0 * b`` integral.
    """
    if n2 < 1:
        raise NefInputError("n2 must be a positive integer")
    if m0 < 1 or m0 % (2 * n2 + 1) != 0:
        raise NefInputError(f"m0 = {m0} must be a positive multiple of 2*n2+1 = {2 * n2 + 1}")
    chain_lengths = tuple(int(k) for k in chains)
    if any(k < n2 for k in chain_lengths):
        raise NefInputError(f"every chain length must be >= n2 = {n2}, got {chain_lengths}")

    vertices: list[CurveVertex] = []
    edges: list[tuple[str, str, int]] = []
    for i, k in enumerate(chain_lengths, start=1):
        ids = [chain_vertex_id(i, j) for j in range(1, k + 1)]
        for j, vid in enumerate(ids, start=1):
            self_int = -3 if j == k else -2
            vertices.append(CurveVertex(vid, self_int, 0, Fraction(j, 2 * k + 1)))
        edges.extend((ids[j], ids[j + 1], 1) for j in range(k - 1))

    f_coeffs: dict[str, Fraction] = {}
    if f_graph is not None:
        taken = {v.id for v in vertices}
        for v in f_graph.vertices:
            if v.id in taken:
                raise NefInputError(f"F-part vertex id {v.id!r} clashes with a chain id")
            if v.pullback_coeff is None:
                raise NefInputError(f"F-part vertex {v.id!r} needs a declared pullback coefficient")
            b = Fraction(v.pullback_coeff)
            if not 0 <= b < 1:
                raise NefInputError(f"F-part coefficient {format_rational(b)} of {v.id!r} outside [0, 1)")
            if (m0 * b).denominator != 1:
                raise NefInputError(
                    f"m0 * b = {format_rational(m0 * b)} on {v.id!r} is not an integer; "
                    "m0 K must be Cartier along the F part"
                )
            f_coeffs[v.id] = b
        vertices.extend(f_graph.vertices)
        edges.extend(f_graph.edges)

    return NefInput(
        m0=m0,
        n2=n2,
        chains=chain_lengths,
        graph=DualGraph(tuple(vertices), tuple(edges)),
        f_coeffs=f_coeffs,
    )


def build_coeffs(inp: NefInput) -> dict[str, int]:
    """The canonical integer coefficients; zero outside the top n2 rungs.

    On chain i: ``c_j = m0 (j - (k_i - n2)) / (2 n2 + 1)`` for the last n2
    vertices, 0 before them. On the F part: ``m0 * b``. All values are
    integers by the divisibility hypotheses.
    """
    step = inp.m0 // (2 * inp.n2 + 1)
    out: dict[str, int] = {}
    for i, k in enumerate(inp.chains, start=1):
        for j in range(1, k + 1):
            offset = j - (k - inp.n2)
            out[chain_vertex_id(i, j)] = step * offset if offset > 0 else 0
    for vid, b in inp.f_coeffs.items():
        out[vid] = int(inp.m0 * b)
    return out


@dataclass(frozen=True)
class NefCertificate:
    """Exact products of ``m0 K + sum c E`` against every exceptional curve."""

    coeffs: dict[str, int]
    intersections: dict[str, Fraction]
    bound_ok: dict[str, bool]

    @property
    def all_nef(self) -> bool:
        return all(v >= 0 for v in self.intersections.values())

    @property
    def all_bounds(self) -> bool:
        return all(self.bound_ok.values())

    @property
    def positive_slots(self) -> tuple[str, ...]:
        return tuple(vid for vid, v in self.intersections.items() if v > 0)


def verify_exceptional(inp: NefInput, coeffs: Mapping[str, int]) -> NefCertificate:
    """Evaluate ``(m0 K + sum c E) . E_j`` exactly for every vertex.

    Also records, per vertex, whether ``0 <= c <= floor(m0 * b)`` holds for
    the pullback coefficient ``b`` of that vertex. For the canonical
    coefficients of :func:`build_coeffs` the products are 0 everywhere
    except one slot per chain at depth ``k_i - n2``, where the value is
    ``m0/(2n2+1)``.
    """
    cfg = Configuration(inp.graph)
    divisor = LatticeDivisor({vid: Fraction(c) for vid, c in coeffs.items()}, CANONICAL_ID, inp.m0)
    intersections = {vid: divisor_dot_vertex(cfg, divisor, vid) for vid in inp.graph.ids}
    bound_ok = {
        vid: 0 <= int(coeffs.get(vid, 0)) <= floor(inp.m0 * inp.pullback_coeff(vid))
        for vid in inp.graph.ids
    }
    return NefCertificate(
        coeffs={vid: int(coeffs.get(vid, 0)) for vid in inp.graph.ids},
        intersections=intersections,
        bound_ok=bound_ok,
    )


@dataclass(frozen=True)
class ExternalCaseReport:
    """Exact evaluation of the classified-curve inequalities.

    For a non-exceptional curve meeting ``t`` deep chains in their (-3)
    curve (and nothing else exceptional):

    * t <= 2: the product is bounded below by
      ``m0 gamma0 - sum_{i<=t} (m0 k_i/(2k_i+1) - m0 n2/(2n2+1))``, itself
      at least ``m0 gamma0 - m0/(2n2+1)``, positive once ``n2 >= 1/gamma0``.
    * t >= 3: the product is bounded below by
      ``m0 (-1 + t n2/(2n2+1))``, positive once ``n2 >= 2``.
    """

    t: int
    case: str
    value: Fraction
    worst_case: Fraction
    passed: bool
    precondition_ok: bool
    notes: tuple[str, ...]


def external_inequalities(
    n2: int,
    gamma0: Fraction,
    t: int,
    k_list: Sequence[int],
    m0: int,
) -> ExternalCaseReport:
    """Evaluate the two external-curve cases exactly with the given data.

    ``k_list`` holds the depths of the chains the curve meets (its first
    ``t`` entries are used in the t <= 2 case). The hypothesis
    ``n2 >= ceil(1/gamma0)`` is reported, not fatal.
    """
    gamma0 = Fraction(gamma0)
    if gamma0 <= 0:
        raise PluricalcError("gamma0 must be positive")
    if t < 0:
        raise PluricalcError("t must be non-negative")
    notes = []
    precondition_ok = n2 >= ceil(1 / gamma0)
    if not precondition_ok:
        notes.append(f"hypothesis n2 >= ceil(1/gamma0) = {ceil(1 / gamma0)} fails at n2 = {n2}")
    two_n2_one = 2 * n2 + 1
    if t <= 2:
        if len(k_list) < t:
            raise PluricalcError(f"t = {t} chains met but only {len(k_list)} depths supplied")
        deficit = sum(
            (Fraction(m0 * k, 2 * k + 1) - Fraction(m0 * n2, two_n2_one) for k in k_list[:t]),
            Fraction(0),
        )
        value = m0 * gamma0 - deficit
        worst = m0 * gamma0 - Fraction(m0, two_n2_one)
        case = "t<=2"
    else:
        value = m0 * (Fraction(t * n2, two_n2_one) - 1)
        worst = m0 * (Fraction(3 * n2, two_n2_one) - 1)
        case = "t>=3"
    return ExternalCaseReport(
        t=t,
        case=case,
        value=value,
        worst_case=worst,
        passed=value > 0,
        precondition_ok=precondition_ok,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class MultiplierReport:
    """Composition of the nef multiplier with the birationality constants.

    ``m1`` (the effective-birationality multiplier) is not computable from
    lattice data and must be supplied; ``m2 = m0 * m1`` and the final
    ``m = bpf_factor * m2`` with the base-point-freeness factor defaulting
    to 192.
    """

    m0: int
    m1: int
    m2: int
    bpf_factor: int
    m: int


def compose_multipliers(m0: int, m1: int, bpf_factor: int = 192) -> MultiplierReport:
    if m0 < 1 or m1 < 1 or bpf_factor < 1:
        raise PluricalcError("all multipliers must be positive integers")
    return MultiplierReport(m0=m0, m1=m1, m2=m0 * m1, bpf_factor=bpf_factor, m=bpf_factor * m0 * m1)
