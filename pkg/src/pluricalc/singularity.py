"""Cyclic quotient surface singularities and their resolution data.

The singularity ``1/n(1,q)`` resolves to a chain of rational curves whose
weights are the entries of the Hirzebruch-Jung expansion

    n/q = b1 - 1/(b2 - 1/(... - 1/br)),   all bi >= 2.

The pullback coefficients ``b_i = 1 - a(E_i)`` solve the linear system
``(K + sum b_i E_i) . E_j = 0``; on a chain this system is tridiagonal and
the solution has the closed continuant form

    1 - b_i = (P_{i-1} + Q_{i+1}) / n,

where ``P_i`` (resp. ``Q_i``) is the determinant of the first ``i`` (resp.
last ``r-i+1``) weights. This module uses the continuant form on chains and
falls back to the exact matrix solve on anything else, so the exhaustive
sweeps stay fast without ever leaving integer arithmetic.

Chain orientation: ``hj_expand`` returns the expansion of ``n/q`` as
computed; a chain and its reversal resolve the two mirror types ``1/n(1,q)``
and ``1/n(1,q')`` with ``q q' = 1 (mod n)``, so all chain comparisons in
this package are made up to reversal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .dualgraph import DualGraph, chain, k_dot_vertex
from .errors import PluricalcError
from .ratmat import is_negative_definite, solve


class InvalidTypeError(PluricalcError):
    """Not a valid cyclic quotient type (needs 1 <= q < n, gcd(n, q) = 1)."""


class NotContractibleError(PluricalcError):
    """The intersection matrix is not negative definite."""


class NonKltError(PluricalcError):
    """A computed log discrepancy is <= 0; only klt germs are supported."""


@dataclass(frozen=True)
class CyclicQuotientType:
    """The type ``1/n(1,q)`` of a cyclic quotient singularity."""

    order: int
    weight: int

    def __post_init__(self):
        n, q = self.order, self.weight
        if not (1 <= q < n):
            raise InvalidTypeError(f"need 1 <= q < n, got (n, q) = ({n}, {q})")
        if gcd(n, q) != 1:
            raise InvalidTypeError(f"gcd({n}, {q}) = {gcd(n, q)} != 1")

    @property
    def mirror(self) -> "CyclicQuotientType":
        """The type ``1/n(1,q')`` with ``q q' = 1 (mod n)`` (reversed chain)."""
        return CyclicQuotientType(self.order, pow(self.weight, -1, self.order))


@dataclass(frozen=True)
class ResolutionData:
    """Minimal resolution of a chain: graph, b-coefficients, mld, Cartier index."""

    graph: DualGraph
    coeffs: dict[str, Fraction]
    mld: Fraction
    cartier_index: int


@dataclass(frozen=True)
class UnitEquationData:
    """Solution data of ``sum_i k_i/(2k_i+1) + l/n0 = 1`` over non-negative integers.

    ``solutions`` lists the complete solution set as pairs (sorted k-tuple, l);
    ``I0`` is the union of all k values that occur, and
    ``n1 = n0 * prod_{g in I0} (2g+1)``. ``gamma0`` is the least element of
    ``{1} union {positive values of -1 + sum k_i/(2k_i+1) + l/n0}`` found in
    the documented search window (k_i <= n0^2, l <= 2 n0, at most three chain
    terms); ``gamma0_interior`` records whether that minimum was attained
    strictly inside the window.
    """

    n0: int
    solutions: tuple[tuple[tuple[int, ...], int], ...]
    I0: frozenset[int]
    n1: int
    gamma0: Fraction
    gamma0_witness: tuple[tuple[int, ...], int] | None
    gamma0_interior: bool


def hj_expand(t: CyclicQuotientType) -> list[int]:
    """Hirzebruch-Jung expansion of ``n/q``; every entry is >= 2.

    The resulting weight chain resolves ``1/n(1,q)``:
    ``graph_det(chain(hj_expand(t))) == n``.
    """
    n, q = t.order, t.weight
    out = []
    while q > 0:
        b = -(-n // q)
        out.append(b)
        n, q = q, b * q - n
    return out


def _continuants(weights: Sequence[int]) -> list[int]:
    """P[i] = determinant of the chain of the first i weights (P[0] = 1)."""
    p = [1]
    prev = 0
    for w in weights:
        p.append(w * p[-1] - prev)
        prev = p[-2]
    return p


def chain_pullback_scaled(weights: Sequence[int]) -> tuple[list[int], int]:
    """Numerators of the chain b-coefficients over the common denominator ``n``.

    Returns ``(nums, n)`` with ``b_i = nums[i]/n`` (not reduced) and
    ``n = det`` of the chain. Only valid for genus-0 chains; raises
    :class:`NotContractibleError` unless every leading continuant is
    positive, which is exactly negative definiteness in path order.
    """
    p = _continuants(weights)
    q = _continuants(list(reversed(weights)))
    r = len(weights)
    if any(x <= 0 for x in p[1:]):
        raise NotContractibleError(f"chain {list(weights)} is not negative definite")
    n = p[r]
    nums = [n - (p[i] + q[r - 1 - i]) for i in range(r)]
    return nums, n


def chain_pullback_coeffs(weights: Sequence[int]) -> list[Fraction]:
    """Exact b-coefficients of a genus-0 chain, as reduced fractions."""
    nums, n = chain_pullback_scaled(weights)
    return [Fraction(num, n) for num in nums]


def chain_cartier_index(weights: Sequence[int]) -> int:
    """Least r >= 1 such that all ``r * b_i`` are integers (lcm of denominators)."""
    nums, n = chain_pullback_scaled(weights)
    if not nums:
        return 1
    return lcm(*(n // gcd(num, n) for num in nums))


def discrepancy_coeffs(g: DualGraph) -> dict[str, Fraction]:
    """The unique ``b`` with ``(K + sum b_i E_i) . E_j = 0`` for all j.

    ``K . E_j`` comes from adjunction with the declared genus. Chains of
    genus-0 curves use the continuant closed form; general graphs use the
    exact linear solve. Raises :class:`NotContractibleError` when the
    intersection matrix is not negative definite.
    """
    order = g.chain_order()
    if order is not None and all(v.genus == 0 for v in g.vertices):
        weights = [g.vertex(vid).weight for vid in order]
        coeffs = chain_pullback_coeffs(weights)
        return {vid: coeffs[i] for i, vid in enumerate(order)}
    matrix = g.intersection_matrix()
    if not is_negative_definite(matrix):
        raise NotContractibleError("intersection matrix is not negative definite")
    rhs = [-k_dot_vertex(g, v.id) for v in g.vertices]
    solution = solve(matrix, rhs)
    return {v.id: solution[i] for i, v in enumerate(g.vertices)}


def mld_of(g: DualGraph) -> Fraction:
    """Minimal log discrepancy read off the resolution chain, capped at 1.

    Returns ``min(1, min_i (1 - b_i))``; the empty graph gives 1. Raises
    :class:`NonKltError` when some log discrepancy is <= 0.
    """
    if not g.vertices:
        return Fraction(1)
    coeffs = discrepancy_coeffs(g)
    log_discrepancies = [1 - b for b in coeffs.values()]
    worst = min(log_discrepancies)
    if worst <= 0:
        raise NonKltError(f"minimal log discrepancy {worst} <= 0: germ is not klt")
    return min(Fraction(1), worst)


def cartier_index_K(t: CyclicQuotientType, cross_check: bool = True) -> int:
    """Cartier index of K at ``1/n(1,q)``: the least r with ``r(q+1) = 0 (mod n)``.

    Equals ``n / gcd(n, q+1)``. With ``cross_check`` the value is verified
    against the lcm of the denominators of the resolution coefficients.
    """
    n, q = t.order, t.weight
    index = n // gcd(n, q + 1)
    if cross_check:
        from_chain = chain_cartier_index(hj_expand(t))
        if from_chain != index:
            raise PluricalcError(
                f"Cartier index mismatch for 1/{n}(1,{q}): n/gcd(n,q+1) = {index}, "
                f"coefficient denominators give {from_chain}"
            )
    return index


def resolve(t: CyclicQuotientType) -> ResolutionData:
    """Full resolution data of ``1/n(1,q)``: chain graph, coefficients, mld, index."""
    weights = hj_expand(t)
    coeffs = chain_pullback_coeffs(weights)
    g = chain(weights).with_coeffs({f"E{i + 1}": b for i, b in enumerate(coeffs)})
    log_discrepancies = [1 - b for b in coeffs] or [Fraction(1)]
    mld = min(Fraction(1), min(log_discrepancies))
    return ResolutionData(
        graph=g,
        coeffs={f"E{i + 1}": b for i, b in enumerate(coeffs)},
        mld=mld,
        cartier_index=cartier_index_K(t, cross_check=False),
    )


# -- the unit equation of the Cartier-index bound ---------------------------


def _unit_equation_solutions(n0: int) -> list[tuple[tuple[int, ...], int]]:
    """Complete solution set of ``sum_i k_i/(2k_i+1) + l/n0 = 1``.

    Written with t_i = 2 k_i + 1 the equation becomes
    ``m/2 - sum_i 1/(2 t_i) + l/n0 = 1``. Each chain term lies in
    [1/3, 1/2), so m <= 3; m = 3 forces (1,1,1) with l = 0, and for
    m in {1, 2} the t_i are bounded by n0 (resp. n0 * t1), making the
    search finite without any heuristic cutoff.
    """
    solutions: list[tuple[tuple[int, ...], int]] = [((), n0)]
    # One chain term: t (2l - n0) = n0 with t odd >= 3.
    for l in range(n0 // 2 + 1, (2 * n0) // 3 + 1):
        d = 2 * l - n0
        if d > 0 and n0 % d == 0:
            t = n0 // d
            if t >= 3 and t % 2 == 1:
                solutions.append((((t - 1) // 2,), l))
    # Two chain terms: 1/t1 + 1/t2 = 2l/n0 with t1 <= t2 odd >= 3.
    for l in range(1, n0 // 3 + 1):
        target = Fraction(2 * l, n0)
        t1 = 3
        while Fraction(1, t1) * 2 >= target:
            remainder = target - Fraction(1, t1)
            if remainder > 0 and remainder.numerator == 1:
                t2 = remainder.denominator
                if t2 >= t1 and t2 % 2 == 1:
                    solutions.append((((t1 - 1) // 2, (t2 - 1) // 2), l))
            t1 += 2
    # Three chain terms sum to at least 1, with equality only at (1,1,1).
    solutions.append(((1, 1, 1), 0))
    return sorted(set(solutions))


def _gamma0_search(n0: int, k_cap: int, l_cap: int):
    """Least positive value of ``-1 + sum k_i/(2k_i+1) + l/n0`` in the window.

    The window is m <= 3 chain terms with k_i <= k_cap and l <= l_cap.
    Restricting to m <= 3 loses nothing: any value with four or more chain
    terms is >= 1/3, and the window always contains a value <= 1/3
    (l = n0 + 1 alone gives 1/n0 for n0 >= 3; (k, l) = (1, 1) gives exactly
    1/3 otherwise). For fixed l and all chain terms but the last, the value
    is increasing in the last t = 2k+1, so only the smallest admissible t
    needs to be inspected.
    """
    t_cap = 2 * k_cap + 1
    best: tuple[Fraction, tuple[int, ...], int] | None = None

    def offer(value: Fraction, ks: tuple[int, ...], l: int):
        nonlocal best
        if value > 0 and (best is None or value < best[0]):
            best = (value, ks, l)

    def best_last_term(c: Fraction, t_min: int, ks: tuple[int, ...], l: int):
        # value = c - 1/(2t); increasing in t, so scan the first odd t > 1/(2c).
        if c <= 0:
            return
        t = max(t_min, 3)
        if Fraction(1, 2 * t) >= c:
            # smallest odd t with 1/(2t) < c
            t = max(t, (Fraction(1, 2) / c).__ceil__() | 1)
            while Fraction(1, 2 * t) >= c:
                t += 2
        if t <= t_cap:
            offer(c - Fraction(1, 2 * t), ks + ((t - 1) // 2,), l)

    for l in range(0, l_cap + 1):
        base = Fraction(l, n0)
        offer(base - 1, (), l)
        best_last_term(base - Fraction(1, 2), 3, (), l)
        for t1 in range(3, t_cap + 1, 2):
            c1 = base - Fraction(1, 2 * t1)
            best_last_term(c1, t1, ((t1 - 1) // 2,), l)
            for t2 in range(t1, t_cap + 1, 2):
                c2 = base + Fraction(1, 2) - Fraction(1, 2 * t1) - Fraction(1, 2 * t2)
                best_last_term(c2, t2, ((t1 - 1) // 2, (t2 - 1) // 2), l)

    if best is None or best[0] >= 1:
        return Fraction(1), None, True
    value, ks, l = best
    interior = all(k < k_cap for k in ks) and l < l_cap
    return value, (ks, l), interior


def solve_unit_equation(n0: int) -> UnitEquationData:
    """Solve the unit equation at ``n0`` and derive (I0, n1, gamma0).

    The solution set itself is computed exactly and completely (see
    :func:`_unit_equation_solutions`); gamma0 is a bounded search whose
    window (k_i <= n0^2, l <= 2 n0) is reported through
    ``gamma0_interior``. Desk scale: the gamma0 scan is cubic in n0^2, so
    keep n0 modest (n0 <= 20 runs in seconds).
    """
    if n0 < 1:
        raise PluricalcError(f"n0 must be a positive integer, got {n0}")
    solutions = tuple(_unit_equation_solutions(n0))
    i0 = frozenset(k for ks, _ in solutions for k in ks)
    n1 = n0
    for g in sorted(i0):
        n1 *= 2 * g + 1
    gamma0, witness, interior = _gamma0_search(n0, k_cap=n0 * n0, l_cap=2 * n0)
    return UnitEquationData(
        n0=n0,
        solutions=solutions,
        I0=i0,
        n1=n1,
        gamma0=gamma0,
        gamma0_witness=witness,
        gamma0_interior=interior,
    )


# -- desk-scale chain classifier --------------------------------------------


@dataclass(frozen=True)
class ChainRecord:
    """One enumerated chain (canonical up to reversal) with its invariants."""

    weights: tuple[int, ...]
    hj_type: tuple[int, int]
    mld: Fraction
    cartier_index: int


@dataclass(frozen=True)
class ChainClassification:
    """Classifier output: chains with mld above the cut, split by shape.

    ``tail_family`` holds the chains of shape [2, ..., 2, 3] (up to
    reversal), i.e. the resolutions of ``1/(2k+1)(1,k)``; these are the one
    family whose Cartier index grows without bound at this mld level.
    ``others`` holds everything else, and ``max_cartier_others`` is the
    finite index bound observed on that part.
    """

    epsilon: Fraction
    max_weight: int
    weight_cap: int
    max_len: int
    tail_family: tuple[ChainRecord, ...]
    others: tuple[ChainRecord, ...]
    max_cartier_others: int | None

    @property
    def records(self) -> tuple[ChainRecord, ...]:
        return self.tail_family + self.others


def is_tail_chain(weights: Sequence[int]) -> bool:
    """Whether a chain is [2, ..., 2, 3] up to reversal (type 1/(2k+1)(1,k))."""
    w = list(weights)
    if not w:
        return False
    if w[0] == 3:
        w.reverse()
    return w[-1] == 3 and all(x == 2 for x in w[:-1])


def canonical_chain(weights: Sequence[int]) -> tuple[int, ...]:
    """Representative of a chain up to reversal (lexicographic minimum)."""
    w = tuple(weights)
    return min(w, w[::-1])


def classify_chains(epsilon: Fraction, max_weight: int, max_len: int) -> ChainClassification:
    """Enumerate every chain with mld > epsilon within the weight/length box.

    The enumeration appends weights on the right and prunes as soon as the
    mld drops to epsilon or below. That pruning is exhaustive: appending a
    vertex to a chain can only increase the existing b-coefficients (the
    inverse of the negated intersection matrix is entrywise non-negative)
    and so can only decrease the mld. Weights above ``2/epsilon`` are
    excluded up front, which is the epsilon-lc weight bound and is implied
    by the mld cut anyway.

    Chains are reported up to reversal. Each record carries the cyclic
    quotient type ``1/n(1,q)`` the chain resolves, its mld and the Cartier
    index of K there.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise PluricalcError("epsilon must be positive")
    weight_cap = min(max_weight, int(Fraction(2) / epsilon))
    seen: dict[tuple[int, ...], ChainRecord] = {}

    def visit(weights: list[int]):
        try:
            nums, n = chain_pullback_scaled(weights)
        except NotContractibleError:
            return
        # mld > epsilon  <=>  n - max(nums) > epsilon * n, exactly.
        worst = max(nums) if nums else 0
        if Fraction(n - worst, n) <= epsilon:
            return
        key = canonical_chain(weights)
        if key not in seen:
            seen[key] = ChainRecord(
                weights=key,
                hj_type=(n, _continuants(list(key[1:]))[-1]),
                mld=min(Fraction(1), Fraction(n - worst, n)),
                cartier_index=lcm(*(n // gcd(num, n) for num in nums)),
            )
        if len(weights) < max_len:
            for w in range(2, weight_cap + 1):
                weights.append(w)
                visit(weights)
                weights.pop()

    for w in range(2, weight_cap + 1):
        visit([w])

    tail, others = [], []
    for record in sorted(seen.values(), key=lambda r: (len(r.weights), r.weights)):
        (tail if is_tail_chain(record.weights) else others).append(record)
    return ChainClassification(
        epsilon=epsilon,
        max_weight=max_weight,
        weight_cap=weight_cap,
        max_len=max_len,
        tail_family=tuple(tail),
        others=tuple(others),
        max_cartier_others=max((r.cartier_index for r in others), default=None),
    )
