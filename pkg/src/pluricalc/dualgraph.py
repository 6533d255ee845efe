"""Weighted dual graphs of curve configurations on smooth surfaces.

A vertex is a curve with a declared self-intersection number (its weight is
the negation), a genus, and an optional pullback coefficient ``b`` used for
discrepancy bookkeeping. Edges carry an intersection multiplicity. Graphs
are immutable values: mutations (blow-ups, splitting) return new graphs.

Conventions:

* ``K . E`` is always derived from adjunction, ``K . E = 2g - 2 - E^2``.
* The determinant of a graph is the determinant of the *negated*
  intersection matrix; the empty graph has determinant 1.
* Chains are considered up to reversal wherever they are compared with a
  Hirzebruch-Jung expansion, since a chain and its mirror resolve the two
  dual types ``1/n(1,q)`` and ``1/n(1,q')`` with ``q q' = 1 (mod n)``.
* Weight-1 and weight-0 vertices are allowed in general graphs (blow-ups
  create (-1)-curves); only explicit minimal-resolution validation insists
  on weights >= 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import PluricalcError
from .ratmat import RatMatrix, det, format_rational, parse_rational


class GraphError(PluricalcError):
    """Malformed graph data or an operation on missing vertices/edges."""


class TangentialBlowUpError(PluricalcError):
    """blow_up_edge refuses edges of multiplicity >= 2 (tangential contact)."""


@dataclass(frozen=True)
class CurveVertex:
    """A curve in a configuration: id, self-intersection, genus, optional b-coefficient."""

    id: str
    self_intersection: int
    genus: int = 0
    pullback_coeff: Fraction | None = None

    def __post_init__(self):
        if self.genus < 0:
            raise GraphError(f"vertex {self.id!r} has negative genus")

    @property
    def weight(self) -> int:
        """Display weight ``e = -C^2``."""
        return -self.self_intersection

    @property
    def k_dot(self) -> Fraction:
        """``K . C`` by adjunction: ``2g - 2 - C^2``."""
        return Fraction(2 * self.genus - 2 - self.self_intersection)


@dataclass(frozen=True)
class DualGraph:
    """Weighted multigraph of curves; edges are ``(id, id, multiplicity)``."""

    vertices: tuple[CurveVertex, ...]
    edges: tuple[tuple[str, str, int], ...] = ()

    def __post_init__(self):
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate vertex ids")
        index = {vid: i for i, vid in enumerate(ids)}
        seen: set[frozenset[str]] = set()
        normalized = []
        for a, b, mult in self.edges:
            if a not in index or b not in index:
                raise GraphError(f"edge ({a!r}, {b!r}) references an unknown vertex")
            if a == b:
                raise GraphError(f"self-loop at {a!r}")
            if mult < 1:
                raise GraphError(f"edge ({a!r}, {b!r}) has multiplicity {mult} < 1")
            key = frozenset((a, b))
            if key in seen:
                raise GraphError(f"duplicate edge between {a!r} and {b!r}")
            seen.add(key)
            if index[a] > index[b]:
                a, b = b, a
            normalized.append((a, b, mult))
        object.__setattr__(self, "edges", tuple(normalized))

    # -- basic access ------------------------------------------------------

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    def index_of(self, vid: str) -> int:
        index = _vertex_index(self)
        if vid not in index:
            raise GraphError(f"no vertex {vid!r}")
        return index[vid]

    def vertex(self, vid: str) -> CurveVertex:
        return self.vertices[self.index_of(vid)]

    def weights(self) -> tuple[int, ...]:
        return tuple(v.weight for v in self.vertices)

    def multiplicity(self, a: str, b: str) -> int:
        key = frozenset((a, b))
        for u, v, mult in self.edges:
            if frozenset((u, v)) == key:
                return mult
        return 0

    def neighbors(self, vid: str) -> dict[str, int]:
        out: dict[str, int] = {}
        for a, b, mult in self.edges:
            if a == vid:
                out[b] = mult
            elif b == vid:
                out[a] = mult
        return out

    def coeffs(self) -> dict[str, Fraction]:
        """Declared pullback coefficients; raises if any vertex lacks one."""
        out = {}
        for v in self.vertices:
            if v.pullback_coeff is None:
                raise GraphError(f"vertex {v.id!r} carries no pullback coefficient")
            out[v.id] = v.pullback_coeff
        return out

    def with_coeffs(self, coeffs: Mapping[str, Fraction]) -> "DualGraph":
        """Copy of the graph with pullback coefficients installed."""
        new_vertices = tuple(
            replace(v, pullback_coeff=Fraction(coeffs[v.id])) if v.id in coeffs else v
            for v in self.vertices
        )
        return DualGraph(new_vertices, self.edges)

    # -- intersection theory -----------------------------------------------

    def intersection_matrix(self) -> RatMatrix:
        """Symmetric matrix with ``C_i^2`` on the diagonal and ``C_i . C_j`` off it."""
        n = len(self.vertices)
        index = {v.id: i for i, v in enumerate(self.vertices)}
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i, v in enumerate(self.vertices):
            rows[i][i] = Fraction(v.self_intersection)
        for a, b, mult in self.edges:
            i, j = index[a], index[b]
            rows[i][j] = rows[j][i] = Fraction(mult)
        return RatMatrix.from_rows(rows)

    def chain_order(self) -> tuple[str, ...] | None:
        """Vertex ids in path order when the graph is a simple chain, else None.

        A chain here is a connected simple path with every edge of
        multiplicity 1 (the empty graph and the one-vertex graph count).
        The orientation starts at the endpoint that comes first in vertex
        order, so the result is deterministic.
        """
        n = len(self.vertices)
        if n == 0:
            return ()
        if n == 1:
            return (self.vertices[0].id,)
        if len(self.edges) != n - 1 or any(mult != 1 for _, _, mult in self.edges):
            return None
        adjacency = {v.id: [] for v in self.vertices}
        for a, b, _ in self.edges:
            adjacency[a].append(b)
            adjacency[b].append(a)
        degrees = {vid: len(nbrs) for vid, nbrs in adjacency.items()}
        ends = [v.id for v in self.vertices if degrees[v.id] == 1]
        if len(ends) != 2 or any(d > 2 for d in degrees.values()):
            return None
        order = [ends[0]]
        prev = None
        while len(order) < n:
            nxt = [u for u in adjacency[order[-1]] if u != prev]
            if len(nxt) != 1:
                return None
            prev = order[-1]
            order.append(nxt[0])
        return tuple(order)


def _vertex_index(g: DualGraph) -> dict[str, int]:
    # Memoized on the instance: graphs are immutable, and hashing a large
    # graph on every lookup would dominate the dot-product loops.
    cached = g.__dict__.get("_index_cache")
    if cached is None:
        cached = {v.id: i for i, v in enumerate(g.vertices)}
        object.__setattr__(g, "_index_cache", cached)
    return cached


def adjacency(g: DualGraph) -> dict[str, tuple[tuple[str, int], ...]]:
    """Neighbor lists with multiplicities, memoized per (immutable) graph."""
    cached = g.__dict__.get("_adjacency_cache")
    if cached is None:
        lists: dict[str, list[tuple[str, int]]] = {v.id: [] for v in g.vertices}
        for a, b, mult in g.edges:
            lists[a].append((b, mult))
            lists[b].append((a, mult))
        cached = {vid: tuple(nbrs) for vid, nbrs in lists.items()}
        object.__setattr__(g, "_adjacency_cache", cached)
    return cached


def chain(weights: Sequence[int], prefix: str = "E", start: int = 1) -> DualGraph:
    """Path graph with ``self_intersection = -weights[i]``; ids ``E1, E2, ...``.

    The empty weight list gives the empty graph (determinant 1).
    """
    vertices = tuple(
        CurveVertex(f"{prefix}{start + i}", -int(w)) for i, w in enumerate(weights)
    )
    edges = tuple(
        (vertices[i].id, vertices[i + 1].id, 1) for i in range(len(vertices) - 1)
    )
    return DualGraph(vertices, edges)


def _chain_continuants(weights: Sequence[int]) -> list[int]:
    """Leading continuants P[i] = det of the first i weights; P[0] = 1."""
    p = [1, weights[0] if weights else 1]
    for w in weights[1:]:
        p.append(w * p[-1] - p[-2])
    return p if weights else [1]


def graph_det(g: DualGraph) -> Fraction:
    """Determinant of the negated intersection matrix; 1 on the empty graph.

    Chains are evaluated through the three-term continuant recursion
    ``det([w1..wr]) = w1 det([w2..wr]) - det([w3..wr])``; everything else
    falls back to the exact matrix determinant.
    """
    order = g.chain_order()
    if order is not None:
        weights = [g.vertex(vid).weight for vid in order]
        return Fraction(_chain_continuants(weights)[-1])
    return det(g.intersection_matrix().neg())


def k_dot_vertex(g: DualGraph, vid: str) -> Fraction:
    """``K . E`` for a vertex, from adjunction with its declared genus."""
    return g.vertex(vid).k_dot


def blow_up_edge(g: DualGraph, edge: tuple[str, str], new_id: str | None = None) -> DualGraph:
    """Blow up the intersection point of two curves meeting transversally once.

    The new (-1)-curve picks up pullback coefficient ``b_i + b_j - 1`` and an
    edge to each old endpoint; the endpoints' self-intersections drop by 1
    and their mutual edge disappears. Requires multiplicity 1 (a tangential
    intersection cannot be separated by a single blow-up of this model) and
    declared coefficients on both endpoints.
    """
    a, b = edge
    mult = g.multiplicity(a, b)
    if mult == 0:
        raise GraphError(f"no edge between {a!r} and {b!r}")
    if mult > 1:
        raise TangentialBlowUpError(
            f"edge ({a!r}, {b!r}) has multiplicity {mult}; only transversal single intersections are supported"
        )
    va, vb = g.vertex(a), g.vertex(b)
    if va.pullback_coeff is None or vb.pullback_coeff is None:
        raise GraphError("both endpoints need pullback coefficients before a blow-up")
    if new_id is None:
        taken = set(g.ids)
        counter = 1
        while f"C{counter}" in taken:
            counter += 1
        new_id = f"C{counter}"
    elif new_id in g.ids:
        raise GraphError(f"vertex id {new_id!r} already taken")
    new_vertex = CurveVertex(new_id, -1, 0, va.pullback_coeff + vb.pullback_coeff - 1)
    vertices = []
    for v in g.vertices:
        if v.id in (a, b):
            v = replace(v, self_intersection=v.self_intersection - 1)
        vertices.append(v)
    vertices.append(new_vertex)
    edges = [e for e in g.edges if frozenset((e[0], e[1])) != frozenset((a, b))]
    edges.append((a, new_id, 1))
    edges.append((b, new_id, 1))
    return DualGraph(tuple(vertices), tuple(edges))


def split_at(g: DualGraph, vid: str) -> list[DualGraph]:
    """Connected components of ``g`` after deleting a vertex and its edges.

    Components are returned in order of their first vertex, with vertex data
    (including coefficients) preserved.
    """
    g.index_of(vid)
    remaining = [v for v in g.vertices if v.id != vid]
    edges = [e for e in g.edges if vid not in (e[0], e[1])]
    adjacency: dict[str, set[str]] = {v.id: set() for v in remaining}
    for a, b, _ in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    component_of: dict[str, int] = {}
    n_components = 0
    for v in remaining:
        if v.id in component_of:
            continue
        stack = [v.id]
        while stack:
            current = stack.pop()
            if current in component_of:
                continue
            component_of[current] = n_components
            stack.extend(adjacency[current])
        n_components += 1
    out = []
    for c in range(n_components):
        vs = tuple(v for v in remaining if component_of[v.id] == c)
        member = {v.id for v in vs}
        es = tuple(e for e in edges if e[0] in member)
        out.append(DualGraph(vs, es))
    return out


def validate(g: DualGraph, epsilon: Fraction | None = None, minimal_resolution: bool = False) -> list[str]:
    """Diagnostic report; returns human-readable violation strings, never raises.

    Structural invariants (symmetry, multiplicities >= 1, no self-loops) are
    enforced at construction time, so the checks here are the contextual
    ones: the minimal-resolution weight requirement ``C^2 <= -2`` and, when
    ``epsilon`` is supplied, the weight bound ``weight <= 2/epsilon`` that
    every epsilon-lc configuration must satisfy.
    """
    diagnostics = []
    if minimal_resolution:
        for v in g.vertices:
            if v.self_intersection >= -1:
                diagnostics.append(
                    f"vertex {v.id}: self-intersection {v.self_intersection} >= -1 in a minimal-resolution context"
                )
    if epsilon is not None:
        if epsilon <= 0:
            diagnostics.append(f"epsilon {epsilon} is not positive")
        else:
            bound = Fraction(2) / Fraction(epsilon)
            for v in g.vertices:
                if v.weight > bound:
                    diagnostics.append(
                        f"vertex {v.id}: weight {v.weight} exceeds the epsilon-lc bound 2/epsilon = {format_rational(bound)}"
                    )
    return diagnostics


@dataclass(frozen=True)
class ExternalClass:
    """A curve class outside the configuration, known only through declared products.

    ``dots`` records the intersection with each vertex (missing entries are
    zero); ``k_dot`` is ``K . B``. Classes flagged as ``test_curve`` take
    part in relative-nefness tests alongside the vertices.
    """

    id: str
    k_dot: Fraction
    dots: Mapping[str, Fraction] = field(default_factory=dict)
    self_sq: Fraction | None = None
    genus: int | None = None
    test_curve: bool = False

    def dot(self, vid: str) -> Fraction:
        return Fraction(self.dots.get(vid, 0))


# -- JSON serialization ----------------------------------------------------


def graph_to_json(g: DualGraph) -> dict:
    vertices = []
    for v in g.vertices:
        entry: dict = {"id": v.id, "self": v.self_intersection, "genus": v.genus}
        if v.pullback_coeff is not None:
            entry["coeff"] = format_rational(v.pullback_coeff)
        vertices.append(entry)
    return {"vertices": vertices, "edges": [[a, b, mult] for a, b, mult in g.edges]}


def graph_from_json(data: Mapping) -> DualGraph:
    try:
        vertices = tuple(
            CurveVertex(
                str(v["id"]),
                int(v["self"]),
                int(v.get("genus", 0)),
                parse_rational(v["coeff"]) if "coeff" in v else None,
            )
            for v in data["vertices"]
        )
        edges = tuple((str(a), str(b), int(mult)) for a, b, mult in data.get("edges", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from exc
    return DualGraph(vertices, edges)


def external_to_json(ext: ExternalClass) -> dict:
    entry: dict = {
        "id": ext.id,
        "k_dot": format_rational(ext.k_dot),
        "dots": {vid: format_rational(val) for vid, val in sorted(ext.dots.items())},
    }
    if ext.self_sq is not None:
        entry["self_sq"] = format_rational(ext.self_sq)
    if ext.genus is not None:
        entry["genus"] = ext.genus
    if ext.test_curve:
        entry["test_curve"] = True
    return entry


def external_from_json(data: Mapping) -> ExternalClass:
    try:
        return ExternalClass(
            id=str(data["id"]),
            k_dot=parse_rational(str(data.get("k_dot", "0"))),
            dots={str(k): parse_rational(str(v)) for k, v in data.get("dots", {}).items()},
            self_sq=parse_rational(str(data["self_sq"])) if "self_sq" in data else None,
            genus=int(data["genus"]) if "genus" in data else None,
            test_curve=bool(data.get("test_curve", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed external-class JSON: {exc}") from exc
