"""Simplicial rank-3 fans: star subdivisions, multiplicities, wall relations.

Only what the local threefold computation needs: fans are finite lists of
3-dimensional simplicial cones (no completeness assumption), rays are
primitive integer vectors, and every number is exact.

The key tool is the wall relation: an interior wall ``tau`` with adjacent
maximal cones ``sigma, sigma'`` (extra rays ``u1, u2``) carries the unique
linear relation

    (mult(tau)/mult(sigma)) u1 + (mult(tau)/mult(sigma')) u2
        + sum_i c_i v_i = 0,

over the wall rays ``v_i``, and the coefficients are exactly the products
of the torus-invariant divisors with the invariant curve of the wall:
``D_{u1}.C = mult(tau)/mult(sigma)``, ``D_{v_i}.C = c_i``, zero for every
other ray. The normalization of the ``u2`` coefficient is re-derived from
the kernel on every call and asserted, so the formula is validated each
time it is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd
from typing import Iterable, Sequence

from .errors import PluricalcError
from .ratmat import IntMatrix, RatMatrix, smith_normal_form, solve

Ray = tuple[int, int, int]

E1: Ray = (1, 0, 0)
E2: Ray = (0, 1, 0)
E3: Ray = (0, 0, 1)


class FanError(PluricalcError):
    """Degenerate cone, malformed fan, or a point outside the support."""


class AmbiguousConeError(PluricalcError):
    """The point sits on a proper face, so the containing cone is ambiguous."""


def make_ray(v: Sequence[int]) -> Ray:
    """Validate a primitive nonzero integer vector."""
    if len(v) != 3:
        raise FanError(f"rays live in rank 3, got {tuple(v)}")
    ray = (int(v[0]), int(v[1]), int(v[2]))
    g = gcd(gcd(abs(ray[0]), abs(ray[1])), abs(ray[2]))
    if g == 0:
        raise FanError("the zero vector is not a ray")
    if g != 1:
        raise FanError(f"ray {ray} is not primitive (gcd {g})")
    return ray


@dataclass(frozen=True)
class Cone3:
    """Simplicial cone spanned by 2 (wall) or 3 (maximal) independent rays.

    Rays are stored sorted, so cones compare by their ray sets.
    """

    rays: tuple[Ray, ...]

    def __post_init__(self):
        rays = tuple(sorted(make_ray(r) for r in self.rays))
        object.__setattr__(self, "rays", rays)
        if len(rays) not in (2, 3):
            raise FanError(f"need 2 or 3 rays, got {len(rays)}")
        if len(set(rays)) != len(rays):
            raise FanError("repeated ray")
        if len(rays) == 3:
            if _det3(rays) == 0:
                raise FanError(f"rays {rays} are linearly dependent")
        else:
            if _cross(rays[0], rays[1]) == (0, 0, 0):
                raise FanError(f"rays {rays} are parallel")

    @property
    def dim(self) -> int:
        return len(self.rays)

    def facets(self) -> tuple["Cone3", ...]:
        """The three 2-dimensional faces of a maximal cone."""
        if self.dim != 3:
            raise FanError("facets are defined for maximal cones")
        r = self.rays
        return (Cone3((r[0], r[1])), Cone3((r[0], r[2])), Cone3((r[1], r[2])))


def cone(*rays: Sequence[int]) -> Cone3:
    return Cone3(tuple(make_ray(r) for r in rays))


def _det3(rows: Sequence[Ray]) -> int:
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _cross(a: Ray, b: Ray) -> Ray:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def cone_mult(c: Cone3) -> int:
    """Lattice multiplicity: index of the span of the rays in its saturation.

    For a maximal cone this is |det| of the ray matrix; for a wall it is
    the gcd of the 2x2 minors of the 2x3 ray matrix. Multiplicity 1 means
    the cone is smooth.
    """
    if c.dim == 3:
        return abs(_det3(c.rays))
    minors = _cross(c.rays[0], c.rays[1])
    return gcd(gcd(abs(minors[0]), abs(minors[1])), abs(minors[2]))


def barycentric(c: Cone3, point: Sequence) -> tuple[Fraction, ...]:
    """Coordinates lambda with ``point = sum lambda_i ray_i`` (maximal cone)."""
    if c.dim != 3:
        raise FanError("barycentric coordinates need a maximal cone")
    matrix = RatMatrix.from_rows([[c.rays[j][i] for j in range(3)] for i in range(3)])
    return solve(matrix, [Fraction(x) for x in point])


def cone_contains(c: Cone3, point: Sequence) -> bool:
    """Whether a maximal cone contains the point (boundary included)."""
    return all(x >= 0 for x in barycentric(c, point))


@dataclass(frozen=True)
class QuotientData:
    """The quotient group of a maximal cone, via Smith normal form.

    ``order`` is the lattice index; ``diag`` the invariant factors > 1.
    When the group is cyclic, ``weights`` gives the action exponents along
    the coordinates dual to the rays (in the cone's sorted ray order) and
    ``weights_canonical`` the representative of their orbit under unit
    multiplication and coordinate permutation. Non-cyclic groups report
    ``weights = None`` and are still fully described by ``diag``.
    """

    order: int
    diag: tuple[int, ...]
    weights: tuple[int, ...] | None
    weights_canonical: tuple[int, ...] | None


def canonical_weights(order: int, weights: Sequence[int]) -> tuple[int, ...]:
    """Orbit representative under unit scaling mod order and permutation."""
    if order == 1:
        return ()
    best = None
    reduced = [w % order for w in weights]
    for unit in range(1, order):
        if gcd(unit, order) != 1:
            continue
        candidate = tuple(sorted((unit * w) % order for w in reduced))
        if best is None or candidate < best:
            best = candidate
    return best


def weights_equivalent(order: int, w1: Sequence[int], w2: Sequence[int]) -> bool:
    """Whether two weight tuples define the same cyclic quotient action."""
    return canonical_weights(order, w1) == canonical_weights(order, w2)


def quotient_type(c: Cone3) -> QuotientData:
    """Group structure of ``N / (Z r1 + Z r2 + Z r3)`` for a maximal cone."""
    if c.dim != 3:
        raise FanError("quotient types are defined for maximal cones")
    ray_columns = IntMatrix.from_rows([[c.rays[j][i] for j in range(3)] for i in range(3)])
    snf = smith_normal_form(ray_columns)
    order = 1
    for d in snf.diag:
        order *= abs(d)
    nontrivial = tuple(d for d in snf.diag if d > 1)
    if len(nontrivial) > 1:
        return QuotientData(order=order, diag=nontrivial, weights=None, weights_canonical=None)
    if order == 1:
        return QuotientData(order=1, diag=(), weights=(), weights_canonical=())
    # left @ rays @ right = diag, so a generator of the Z/order factor pulls
    # back to the matching column of left^{-1}; its barycentric coordinates
    # against the rays give the action weights (times the order).
    factor_index = snf.diag.index(nontrivial[0])
    left = snf.left.to_rational()
    unit_vector = [Fraction(1) if i == factor_index else Fraction(0) for i in range(3)]
    generator = solve(left, unit_vector)
    coords = barycentric(c, generator)
    weights = tuple(int(order * x) % order for x in coords)
    return QuotientData(
        order=order,
        diag=nontrivial,
        weights=weights,
        weights_canonical=canonical_weights(order, weights),
    )


@dataclass(frozen=True)
class Wall:
    """Interior wall with its two adjacent maximal cones."""

    cone: Cone3
    adjacent: tuple[Cone3, Cone3]


@dataclass(frozen=True)
class Fan3D:
    """A fan given by its maximal simplicial cones."""

    maximal: tuple[Cone3, ...]

    def __post_init__(self):
        for c in self.maximal:
            if c.dim != 3:
                raise FanError("maximal cones must be 3-dimensional")
        if len(set(self.maximal)) != len(self.maximal):
            raise FanError("repeated maximal cone")

    def rays(self) -> tuple[Ray, ...]:
        return tuple(sorted({r for c in self.maximal for r in c.rays}))

    def walls(self) -> tuple[Wall, ...]:
        """Interior walls: 2-faces shared by exactly two maximal cones."""
        adjacency: dict[Cone3, list[Cone3]] = {}
        for c in self.maximal:
            for facet in c.facets():
                adjacency.setdefault(facet, []).append(c)
        out = []
        for facet in sorted(adjacency, key=lambda f: f.rays):
            cones = adjacency[facet]
            if len(cones) == 2:
                out.append(Wall(facet, (cones[0], cones[1])))
            elif len(cones) > 2:
                raise FanError(f"wall {facet.rays} has {len(cones)} adjacent cones")
        return tuple(out)

    def wall_at(self, rays: Iterable[Sequence[int]]) -> Wall:
        target = Cone3(tuple(make_ray(r) for r in rays))
        for wall in self.walls():
            if wall.cone == target:
                return wall
        raise FanError(f"no interior wall with rays {target.rays}")

    def cones_containing(self, point: Sequence) -> tuple[Cone3, ...]:
        return tuple(c for c in self.maximal if cone_contains(c, point))


def star_subdivide(fan: Fan3D, w: Sequence[int]) -> Fan3D:
    """Star subdivision at a primitive ray inside the support.

    Every maximal cone containing ``w`` is replaced by the joins of ``w``
    with its facets not containing ``w``; subdividing at an existing ray of
    the fan returns the fan unchanged. A ray outside the support raises.
    """
    ray = make_ray(w)
    containing = fan.cones_containing(ray)
    if not containing:
        raise FanError(f"{ray} lies outside the support of the fan")
    new_cones: list[Cone3] = []
    for c in fan.maximal:
        if c not in containing or ray in c.rays:
            new_cones.append(c)
            continue
        coords = barycentric(c, ray)
        support_rays = {c.rays[i] for i in range(3) if coords[i] > 0}
        for facet in c.facets():
            if not support_rays <= set(facet.rays):
                new_cones.append(Cone3((ray,) + facet.rays))
    return Fan3D(tuple(new_cones))


def wall_curve_intersections(fan: Fan3D, wall_rays: Iterable[Sequence[int]]) -> dict[Ray, Fraction]:
    """Products ``D_rho . C`` of all invariant divisors with a wall curve.

    Computes the wall relation in the multiplicity-normalized form and
    asserts, from the exact kernel solve, that the second extra-ray
    coefficient comes out as ``mult(wall)/mult(sigma')``. Boundary walls
    (only one adjacent cone) raise :class:`FanError`.
    """
    wall = fan.wall_at(wall_rays)
    sigma, sigma_prime = wall.adjacent
    v1, v2 = wall.cone.rays
    (u1,) = tuple(r for r in sigma.rays if r not in wall.cone.rays)
    (u2,) = tuple(r for r in sigma_prime.rays if r not in wall.cone.rays)
    mu = cone_mult(wall.cone)
    a1 = Fraction(mu, cone_mult(sigma))
    # Solve a1*u1 + beta*u2 + c1*v1 + c2*v2 = 0 for (beta, c1, c2); the
    # matrix is the ray matrix of sigma', hence invertible.
    matrix = RatMatrix.from_rows([[u2[i], v1[i], v2[i]] for i in range(3)])
    rhs = [-a1 * u1[i] for i in range(3)]
    beta, c1, c2 = solve(matrix, rhs)
    if beta != Fraction(mu, cone_mult(sigma_prime)):
        raise FanError(
            f"wall relation normalization failed: expected {Fraction(mu, cone_mult(sigma_prime))}, got {beta}"
        )
    values = {r: Fraction(0) for r in fan.rays()}
    values[u1] = a1
    values[u2] = beta
    values[v1] = c1
    values[v2] = c2
    return values


def curve_k_dot(fan: Fan3D, wall_rays: Iterable[Sequence[int]]) -> Fraction:
    """``K . C`` for a wall curve: minus the sum of all ``D_rho . C``."""
    return -sum(wall_curve_intersections(fan, wall_rays).values(), Fraction(0))


def subdivision_discrepancy(fan: Fan3D, w: Sequence[int], target: Cone3) -> Fraction:
    """Coefficient of the new divisor: ``sum(lambda) - 1`` for ``w = sum lambda_i r_i``.

    ``w`` must lie in the target cone and either equal one of its rays
    (discrepancy 0) or lie in its interior; a point on a proper face has no
    unambiguous containing cone and raises :class:`AmbiguousConeError`.
    """
    ray = make_ray(w)
    coords = barycentric(target, ray)
    if any(x < 0 for x in coords):
        raise FanError(f"{ray} does not lie in the cone {target.rays}")
    if ray not in target.rays and any(x == 0 for x in coords):
        raise AmbiguousConeError(f"{ray} lies on a proper face of {target.rays}")
    return sum(coords, Fraction(0)) - 1


@dataclass(frozen=True)
class ToricParams:
    """Parameters (m, n, b) with ``n b = m + 1``, ``n`` odd."""

    m: int
    n: int
    b: int

    def __post_init__(self):
        if self.m < 2 or self.n < 1 or self.b < 1:
            raise FanError(f"need m >= 2 and n, b >= 1, got {(self.m, self.n, self.b)}")
        if self.n % 2 == 0:
            raise FanError(f"n = {self.n} must be odd")
        if self.n * self.b != self.m + 1:
            raise FanError(f"need n*b = m+1, got {self.n}*{self.b} != {self.m}+1")

    @property
    def u(self) -> Ray:
        return (self.m, 1, -self.b)

    @property
    def v(self) -> Ray:
        return (-self.n, 2, 1)

    @property
    def w(self) -> Ray:
        return (1, 1, 0)


def build_fans(p: ToricParams) -> tuple[Fan3D, Fan3D, Fan3D]:
    """The three fans of the local construction.

    Fan 1 is the single cone ``(e3, u, v)`` (an isolated quotient point of
    order ``2m + n``); fan 2 is its star subdivision at ``e2``; fan 3
    subdivides fan 2 at ``w = (1, 1, 0)``, which sits in the interior of
    the cone ``(e2, e3, u)``.
    """
    fan1 = Fan3D((cone(E3, p.u, p.v),))
    fan2 = star_subdivide(fan1, E2)
    fan3 = star_subdivide(fan2, p.w)
    return fan1, fan2, fan3


def closed_form_floored(p: ToricParams, m0: int) -> Fraction:
    """Displayed closed form ``(2/n - b/m) m0 - {(m - m0 b)/m}``."""
    x = Fraction(p.m - m0 * p.b, p.m)
    frac = x - floor(x)
    return (Fraction(2, p.n) - Fraction(p.b, p.m)) * m0 - frac


def floored_pullback_check(p: ToricParams, m0: int) -> Fraction:
    """Exact product ``floor(m0 f*K) . R'`` on the twice-subdivided fan.

    The pullback of ``K`` under the second subdivision has one fractional
    coefficient, ``-(1 + b/m)`` on the new ray ``w``; flooring acts per-ray
    in the invariant-divisor basis. The fan computation must agree with
    :func:`closed_form_floored` and does by construction; a mismatch raises.
    ``m0 = 0`` degenerates to 0.
    """
    if m0 < 0:
        raise FanError("m0 must be non-negative")
    if m0 == 0:
        return Fraction(0)
    _, fan2, fan3 = build_fans(p)
    a = subdivision_discrepancy(fan2, p.w, cone(E2, E3, p.u))
    if a != Fraction(p.b, p.m):
        raise FanError(f"subdivision discrepancy {a} differs from b/m = {Fraction(p.b, p.m)}")
    coeffs = {ray: Fraction(-m0) for ray in fan3.rays()}
    coeffs[p.w] = -m0 * (1 + a)
    floored = {ray: Fraction(floor(value)) for ray, value in coeffs.items()}
    products = wall_curve_intersections(fan3, (E2, E3))
    value = sum((floored[ray] * products[ray] for ray in products), Fraction(0))
    expected = closed_form_floored(p, m0)
    if value != expected:
        raise FanError(f"fan value {value} differs from the closed form {expected}")
    return value


def negativity_constraints(p: ToricParams, m0: int) -> list[str]:
    """The failing inequalities among ``2 b m0 < n < m``, empty when all hold.

    When both hold the floored pullback value is below ``m0/n - 1/2 < 0``,
    so every pluricanonical member must contain the wall curve.
    """
    failing = []
    if not 2 * p.b * m0 < p.n:
        failing.append(f"2*b*m0 = {2 * p.b * m0} is not < n = {p.n}")
    if not p.n < p.m:
        failing.append(f"n = {p.n} is not < m = {p.m}")
    return failing
