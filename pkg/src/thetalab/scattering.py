"""Rank-2 cluster scattering diagrams.

Geometry lives in the ``f``-coordinate plane.  Every wall passes through the
origin, so a diagram is stored as walls that are either full lines (the
initial walls ``e_i^perp``) or rays given by a primitive direction.  For
computation, :meth:`ScatteringDiagram.rays` splits lines into two rays and
merges walls sharing a ray by multiplying their scattering terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

from .lattice import (
    ExtendedExchangeMatrix,
    eta_step,
    finite_type_rank2,
    is_primitive,
    n_circ,
    pairing,
    pairing_circ,
    pos,
    primitive,
    reduced_sequences,
    row_times_B,
    sign,
)
from .series import GradedElement, Piece, TruncatedSeries


@dataclass(frozen=True)
class Wall:
    """A wall ``(d, f(zeta^n))``; ``direction is None`` means the full line ``n^perp``."""

    normal: tuple[int, ...]
    direction: tuple[int, ...] | None
    f: TruncatedSeries
    outgoing: bool = True

    def __post_init__(self):
        n = tuple(self.normal)
        object.__setattr__(self, "normal", n)
        if self.direction is not None:
            object.__setattr__(self, "direction", tuple(self.direction))
        if not is_primitive(n) or any(x < 0 for x in n):
            raise ValueError(f"wall normal {n} must be primitive and nonnegative")
        if self.f.constant_term() != 1:
            raise ValueError("scattering term must have constant term 1")
        for m in self.f.terms:
            if any(m):
                ratio = {Fraction(a, b) for a, b in zip(m, n) if b} | {
                    None for a, b in zip(m, n) if not b and a
                }
                if len(ratio) != 1 or None in ratio:
                    raise ValueError("scattering term exponents must be multiples of the normal")

    def ray_directions(self) -> list[tuple[int, ...]]:
        if self.direction is not None:
            return [self.direction]
        n = self.normal
        perp = primitive((-n[1], n[0])) if len(n) == 2 else None
        if perp is None:
            raise ValueError("full-line walls are only supported in rank 2")
        return [perp, tuple(-x for x in perp)]


@dataclass(frozen=True)
class Ray:
    direction: tuple[int, ...]
    normal: tuple[int, ...]
    f: TruncatedSeries


def cross(a: Sequence, b: Sequence):
    return a[0] * b[1] - a[1] * b[0]


def _half(v: Sequence) -> int:
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def angle_cmp(a: Sequence, b: Sequence) -> int:
    """Exact counterclockwise angle comparison from the positive first axis."""
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    c = cross(a, b)
    return -sign(c)


angle_key = cmp_to_key(angle_cmp)


def loop_sign(direction: Sequence, normal: Sequence[int], d: Sequence[int]) -> int:
    """Crossing sign of a counterclockwise loop at a ray: ``+1`` means against ``n``."""
    velocity = (-direction[1], direction[0])
    p = pairing(velocity, normal, d)
    if p == 0:
        raise ValueError("loop is tangent to the wall")
    return 1 if p < 0 else -1


def crossing_sign(velocity: Sequence, normal: Sequence[int], d: Sequence[int]) -> int:
    p = pairing(velocity, normal, d)
    if p == 0:
        raise ValueError("path is parallel to the wall")
    return 1 if p < 0 else -1


def wall_function_power(f: TruncatedSeries, e: int, order: int | None) -> TruncatedSeries:
    if e >= 0:
        return f.truncate(order) ** e
    if order is None and f.order is None and len(f.terms) > 1:
        raise ValueError("a negative power of a scattering term needs a truncation order")
    return f.power(e, order)


def wall_crossing(
    x: GradedElement, normal: Sequence[int], f: TruncatedSeries, crossing: int, B, d, order=None
) -> GradedElement:
    """Apply ``z^m -> z^m f^{<m, crossing * n°>}`` to every term of ``x``.

    ``crossing = +1`` for crossing against ``n``, ``-1`` for crossing with it.
    """
    normal = tuple(normal)
    pieces = {}
    cache: dict[tuple[int, int | None], TruncatedSeries] = {}
    for g, piece in x.pieces.items():
        H = piece.series
        rel_order = H.order
        if f.order is not None:
            rel_order = f.order if rel_order is None else min(rel_order, f.order)
        if order is not None:
            rel_order = order if rel_order is None else min(rel_order, order)
        out = TruncatedSeries.zero(H.nvars, rel_order)
        for n, c in H.terms.items():
            nu = tuple(a + b for a, b in zip(n, piece.shift))
            m = tuple(a + b for a, b in zip(g, row_times_B(nu, B)))
            e = crossing * pairing_circ(m, normal, d)
            if e.denominator != 1:
                raise ValueError("non-integral wall-crossing exponent")
            e = int(e)
            budget = None if rel_order is None else rel_order - sum(n)
            if budget is not None and budget < 0:
                continue
            key = (e, budget)
            if key not in cache:
                cache[key] = wall_function_power(f, e, budget)
            out = out + cache[key].shift(n) * c
        pieces[g] = Piece(piece.shift, out.truncate(rel_order))
    return GradedElement(pieces, x.nvars)


def wall_crossing_monomial(m: Sequence[int], wall: Wall, crossing: int, Bt, order=None) -> GradedElement:
    """``z^m f^{<m, +-n°>}`` for a single Laurent monomial ``z^m``."""
    x = GradedElement.monomial(m)
    return wall_crossing(x, wall.normal, wall.f, crossing, Bt.B, Bt.d, order)


@dataclass(frozen=True)
class ScatteringDiagram:
    """Walls of a rank-2 scattering diagram, consistent up to ``order``.

    ``order is None`` marks a diagram whose walls are believed complete and
    whose scattering terms are exact polynomials (certified finite type).
    """

    matrix: ExtendedExchangeMatrix
    walls: tuple[Wall, ...]
    order: int | None
    added_per_degree: tuple[int, ...] = field(default=(), compare=False)

    @property
    def B(self):
        return self.matrix.B

    @property
    def d(self):
        return self.matrix.d

    @property
    def rank(self) -> int:
        return self.matrix.rank

    def rays(self) -> list[Ray]:
        merged: dict[tuple, Ray] = {}
        for w in self.walls:
            for direction in w.ray_directions():
                if direction in merged:
                    old = merged[direction]
                    if old.normal != w.normal:
                        raise ValueError("walls on one ray with different normals")
                    merged[direction] = Ray(direction, w.normal, old.f * w.f)
                else:
                    merged[direction] = Ray(direction, w.normal, w.f)
        return sorted(merged.values(), key=lambda r: angle_key(r.direction))

    def outgoing_walls(self) -> list[Wall]:
        return [w for w in self.walls if w.outgoing]

    def is_certified_finite(self) -> bool:
        return self.order is None

    def truncate(self, order: int) -> "ScatteringDiagram":
        walls = []
        for w in self.walls:
            f = w.f.truncate(order)
            if len(f.terms) > 1:
                walls.append(replace(w, f=f))
        return ScatteringDiagram(self.matrix, tuple(walls), order if self.order is None else min(order, self.order))


def initial_walls(Bt: ExtendedExchangeMatrix, order: int | None) -> list[Wall]:
    r = Bt.rank
    walls = []
    for i in range(r):
        e = tuple(int(i == j) for j in range(r))
        walls.append(Wall(e, None, TruncatedSeries.binomial(e, order), outgoing=False))
    return walls


def loop_product(
    diagram_rays: Sequence[Ray], x: GradedElement, B, d, order: int | None, start=(1, 0)
) -> GradedElement:
    """Transport ``x`` once counterclockwise around the origin from angle ``start``.

    ``start`` must not be a ray direction.
    """
    rays = sorted(diagram_rays, key=lambda r: angle_key(r.direction))
    after = [r for r in rays if angle_cmp(r.direction, start) > 0]
    before = [r for r in rays if angle_cmp(r.direction, start) < 0]
    if len(after) + len(before) != len(rays):
        raise ValueError("loop base point lies on a wall")
    for ray in after + before:
        eps = loop_sign(ray.direction, ray.normal, d)
        x = wall_crossing(x, ray.normal, ray.f, eps, B, d, order)
    return x


LOOP_START = (7, 3)


def loop_discrepancy(diagram: ScatteringDiagram, order: int, start=LOOP_START) -> dict:
    """``{i: series}`` of ``loop(z^{f_i}) / z^{f_i} - 1`` modulo degree > ``order``."""
    r = diagram.rank
    rays = [Ray(ray.direction, ray.normal, ray.f.truncate(order)) for ray in diagram.rays()]
    out = {}
    for i in range(r):
        fi = tuple(int(i == j) for j in range(r))
        x = GradedElement({fi: Piece((0,) * r, TruncatedSeries.one(r, order))}, r)
        y = loop_product(rays, x, diagram.B, diagram.d, order, start)
        piece = y.piece(fi)
        if len(y.pieces) != 1 or piece is None:
            raise AssertionError("loop product left the g-vector piece")
        series = piece.reshift((0,) * r).series if any(piece.shift) else piece.series
        out[i] = series.truncate(order) - 1
    return out


def is_consistent(diagram: ScatteringDiagram, order: int) -> bool:
    return all(not s.terms for s in loop_discrepancy(diagram, order).values())


def _ray_for_normal(n0: Sequence[int], B) -> tuple[int, ...]:
    nb = row_times_B(n0, B)
    if not any(nb):
        raise ValueError(f"cannot place a wall for normal {tuple(n0)}: nB = 0")
    return primitive(tuple(-x for x in nb))


def build_scattering_diagram(Bt, order: int) -> ScatteringDiagram:
    """Consistent completion of the initial walls, degree by degree, up to ``order``.

    At each degree the origin loop is computed; its lowest-order discrepancy
    is central, so each discrepancy monomial is cancelled by a term on the
    outgoing ray ``R_{>=0}(-n_0 B)``.
    """
    if not isinstance(Bt, ExtendedExchangeMatrix):
        Bt = ExtendedExchangeMatrix(Bt)
    r = Bt.rank
    if r != 2:
        raise ValueError("scattering diagrams are constructed in rank 2 only")
    if Bt.n_frozen and not Bt.frozen_rows_independent():
        raise ValueError("rows of the extended exchange matrix must be linearly independent")
    B, d = Bt.B, Bt.d
    walls = initial_walls(Bt, order)
    extra: dict[tuple, dict[tuple, Fraction]] = {}  # direction -> terms
    normals: dict[tuple, tuple] = {}
    added = []
    for deg in range(1, order + 1):
        current = walls + [
            Wall(normals[dirn], dirn, TruncatedSeries(terms, r, order)) for dirn, terms in sorted(extra.items())
        ]
        diagram = ScatteringDiagram(Bt, tuple(current), order)
        disc = loop_discrepancy(diagram, deg)
        count = 0
        monomials = sorted({n for s in disc.values() for n in s.terms})
        for n in monomials:
            if sum(n) != deg:
                raise AssertionError(f"lower-degree discrepancy at {n}: completion is inconsistent")
            v = [d[i] * disc[i].coeff(n) for i in range(r)]
            n0 = primitive(n)
            if any(x < 0 for x in n0):
                raise AssertionError("discrepancy outside the positive cone")
            direction = _ray_for_normal(n0, B)
            eps = loop_sign(direction, n0, d)
            nc = n_circ(n0, d)
            ratios = {Fraction(-vi, eps * ci) for vi, ci in zip(v, nc) if ci}
            if len(ratios) != 1 or any(vi and not ci for vi, ci in zip(v, nc)):
                raise AssertionError("discrepancy is not proportional to the wall normal")
            a = ratios.pop()
            terms = extra.setdefault(direction, {(0,) * r: Fraction(1)})
            normals[direction] = n0
            terms[n] = terms.get(n, 0) + a
            if not terms[n]:
                del terms[n]
            count += 1
        added.append(count)
    final = walls + [
        Wall(normals[dirn], dirn, TruncatedSeries(terms, r, order))
        for dirn, terms in sorted(extra.items(), key=lambda t: angle_key(t[0]))
        if len(terms) > 1
    ]
    diagram = ScatteringDiagram(Bt, tuple(final), order, tuple(added))
    # Finite-type walls sit at positive roots, whose heights are consecutive; an empty top degree
    # after a consistent completion therefore means nothing further appears.
    if finite_type_rank2(B) and order >= 2 and added[-1] == 0:
        exact = tuple(replace(w, f=w.f.with_order(None)) for w in final)
        diagram = ScatteringDiagram(Bt, exact, None, tuple(added))
    return diagram


def path_ordered_product(
    diagram: ScatteringDiagram, points: Sequence[Sequence], x: GradedElement, order: int | None = None
) -> GradedElement:
    """Transport ``x`` along the polygonal path through ``points``.

    Each segment must cross walls away from the origin and may not start or
    end on a wall.
    """
    for a, b in zip(points, points[1:]):
        for ray, _ in segment_crossings(diagram.rays(), a, b):
            velocity = tuple(Fraction(q) - Fraction(p) for p, q in zip(a, b))
            eps = crossing_sign(velocity, ray.normal, diagram.d)
            x = wall_crossing(x, ray.normal, ray.f, eps, diagram.B, diagram.d, order)
    return x


def segment_crossings(rays: Iterable[Ray], a: Sequence, b: Sequence) -> list[tuple[Ray, Fraction]]:
    """Rays met by the open segment ``a -> b``, sorted by the segment parameter."""
    a = tuple(Fraction(x) for x in a)
    b = tuple(Fraction(x) for x in b)
    u = (b[0] - a[0], b[1] - a[1])
    hits = []
    for ray in rays:
        r = ray.direction
        den = cross(u, r)
        if den == 0:
            if cross(a, r) == 0:
                raise ValueError("path runs along a wall")
            continue
        # a + s u = t r
        s = cross(r, a) / den
        t = cross(u, a) / den
        if s <= 0 or s >= 1:
            if (s == 0 or s == 1) and t >= 0:
                raise ValueError("path endpoint lies on a wall")
            continue
        if t < 0:
            continue
        if t == 0:
            raise ValueError("path passes through the origin")
        hits.append((ray, s))
    hits.sort(key=lambda h: h[1])
    return hits


# mutation ---------------------------------------------------------------------


def _mutate_normal(n: Sequence[int], B, k: int, side: int) -> tuple[int, ...]:
    """Side ``-1``: wall in ``<p, e_k> <= 0``; side ``+1``: in ``<p, e_k> >= 0``."""
    out = list(n)
    acc = -n[k]
    for i in range(len(n)):
        if i != k:
            acc += n[i] * pos(-side * B[i][k])
    out[k] = acc
    return tuple(out)


def mutate_diagram(diagram: ScatteringDiagram, k: int) -> ScatteringDiagram:
    """The diagram for ``mu_k(B~)`` in primed variables, wall by wall."""
    B = diagram.B
    r = diagram.rank
    Bt2 = diagram.matrix.mutate(k)
    if diagram.order is None:
        new_order = None
    else:
        c = 1 + max((abs(B[i][k]) for i in range(r) if i != k), default=0)
        new_order = diagram.order // c
    ek = tuple(int(i == k) for i in range(r))
    walls = []
    for ray in diagram.rays():
        direction = ray.direction
        if direction[k] == 0 and ray.normal == ek:
            walls.append(Wall(ek, direction, ray.f.truncate(new_order), outgoing=False))
            continue
        side = -1 if direction[k] <= 0 else 1
        n2 = _mutate_normal(ray.normal, B, k, side)
        if any(x < 0 for x in n2):
            raise ValueError(f"mutated normal {n2} is not positive")
        terms = {}
        for m, c in ray.f.terms.items():
            j = next((Fraction(a, b) for a, b in zip(m, ray.normal) if b), Fraction(0))
            terms[tuple(int(j * x) for x in n2)] = c
        f2 = TruncatedSeries(terms, r, new_order)
        if len(f2.terms) <= 1:
            continue
        dir2 = primitive(eta_step(B, k, direction))
        is_initial = sum(n2) == 1 and dir2[n2.index(1)] == 0
        walls.append(Wall(n2, dir2, f2, outgoing=not is_initial))
    return ScatteringDiagram(Bt2, tuple(walls), new_order)


def ray_normal_form(diagram: ScatteringDiagram, order: int | None = None) -> dict:
    """``{direction: (normal, terms)}`` with terms truncated at ``order``."""
    out = {}
    for ray in diagram.rays():
        f = ray.f.truncate(order)
        if len(f.terms) > 1:
            out[ray.direction] = (ray.normal, dict(f.truncate(order).terms))
    return out


def diagrams_equivalent(a: ScatteringDiagram, b: ScatteringDiagram, order: int | None = None) -> bool:
    orders = [x for x in (a.order, b.order, order) if x is not None]
    cap = min(orders) if orders else None
    return ray_normal_form(a, cap) == ray_normal_form(b, cap)


# coefficients -----------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientReport:
    nondegenerate: bool
    signed: bool
    depth: int
    frames: dict
    first_failure: tuple[int, ...] | None


def coefficient_report(Bt: ExtendedExchangeMatrix, depth: int = 4) -> CoefficientReport:
    """Nondegeneracy of ``B~`` and the signed verdict over all frames up to ``depth``.

    ``frames`` maps each reduced sequence to its sign vector, or ``None`` when
    the frozen block there is dependent or has a row without a sign.
    """
    frames = {}
    failure = None
    for seq in reduced_sequences(Bt.rank, depth):
        M = Bt.mutate_sequence(seq)
        signs = M.sigma_signs() if M.frozen_rows_independent() else None
        frames[seq] = signs
        if signs is None and failure is None:
            failure = seq
    return CoefficientReport(Bt.frozen_rows_independent(), failure is None, depth, frames, failure)


def change_coefficients(x, Bt2: ExtendedExchangeMatrix):
    """Carry a diagram or theta result over to another extension of the same ``B``."""
    source = x.matrix
    if source.B != Bt2.B or source.d != Bt2.d:
        raise ValueError("both extended matrices must extend the same B")
    if not source.frozen_rows_independent():
        raise ValueError("source extension has degenerate coefficients")
    return replace(x, matrix=Bt2)
