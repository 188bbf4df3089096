"""Broken lines and theta functions for rank-2 scattering diagrams.

Broken lines are built backward from the endpoint ``Q``: fix the final
exponent ``n`` (so the last direction is ``m + nB``), walk back along the
ray from ``Q`` and, at each wall met, either pass straight through or undo a
bend that used a term ``a (zeta^{n_w})^nu`` of ``f^{|<m_L, n_w°>|}``.  A path
is complete when its exponent returns to ``n = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from .lattice import eta_step, pairing_circ, pos, row_times_B
from .scattering import Ray, ScatteringDiagram, cross, path_ordered_product
from .series import GradedElement, PointedElement, TruncatedSeries
from .substitution import SeedFrame, substitute_mutation

Point = tuple[Fraction, ...]


class NonGenericError(ValueError):
    """The endpoint or a bend point lies on the boundary of a wall."""


@dataclass(frozen=True)
class Domain:
    """A domain of linearity: label ``coeff z^{m_L} sigma^{n_L}`` on the segment ``start -> end``.

    ``start is None`` for the unbounded domain.
    """

    coeff: Fraction
    m: tuple[int, ...]
    n: tuple[int, ...]
    start: Point | None
    end: Point


@dataclass(frozen=True)
class Bend:
    normal: tuple[int, ...]
    power: int
    coeff: Fraction
    point: Point


@dataclass(frozen=True)
class BrokenLine:
    asymptotic: tuple[int, ...]
    endpoint: Point
    domains: tuple[Domain, ...]
    bends: tuple[Bend, ...]

    @property
    def final(self) -> Domain:
        return self.domains[-1]

    @property
    def coeff(self) -> Fraction:
        return self.final.coeff

    @property
    def exponent(self) -> tuple[int, ...]:
        """``n_gamma``: the final label is ``c z^m zeta^{n_gamma}``."""
        return self.final.n

    @property
    def degree(self) -> int:
        return sum(self.exponent)

    def labels(self) -> tuple[tuple[Fraction, tuple, tuple], ...]:
        return tuple((d.coeff, d.m, d.n) for d in self.domains)


@dataclass(frozen=True)
class ThetaResult:
    matrix: object
    m: tuple[int, ...]
    Q: Point
    value: PointedElement
    lines: tuple[BrokenLine, ...] = field(repr=False)
    finiteness: str
    order: int | None

    @property
    def broken_line_count(self) -> int:
        return len(self.lines)

    @property
    def F(self) -> TruncatedSeries:
        return self.value.F

    def graded(self) -> GradedElement:
        return self.value.to_graded(self.matrix.B)


def _frac_point(Q) -> Point:
    return tuple(Fraction(x) for x in Q)


def _on_some_ray(p: Point, rays: Sequence[Ray]) -> bool:
    if not any(p):
        return True
    for ray in rays:
        r = ray.direction
        if cross(p, r) == 0 and p[0] * r[0] + p[1] * r[1] > 0:
            return True
    return False


def _hits(p: Point, direction: Sequence[int], rays: Sequence[Ray]):
    """Rays met by ``p + s * direction`` for ``s > 0``, with the hit points, nearest first."""
    if cross(p, direction) == 0 and (p[0] * direction[0] + p[1] * direction[1]) < 0:
        raise NonGenericError("broken line would pass through the origin")
    out = []
    for ray in rays:
        r = ray.direction
        den = cross(direction, r)
        if den == 0:
            continue
        s = Fraction(cross(r, p)) / den
        t = Fraction(cross(direction, p)) / den
        if s <= 0 or t < 0:
            continue
        if t == 0:
            raise NonGenericError("broken line would pass through the origin")
        out.append((s, ray, (p[0] + s * direction[0], p[1] + s * direction[1])))
    out.sort(key=lambda h: h[0])
    for a, b in zip(out, out[1:]):
        if a[0] == b[0]:
            raise NonGenericError("two walls met at one point")
    return out


class _Enumerator:
    def __init__(self, diagram: ScatteringDiagram, m, order: int):
        self.B = diagram.B
        self.d = diagram.d
        self.m = tuple(m)
        self.order = order
        self.rays = [Ray(r.direction, r.normal, r.f.truncate(order)) for r in diagram.rays()]
        self.rays = [r for r in self.rays if len(r.f.terms) > 1]
        self._powers: dict = {}

    def m_of(self, n) -> tuple[int, ...]:
        return tuple(a + b for a, b in zip(self.m, row_times_B(n, self.B)))

    def bend_coeff(self, ray: Ray, m_before, nu: int) -> Fraction:
        lam = abs(pairing_circ(m_before, ray.normal, self.d))
        if lam.denominator != 1:
            raise ValueError("non-integral bend exponent")
        key = (ray.direction, int(lam))
        if key not in self._powers:
            self._powers[key] = ray.f ** int(lam)
        return self._powers[key].coeff(tuple(nu * x for x in ray.normal))

    def run(self, Q: Point, degrees) -> list[BrokenLine]:
        if _on_some_ray(Q, self.rays):
            raise NonGenericError(f"endpoint {Q} lies on a wall")
        r = len(self.m)
        found = []
        for total in degrees:
            for n in _compositions(total, r):
                found.extend(self._search(Q, n, []))
        return found

    def _search(self, p: Point, n, trail):
        """``trail`` holds (bend point, ray, nu, n_after, coeff) from the endpoint backward."""
        m_L = self.m_of(n)
        if not any(n):
            _hits(p, m_L, self.rays)  # genericity of the final unbounded segment
            return [self._assemble(trail)]
        if not any(m_L):
            return []
        out = []
        for _, ray, point in _hits(p, m_L, self.rays):
            w = ray.normal
            nu = 1
            while all(a >= nu * b for a, b in zip(n, w)):
                n_before = tuple(a - nu * b for a, b in zip(n, w))
                c = self.bend_coeff(ray, self.m_of(n_before), nu)
                if c:
                    out.extend(self._search(point, n_before, trail + [(point, ray, nu, n, c)]))
                nu += 1
        return out

    def _assemble(self, trail) -> BrokenLine:
        # trail runs from Q backward; rebuild forward
        Q = self._Q
        steps = list(reversed(trail))
        domains = []
        bends = []
        coeff = Fraction(1)
        n_cur = (0,) * len(self.m)
        start = None
        for point, ray, nu, n_after, c in steps:
            domains.append(Domain(coeff, self.m_of(n_cur), n_cur, start, point))
            coeff = coeff * c
            bends.append(Bend(ray.normal, nu, c, point))
            n_cur = n_after
            start = point
        domains.append(Domain(coeff, self.m_of(n_cur), n_cur, start, Q))
        return BrokenLine(self.m, Q, tuple(domains), tuple(bends))


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_broken_lines(
    diagram: ScatteringDiagram, m, Q, order: int, min_degree: int = 0
) -> list[BrokenLine]:
    """All broken lines for ``m`` ending at ``Q`` with final ``zeta``-degree in ``[min_degree, order]``."""
    if diagram.rank != 2:
        raise ValueError("broken lines are enumerated in rank 2 only")
    if not any(m):
        raise ValueError("m = 0: the theta function is the constant 1")
    if diagram.order is not None and order > diagram.order:
        raise ValueError(f"diagram is only known to order {diagram.order}")
    enum = _Enumerator(diagram, m, order)
    Q = _frac_point(Q)
    enum._Q = Q
    lines = enum.run(Q, range(min_degree, order + 1))
    lines.sort(key=lambda g: (g.degree, g.exponent, tuple((b.normal, b.power) for b in g.bends)))
    return lines


POSITIVE_Q = (Fraction(53, 47), Fraction(1))


def perturbation_schedule(Q, attempts: int = 12):
    """``Q`` followed by deterministic perturbations halving an offset along a fixed direction."""
    Q = _frac_point(Q)
    yield Q
    offset = Fraction(1, 7)
    for _ in range(attempts):
        yield (Q[0] + offset, Q[1] + offset * Fraction(3, 11))
        offset /= 2


def _sum_lines(lines: Sequence[BrokenLine], r: int, order) -> TruncatedSeries:
    terms: dict[tuple, Fraction] = {}
    for g in lines:
        terms[g.exponent] = terms.get(g.exponent, 0) + g.coeff
    return TruncatedSeries(terms, r, order)


def theta(diagram: ScatteringDiagram, m, Q=None, order: int = 6, certify: bool = True) -> ThetaResult:
    """``theta_{Q,m}`` as ``z^m F`` truncated at ``order``.

    With ``Q=None`` a generic point of the positive chamber is used (with the
    deterministic perturbation schedule on genericity failures).
    """
    m = tuple(m)
    r = len(m)
    if not any(m):
        Q0 = _frac_point(Q) if Q is not None else POSITIVE_Q
        one = PointedElement(m, TruncatedSeries.one(r))
        return ThetaResult(diagram.matrix, m, Q0, one, (), "certified-finite-type", None)
    candidates = [_frac_point(Q)] if Q is not None else list(perturbation_schedule(POSITIVE_Q))
    last_error = None
    for Q0 in candidates:
        try:
            lines = enumerate_broken_lines(diagram, m, Q0, order)
            verdict = _finiteness(diagram, m, Q0, order, lines) if certify else "truncated"
            break
        except NonGenericError as exc:
            last_error = exc
    else:
        raise last_error
    exact = verdict == "certified-finite-type"
    F = _sum_lines(lines, r, None if exact else order)
    return ThetaResult(diagram.matrix, m, Q0, PointedElement(m, F), tuple(lines), verdict, None if exact else order)


def _finiteness(diagram, m, Q, order, lines) -> str:
    if diagram.order is not None and diagram.order < order + 1:
        return "truncated"
    more = enumerate_broken_lines(diagram, m, Q, order + 1, min_degree=order + 1)
    closed = not more and all(g.degree < order for g in lines)
    if not closed:
        return "truncated"
    return "certified-finite-type" if diagram.order is None else "finite-at-order"


def theta_finiteness(diagram: ScatteringDiagram, m, order: int, Q=None) -> str:
    """Three-valued verdict: certified-finite-type, finite-at-order or truncated."""
    return theta(diagram, m, Q, order).finiteness


def theta_closed(diagram: ScatteringDiagram, m, Q=None, max_order: int = 60) -> ThetaResult:
    """Theta function of a certified finite-type diagram, enumerated degree by degree.

    Enumeration stops once two consecutive degrees contribute no broken lines;
    the result is then marked as an exact polynomial.
    """
    if diagram.order is not None:
        raise ValueError("closure needs a certified finite-type diagram")
    m = tuple(m)
    if not any(m):
        return theta(diagram, m, Q)
    candidates = [_frac_point(Q)] if Q is not None else list(perturbation_schedule(POSITIVE_Q))
    last_error = None
    for Q0 in candidates:
        try:
            lines: list[BrokenLine] = []
            empty = 0
            for deg in range(max_order + 1):
                new = enumerate_broken_lines(diagram, m, Q0, deg, min_degree=deg)
                lines.extend(new)
                empty = 0 if new else empty + 1
                if empty == 2:
                    F = _sum_lines(lines, len(m), None)
                    return ThetaResult(
                        diagram.matrix, m, Q0, PointedElement(m, F), tuple(lines), "certified-finite-type", None
                    )
            raise RuntimeError(f"theta function for {m} did not close by order {max_order}")
        except NonGenericError as exc:
            last_error = exc
    raise last_error


# transport and mutation ---------------------------------------------------------


def transport_endpoint(result: ThetaResult, diagram: ScatteringDiagram, path: Sequence, order=None) -> GradedElement:
    """Move the endpoint of a theta function along ``path`` (starting at ``result.Q``)."""
    if order is None and result.order is None and diagram.order is not None:
        order = diagram.order
    if order is None and result.order is not None:
        order = result.order
    points = [result.Q] + [_frac_point(p) for p in path]
    return path_ordered_product(diagram, points, result.graded(), order)


def _split_at_hyperplane(start: Point | None, end: Point, direction, k: int):
    """Pieces of a segment on either side of ``e_k^perp``; the unbounded start is at infinity."""
    if start is None:
        # far end behaves like end + t * m_L with t -> infinity
        side_far = (direction[k] > 0) - (direction[k] < 0)
        side_end = (end[k] > 0) - (end[k] < 0)
        if side_far * side_end < 0:
            t = -end[k] / direction[k]
            cut = tuple(e + t * dcomp for e, dcomp in zip(end, direction))
            return [(None, cut, side_far), (cut, end, side_end)]
        return [(None, end, side_far or side_end)]
    s0 = (start[k] > 0) - (start[k] < 0)
    s1 = (end[k] > 0) - (end[k] < 0)
    if s0 * s1 < 0:
        t = start[k] / (start[k] - end[k])
        cut = tuple(a + t * (b - a) for a, b in zip(start, end))
        return [(start, cut, s0), (cut, end, s1)]
    return [(start, end, s0 or s1)]


def mutate_label(coeff, m_L, n_L, side: int, Bt, s: int, k: int, m_asym) -> tuple:
    """Rewrite ``c z^{m_L} sigma^{n_L}`` on one side of ``e_k^perp`` in primed variables."""
    B = Bt.B
    r = len(B)
    pk = m_L[k]
    p2 = list(m_L)
    p2[k] = -pk
    for j in range(r):
        if j != k:
            p2[j] += pk * pos(side * B[k][j])
    n2 = list(n_L)
    acc = -n_L[k] + sum(n_L[i] * pos(s * B[i][k]) for i in range(r) if i != k)
    acc += pk * (pos(-s) if side < 0 else -pos(s))
    acc += pos(s * m_asym[k])
    n2[k] = acc
    return coeff, tuple(p2), tuple(n2)


def mutate_broken_line(line: BrokenLine, frame: SeedFrame, k: int) -> BrokenLine:
    """Image of a broken line under ``eta_k``, with labels rewritten in primed variables."""
    Bt = frame.matrix
    B = Bt.B
    s = frame.sign(k)
    domains = []
    for dom in line.domains:
        far = tuple(dom.m)  # velocity is -m_L, so the unbounded end lies toward +m_L
        pieces = _split_at_hyperplane(dom.start, dom.end, far, k)
        for a, b, side in pieces:
            if side == 0:
                side = -1
            c, m2, n2 = mutate_label(dom.coeff, dom.m, dom.n, side, Bt, s, k, line.asymptotic)
            a2 = None if a is None else eta_step(B, k, a)
            b2 = eta_step(B, k, b)
            domains.append(Domain(c, m2, n2, a2, b2))
    merged = []
    for dom in domains:
        if merged and (merged[-1].coeff, merged[-1].m, merged[-1].n) == (dom.coeff, dom.m, dom.n):
            merged[-1] = Domain(dom.coeff, dom.m, dom.n, merged[-1].start, dom.end)
        else:
            merged.append(dom)
    bends = []
    for prev, nxt in zip(merged, merged[1:]):
        diff = tuple(b - a for a, b in zip(prev.n, nxt.n))
        bends.append(Bend(_primitive_or_zero(diff), 0, nxt.coeff / prev.coeff, nxt.start))
    return BrokenLine(eta_step(B, k, line.asymptotic), eta_step(B, k, line.endpoint), tuple(merged), tuple(bends))


def _primitive_or_zero(v):
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    return tuple(x // g for x in v) if g else tuple(v)


def mutate_theta(result: ThetaResult, frame: SeedFrame, k: int) -> GradedElement:
    """``theta_m`` rewritten in the variables of ``frame.mutate(k)`` and multiplied by
    ``(sigma'_k)^{[sgn(sigma_k) <m, d_k e_k>]_+}``, which equals ``theta'_{eta_k(m)}``.
    """
    s = frame.sign(k)
    m = result.m
    a = pos(s * m[k])
    r = len(m)
    lower = [0] * r
    lower[k] = -a
    x = substitute_mutation(result.graded(), frame, k, lower=lower)
    B2 = frame.mutate(k).matrix.B
    ek = tuple(a * int(i == k) for i in range(r))
    return x * GradedElement.sigma_monomial(B2, ek)
