"""Reduced bases: expansion, change of basis, pointedness, ray bases and B-cone products."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .broken_lines import theta_closed
from .dominance import dom_membership, n_set_membership, phi_kappa
from .lattice import primitive, reduced_sequences, row_times_B, same_b_cone_up_to_depth
from .scattering import ScatteringDiagram, angle_key, cross
from .series import GradedElement, PointedElement, TruncatedSeries
from .structure import ThetaFSeries, extract_pointed, product_F
from .substitution import NotLaurentError, SeedFrame, substitute_mutation

Exp = tuple[int, ...]


@dataclass(frozen=True)
class ReducedBasisSpec:
    """A table ``m -> F_m`` of constant-term-1 series; the basis element is ``z^m F_m``.

    ``generator(m, order)`` must return a :class:`TruncatedSeries`.
    """

    generator: Callable[[Exp, int], TruncatedSeries]
    provenance: str = "user"

    def __call__(self, m, order: int) -> TruncatedSeries:
        F = self.generator(tuple(m), order)
        if F.constant_term() != 1:
            raise ValueError(f"basis element for {tuple(m)} does not have constant term 1")
        return F

    @classmethod
    def theta_basis(cls, diagram: ScatteringDiagram, Q=None) -> "ReducedBasisSpec":
        return cls(ThetaFSeries(diagram, Q), "theta")


def expand_in_reduced_basis(
    v: GradedElement, basis: ReducedBasisSpec, B, order: int
) -> list[tuple[Exp, Exp, Fraction]]:
    """``v = sum c sigma^n u_m`` up to ``zeta``-degree ``order`` (relative to each piece's lowest term)."""
    out = []
    for g, piece in v.pieces.items():
        b = piece.shift
        # z^g zeta^b S = sigma^b z^{g + bB} S
        p = tuple(x + y for x, y in zip(g, row_times_B(b, B)))
        prec = order if piece.series.order is None else min(order, piece.series.order)
        for m, n, c in extract_pointed(piece.series, p, B, basis, prec):
            out.append((m, tuple(x + y for x, y in zip(n, b)), c))
    out.sort(key=lambda t: (sum(t[1]), t[1], t[0]))
    return out


# change of basis -------------------------------------------------------------------


CoeffTable = Mapping[Exp, Mapping[Exp, object]]


def _le(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _below(r: Exp):
    """All ``n`` with ``0 <= n <= r`` componentwise."""
    if not r:
        yield ()
        return
    for head in range(r[0] + 1):
        for tail in _below(r[1:]):
            yield (head,) + tail


def _coeff(c: CoeffTable, p: Exp, n: Exp) -> Fraction:
    if not any(n):
        return Fraction(1)
    return Fraction(c.get(p, {}).get(n, 0))


def invert_change_of_basis(c: CoeffTable, B, ps: Sequence[Exp], bound: int) -> dict[Exp, dict[Exp, Fraction]]:
    """Inverse coefficients ``d^{(p)}_r`` for ``|r| <= bound``.

    Input: ``u_p = sum_n c^{(p)}_n sigma^n v_{p+nB}`` with ``c^{(p)}_0 = 1``
    (absent entries are zero).  Output: ``v_p = sum_r d^{(p)}_r sigma^r u_{p+rB}``,
    computed by the first-step recursion of the chain sum,
    ``d^{(p)}_r = -sum_{0 < n <= r} c^{(p)}_n d^{(p+nB)}_{r-n}``.
    """

    @lru_cache(maxsize=None)
    def d(p: Exp, r: Exp) -> Fraction:
        if not any(r):
            return Fraction(1)
        total = Fraction(0)
        for n in _below(r):
            if not any(n):
                continue
            cn = _coeff(c, p, n)
            if cn:
                q = tuple(a + b for a, b in zip(p, row_times_B(n, B)))
                total -= cn * d(q, tuple(a - b for a, b in zip(r, n)))
        return total

    out = {}
    for p in ps:
        p = tuple(p)
        row = {}
        for total in range(bound + 1):
            for r in _compositions(total, len(p)):
                val = d(p, r)
                if val:
                    row[r] = val
        out[p] = row
    return out


def chain_sum(c: CoeffTable, B, p: Exp, r: Exp) -> Fraction:
    """``d^{(p)}_r`` by explicit enumeration of chains ``0 = n_0 < ... < n_k = r``."""
    p, r = tuple(p), tuple(r)
    if not any(r):
        return Fraction(1)
    total = Fraction(0)

    def walk(cur: Exp, weight: Fraction, sign: int):
        nonlocal total
        if cur == r:
            total += sign * weight
            return
        base = tuple(a + b for a, b in zip(p, row_times_B(cur, B)))
        for nxt in _below(r):
            if nxt != cur and _le(cur, nxt):
                step = tuple(a - b for a, b in zip(nxt, cur))
                cn = _coeff(c, base, step)
                if cn:
                    walk(nxt, weight * cn, -sign)

    walk((0,) * len(r), Fraction(1), 1)
    return total


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# pointedness ------------------------------------------------------------------------


@dataclass(frozen=True)
class PointednessVerdict:
    pointed: bool
    depth: int
    g_vector: Exp | None
    failure: tuple[int, ...] | None = None
    reason: str = ""


def _check_pointed_form(x: GradedElement, key: Exp, phi: Exp) -> str:
    if set(x.pieces) != {key}:
        return f"pieces {sorted(x.pieces)} instead of the single piece {key}"
    terms = x.pieces[key].absolute_terms()
    if terms.get(tuple(phi)) != 1:
        return f"coefficient of zeta^{tuple(phi)} is {terms.get(tuple(phi), 0)}, not 1"
    for n in terms:
        if not _le(phi, n):
            return f"term zeta^{n} lies below zeta^{tuple(phi)}"
    return ""


def is_pointed_up_to_depth(u: GradedElement, Bt, depth: int) -> PointednessVerdict:
    """Check the pointed form of ``u`` at every reduced sequence of length ``<= depth``.

    At the seed ``kseq`` the element must be ``sigma^phi z^kappa`` times a
    constant-term-1 series, with ``(kappa, phi)`` those of the theta function
    with the same ``g``-vector.
    """
    g = u.g_vector()
    if g == "inhomogeneous":
        raise ValueError("pointedness is only defined for homogeneous elements")
    zero = (0,) * Bt.rank
    if g is None or u.is_zero():
        return PointednessVerdict(False, depth, None, (), "zero element")
    m = tuple(g)
    reason = _check_pointed_form(u, m, zero)
    if reason:
        return PointednessVerdict(False, depth, m, (), reason)
    # depth-first over reduced sequences, reusing prefixes
    cache = {(): u}
    for kseq in reduced_sequences(Bt.rank, depth):
        if not kseq:
            continue
        prev = cache[kseq[:-1]]
        frame = SeedFrame(Bt, kseq[:-1])
        k = kseq[-1]
        pk = phi_kappa(Bt, kseq, m)
        try:
            x = substitute_mutation(prev, frame, k, lower=pk.phi)
        except NotLaurentError as exc:
            return PointednessVerdict(False, depth, m, kseq, str(exc))
        B2 = SeedFrame(Bt, kseq).matrix.B
        key = tuple(a - b for a, b in zip(pk.kappa, row_times_B(pk.phi, B2)))
        reason = _check_pointed_form(x, key, pk.phi)
        if reason:
            return PointednessVerdict(False, depth, m, kseq, reason)
        cache[kseq] = x
    return PointednessVerdict(True, depth, m)


# rational fans and the ray basis -------------------------------------------------


@dataclass(frozen=True)
class RationalFan2D:
    """A complete or partial simplicial fan in the plane given by primitive ray generators."""

    cones: tuple[tuple[Exp, ...], ...]

    def __post_init__(self):
        for cone in self.cones:
            for ray in cone:
                if primitive(ray) != tuple(ray):
                    raise ValueError(f"ray generator {ray} is not primitive")
            if len(cone) == 2 and cross(cone[0], cone[1]) <= 0:
                raise ValueError(f"cone {cone} is not a strictly convex counterclockwise pair")

    @property
    def integral(self) -> bool:
        return all(len(c) < 2 or abs(cross(c[0], c[1])) == 1 for c in self.cones)

    @property
    def rays(self) -> list[Exp]:
        seen = []
        for cone in self.cones:
            for ray in cone:
                if tuple(ray) not in seen:
                    seen.append(tuple(ray))
        return sorted(seen, key=angle_key)

    @classmethod
    def from_rays(cls, rays: Sequence[Exp]) -> "RationalFan2D":
        """Complete fan whose maximal cones lie between angularly consecutive rays."""
        rays = sorted({primitive(r) for r in rays}, key=angle_key)
        cones = [(r,) for r in rays]
        for a, b in zip(rays, rays[1:] + rays[:1]):
            cones.append((a, b))
        return cls(tuple(cones))

    @classmethod
    def from_diagram(cls, diagram: ScatteringDiagram) -> "RationalFan2D":
        """Chamber fan of a certified finite-type diagram: walls and initial lines as rays."""
        if not diagram.is_certified_finite():
            raise ValueError("fans are computed only for certified finite-type diagrams")
        return cls.from_rays([ray.direction for ray in diagram.rays()])

    def locate(self, m) -> tuple[tuple[Exp, ...], tuple[Fraction, ...]]:
        """Smallest cone containing ``m`` and the coefficients of ``m`` on its rays."""
        m = tuple(m)
        if not any(m):
            return (), ()
        for cone in self.cones:
            if len(cone) == 1:
                r = cone[0]
                if cross(r, m) == 0 and r[0] * m[0] + r[1] * m[1] > 0:
                    return cone, (Fraction(max(abs(x) for x in m), max(abs(x) for x in r)),)
        for cone in self.cones:
            if len(cone) == 2:
                r1, r2 = cone
                det = cross(r1, r2)
                a = Fraction(cross(m, r2), det)
                b = Fraction(cross(r1, m), det)
                if a > 0 and b > 0:
                    return cone, (a, b)
        raise ValueError(f"{m} lies in no cone of the fan")


def ray_basis_element(fan: RationalFan2D, thetas: Callable[[Exp, int], TruncatedSeries], m, order: int) -> PointedElement:
    """``rho_m``: the product of theta functions of the ray generators of the cone of ``m``."""
    m = tuple(m)
    cone, coeffs = fan.locate(m)
    if not cone:
        return PointedElement(m, TruncatedSeries.one(len(m), order))
    if any(c.denominator != 1 for c in coeffs):
        raise ValueError(f"{m} has non-integral coordinates {coeffs} on the rays {cone}")
    factors = [(ray, int(c)) for ray, c in zip(cone, coeffs)]
    p, F = product_F(factors, thetas, order)
    assert p == m
    return PointedElement(m, F)


def exact_theta_F(diagram: ScatteringDiagram) -> Callable[[Exp, int], TruncatedSeries]:
    """Exact F-polynomials on a certified finite-type diagram (the order argument is ignored)."""
    cache: dict = {}

    def F(m, order=None):
        m = tuple(m)
        if m not in cache:
            if not any(m):
                cache[m] = TruncatedSeries.one(len(m))
            else:
                cache[m] = theta_closed(diagram, m).F
        return cache[m]

    return F


# B-cone products ------------------------------------------------------------------


@dataclass(frozen=True)
class BConeReport:
    m: Exp
    expansion: tuple
    leading_ok: bool
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.leading_ok and not self.violations


def bcone_product_expand(
    diagram: ScatteringDiagram,
    factors: Sequence[tuple[Exp, int]],
    order: int,
    depth: int,
    basis: Callable[[Exp, int], TruncatedSeries] | None = None,
) -> BConeReport:
    """Expand a product over one B-cone and check its support against ``N_m`` and ``Dom_m``."""
    B = diagram.B
    Bt = diagram.matrix
    ms = [tuple(f[0]) for f in factors]
    if not same_b_cone_up_to_depth(B, ms, depth):
        raise ValueError(f"{ms} do not share a B-cone at depth {depth}")
    basis = basis or ThetaFSeries(diagram)
    p, F = product_F(factors, basis, order)
    expansion = extract_pointed(F, p, B, basis, order)
    leading = [c for q, n, c in expansion if not any(n)]
    leading_ok = leading == [1]
    violations = []
    for q, n, c in expansion:
        if q != tuple(a + b for a, b in zip(p, row_times_B(n, B))):
            violations.append(f"{q}: not of the form m + nB")
        if not any(n):
            continue
        verdict = n_set_membership(Bt, p, n, depth)
        if verdict.value == "out":
            violations.append(f"n = {n}: outside N_m (witness {verdict.witness})")
        dverdict = dom_membership(B, p, q, depth)
        if dverdict.value == "out":
            violations.append(f"p = {q}: outside Dom_m (witness {dverdict.witness})")
    return BConeReport(p, tuple(expansion), leading_ok, tuple(violations))
