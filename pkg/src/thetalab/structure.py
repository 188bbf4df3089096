"""Structure constants for products of theta functions and the checks built on them.

``a_Q(p1, p2, m)`` sums ``c1 c2 sigma^{n1 + n2}`` over pairs of broken lines
ending at ``Q`` whose final exponents add up to ``m``.  Series in ``sigma``
are stored as :class:`TruncatedSeries` indexed by the ``sigma`` exponent
``n``; for nonsingular ``B`` each entry is a single monomial since
``m - nB = p1 + p2`` pins down ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

from .broken_lines import (
    BrokenLine,
    NonGenericError,
    enumerate_broken_lines,
    mutate_broken_line,
    theta,
)
from .lattice import eta_orbit, mutate_sequence, mutation_map, row_times_B, same_domain_of_definition
from .scattering import ScatteringDiagram
from .series import TruncatedSeries
from .substitution import SeedFrame


class InstabilityError(ValueError):
    """The two-point probe for ``lim_{Q -> m} a_Q`` gave different answers."""

    def __init__(self, first, second):
        super().__init__(f"a_Q not stable near m at this order: {first} vs {second}")
        self.first = first
        self.second = second


class ResidualError(ValueError):
    """A theta-basis extraction left a nonzero residual."""


class DomainOfDefinitionError(ValueError):
    """``m`` and ``Q`` are not in the same domain of definition of the mutation map."""


# cached enumeration -------------------------------------------------------------


class LineCache:
    """Broken-line lists keyed by diagram, ``m``, endpoint and order.

    The diagram enters the key through its identity, and a reference is held so
    the identity cannot be recycled while the cache is alive.
    """

    def __init__(self):
        self._store: dict = {}
        self._diagrams: dict[int, ScatteringDiagram] = {}

    def lines(self, diagram: ScatteringDiagram, m, Q, order: int) -> list[BrokenLine]:
        m = tuple(m)
        Q = tuple(Fraction(x) for x in Q)
        key = (id(diagram), m, Q, order)
        if key not in self._store:
            self._diagrams[id(diagram)] = diagram
            self._store[key] = [] if not any(m) else enumerate_broken_lines(diagram, m, Q, order)
        return self._store[key]


_DEFAULT_CACHE = LineCache()


def _lines_with_zero(cache, diagram, p, Q, order):
    if any(p):
        return cache.lines(diagram, p, Q, order)
    return None  # theta_0 = 1: a single "line" with label z^0


def _final_terms(cache, diagram, p, Q, order):
    """``(m_gamma, n_gamma, c_gamma)`` for every broken line of ``p`` at ``Q``."""
    lines = _lines_with_zero(cache, diagram, p, Q, order)
    if lines is None:
        r = len(p)
        return [(tuple(p), (0,) * r, Fraction(1))]
    return [(g.final.m, g.exponent, g.coeff) for g in lines]


# a_Q and the limit -----------------------------------------------------------------


@dataclass(frozen=True)
class StructureConstantTable:
    p1: tuple[int, ...]
    p2: tuple[int, ...]
    Q: tuple[Fraction, ...]
    order: int
    entries: dict = field(repr=False)


def structure_table(
    diagram: ScatteringDiagram, p1, p2, Q, order: int, cache: LineCache | None = None
) -> StructureConstantTable:
    """All nonzero ``a_Q(p1, p2, m)`` with total ``sigma``-degree at most ``order``."""
    cache = cache or _DEFAULT_CACHE
    r = len(p1)
    t1 = _final_terms(cache, diagram, tuple(p1), Q, order)
    t2 = _final_terms(cache, diagram, tuple(p2), Q, order)
    acc: dict[tuple, dict[tuple, Fraction]] = {}
    for m1, n1, c1 in t1:
        for m2, n2, c2 in t2:
            n = tuple(a + b for a, b in zip(n1, n2))
            if sum(n) > order:
                continue
            m = tuple(a + b for a, b in zip(m1, m2))
            slot = acc.setdefault(m, {})
            slot[n] = slot.get(n, 0) + c1 * c2
    entries = {m: TruncatedSeries(terms, r, order) for m, terms in acc.items()}
    entries = {m: s for m, s in entries.items() if s.terms}
    return StructureConstantTable(tuple(p1), tuple(p2), tuple(Fraction(x) for x in Q), order, entries)


def a_Q(diagram: ScatteringDiagram, p1, p2, m, Q, order: int, cache: LineCache | None = None) -> TruncatedSeries:
    table = structure_table(diagram, p1, p2, Q, order, cache)
    return table.entries.get(tuple(m), TruncatedSeries.zero(len(p1), order))


LIMIT_OFFSET = (Fraction(3, 7), Fraction(-2, 5))
LIMIT_EPSILON = Fraction(1, 1000)


def a_limit(
    diagram: ScatteringDiagram,
    p1,
    p2,
    m,
    order: int,
    g=LIMIT_OFFSET,
    eps: Fraction = LIMIT_EPSILON,
    cache: LineCache | None = None,
) -> TruncatedSeries:
    """``a(p1, p2, m)``: ``a_Q`` at ``Q = eps m + eps^2 g`` for ``eps`` and ``eps / 2``."""
    if not any(m):
        raise ValueError("the limit probe needs m != 0")
    values = []
    for e in (Fraction(eps), Fraction(eps) / 2):
        offsets = [tuple(Fraction(x) for x in g)] + [
            (Fraction(g[0]) + Fraction(1, 2 ** (i + 3)), Fraction(g[1]) - Fraction(1, 3 * 2 ** (i + 3)))
            for i in range(8)
        ]
        for off in offsets:
            Q = tuple(e * a + e * e * b for a, b in zip(m, off))
            try:
                values.append(a_Q(diagram, p1, p2, m, Q, order, cache))
                break
            except NonGenericError:
                continue
        else:
            raise NonGenericError(f"no generic probe point found near {m}")
    if values[0] != values[1]:
        raise InstabilityError(values[0], values[1])
    return values[0]


# expansion in the theta basis ---------------------------------------------------


class ThetaFSeries:
    """F-series of theta functions at a fixed endpoint, cached by ``(m, order)``."""

    def __init__(self, diagram: ScatteringDiagram, Q=None):
        self.diagram = diagram
        self.Q = Q
        self._cache: dict = {}

    def __call__(self, m, order: int) -> TruncatedSeries:
        m = tuple(m)
        key = (m, order)
        if key not in self._cache:
            r = len(m)
            if not any(m):
                self._cache[key] = TruncatedSeries.one(r, order)
            else:
                res = theta(self.diagram, m, self.Q, order, certify=False)
                self._cache[key] = res.F.truncate(order)
        return self._cache[key]


def extract_pointed(
    F: TruncatedSeries, p, B, basis_F, order: int
) -> list[tuple[tuple[int, ...], tuple[int, ...], Fraction]]:
    """Triangular extraction of ``z^p F`` against pointed elements ``z^q F_q``.

    ``basis_F(q, order)`` returns the F-series of the basis element with
    ``g``-vector ``q``.  Terms are removed by increasing total ``zeta``-degree,
    so each step only touches degrees at least as large as the current one.
    Returns ``(m, n, c)`` meaning ``c sigma^n u_m`` with ``m = p + nB``.
    """
    p = tuple(p)
    R = F.truncate(order)
    out = []
    for deg in range(order + 1):
        current = sorted((n, c) for n, c in R.terms.items() if sum(n) == deg)
        for n, c in current:
            m = tuple(a + b for a, b in zip(p, row_times_B(n, B)))
            Fm = basis_F(m, order - deg)
            if Fm.constant_term() != 1:
                raise ValueError(f"basis element for {m} is not pointed")
            R = R - Fm.shift(n).with_order(order) * c
            out.append((m, n, c))
    if any(R.terms):
        raise ResidualError(f"residual {R} after extraction up to degree {order}")
    out.sort(key=lambda t: (sum(t[1]), t[1], t[0]))
    return out


def product_F(factors: Sequence[tuple[Sequence[int], int]], thetas: ThetaFSeries, order: int):
    r = len(factors[0][0])
    F = TruncatedSeries.one(r, order)
    p = [0] * r
    for m, a in factors:
        if a < 0:
            raise ValueError("exponents must be nonnegative")
        F = F * thetas(m, order).power(a, order)
        p = [x + a * y for x, y in zip(p, m)]
    return tuple(p), F.truncate(order)


def expand_product_in_theta_basis(
    diagram: ScatteringDiagram, factors: Sequence[tuple[Sequence[int], int]], order: int, Q=None
) -> list[tuple[tuple[int, ...], tuple[int, ...], Fraction]]:
    """Coefficients of ``prod theta_{m_i}^{a_i} = sum c sigma^n theta_m`` up to ``zeta``-degree ``order``."""
    thetas = ThetaFSeries(diagram, Q)
    p, F = product_F(factors, thetas, order)
    return extract_pointed(F, p, diagram.B, thetas, order)


def resum_expansion(expansion, thetas: ThetaFSeries, p, B, order: int) -> TruncatedSeries:
    """``z^{-p} sum c sigma^n theta_m`` as a series in ``zeta``; inverse of the extraction."""
    r = len(p)
    total = TruncatedSeries.zero(r, order)
    for m, n, c in expansion:
        total = total + thetas(m, order - sum(n)).shift(n).with_order(order) * c
    return total


# mutation symmetry -------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryVerdict:
    ok: bool
    orbits: dict
    problems: tuple[str, ...]


def fixing_power(B, kseq: Sequence[int], vectors, max_iter: int = 100) -> int | None:
    """Smallest ``l`` with ``(eta_kseq)^l`` fixing every vector, or ``None`` if some orbit is too long."""
    ell = 1
    for v in vectors:
        orbit = eta_orbit(B, kseq, v, max_iter)
        if orbit is None:
            return None
        ell = lcm(ell, len(orbit))
    return ell


def verify_symmetry_support(
    Bt, kseq: Sequence[int], expansion, ell: int, max_iter: int = 100, in_range=None
) -> SymmetryVerdict:
    """Check that the support of an expansion is a union of ``(eta_kseq)^ell``-orbits.

    ``in_range(q)`` can exclude orbit points that a truncated expansion could
    not contain anyway; they are then not reported as missing.
    """
    B = Bt.B if hasattr(Bt, "B") else Bt
    kseq = tuple(kseq)
    if mutate_sequence(B, kseq) != tuple(tuple(row) for row in B):
        raise ValueError(f"{kseq} is not a mutation symmetry")
    support = {tuple(m) for m, n, c in expansion if c}
    word = kseq * ell
    orbits = {}
    problems = []
    for m in sorted(support):
        orbit = eta_orbit(B, word, m, max_iter) if word else [m]
        orbits[m] = orbit
        if orbit is None:
            problems.append(f"{m}: orbit longer than {max_iter}")
            continue
        missing = [q for q in orbit if q not in support and (in_range is None or in_range(q))]
        if missing:
            problems.append(f"{m}: orbit points {missing} missing from the support")
    return SymmetryVerdict(not problems, orbits, tuple(problems))


# mutation of pairs of broken lines ---------------------------------------------------


def mutate_line_along(line: BrokenLine, Bt, kseq: Sequence[int]) -> BrokenLine:
    frame = SeedFrame(Bt)
    for k in kseq:
        line = mutate_broken_line(line, frame, k)
        frame = frame.mutate(k)
    return line


def verify_mut_pair(
    diagram: ScatteringDiagram,
    line1: BrokenLine,
    line2: BrokenLine,
    kseq: Sequence[int],
    Q,
    m,
    mutated_diagram: ScatteringDiagram | None = None,
    order: int | None = None,
) -> bool:
    """A pair contributes to ``a_Q(p1, p2, m)`` exactly when its image contributes at the mutated data.

    When ``mutated_diagram`` is given, the images are also required to appear
    among the broken lines enumerated there (matched by label sequence).
    """
    B = diagram.B
    Q = tuple(Fraction(x) for x in Q)
    if not same_domain_of_definition(B, kseq, m, Q):
        raise DomainOfDefinitionError(f"m = {tuple(m)} and Q = {Q} differ in domain of definition for {tuple(kseq)}")
    before = tuple(a + b for a, b in zip(line1.final.m, line2.final.m)) == tuple(m)
    g1 = mutate_line_along(line1, diagram.matrix, kseq)
    g2 = mutate_line_along(line2, diagram.matrix, kseq)
    m2 = mutation_map(B, kseq, m)
    after = tuple(a + b for a, b in zip(g1.final.m, g2.final.m)) == tuple(m2)
    if mutated_diagram is not None:
        for g in (g1, g2):
            deg = order if order is not None else max(g.degree, 0)
            found = enumerate_broken_lines(mutated_diagram, g.asymptotic, g.endpoint, max(deg, g.degree))
            if g.labels() not in {h.labels() for h in found}:
                return False
    return before == after

