"""Exact truncated power series in ``zeta`` and the g-graded ambient algebra.

A :class:`TruncatedSeries` is known exactly in total ``zeta``-degree at most
``order``; ``order=None`` marks an exact polynomial (no truncation).  Graded
elements are stored in ``(z, zeta)`` coordinates: a piece at ``g`` is
``z^g zeta^shift H(zeta)``.  The ``sigma`` view is derived from
``sigma^n = z^{-nB} zeta^n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .lattice import row_times_B

Exp = tuple[int, ...]


def _min_order(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _add_vec(a: Sequence[int], b: Sequence[int]) -> Exp:
    return tuple(x + y for x, y in zip(a, b))


def _sub_vec(a: Sequence[int], b: Sequence[int]) -> Exp:
    return tuple(x - y for x, y in zip(a, b))


def graded_lex_key(n: Sequence[int]):
    return (sum(n), tuple(n))


class TruncatedSeries:
    """Multivariate power series with exact rational coefficients."""

    __slots__ = ("nvars", "order", "terms")

    def __init__(self, terms: Mapping[Sequence[int], object] | None, nvars: int, order: int | None):
        if order is not None and order < 0:
            raise ValueError("truncation order must be nonnegative")
        clean: dict[Exp, Fraction] = {}
        for n, c in (terms or {}).items():
            n = tuple(int(x) for x in n)
            if len(n) != nvars:
                raise ValueError(f"exponent {n} has wrong length for {nvars} variables")
            if any(x < 0 for x in n):
                raise ValueError(f"negative exponent {n} in a power series")
            if order is not None and sum(n) > order:
                continue
            c = Fraction(c)
            if c:
                clean[n] = clean.get(n, Fraction(0)) + c
                if not clean[n]:
                    del clean[n]
        self.nvars = nvars
        self.order = order
        self.terms = clean

    # construction -----------------------------------------------------
    @classmethod
    def one(cls, nvars: int, order: int | None = None) -> "TruncatedSeries":
        return cls({(0,) * nvars: 1}, nvars, order)

    @classmethod
    def zero(cls, nvars: int, order: int | None = None) -> "TruncatedSeries":
        return cls({}, nvars, order)

    @classmethod
    def monomial(cls, n: Sequence[int], coeff=1, order: int | None = None) -> "TruncatedSeries":
        return cls({tuple(n): coeff}, len(n), order)

    @classmethod
    def binomial(cls, n: Sequence[int], order: int | None = None) -> "TruncatedSeries":
        """``1 + zeta^n``."""
        return cls({(0,) * len(n): 1, tuple(n): 1}, len(n), order)

    # basic queries ----------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.order is None

    def coeff(self, n: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(n), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coeff((0,) * self.nvars)

    def degree(self) -> int:
        return max((sum(n) for n in self.terms), default=0)

    def sorted_terms(self) -> list[tuple[Exp, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: graded_lex_key(t[0]))

    def truncate(self, order: int | None) -> "TruncatedSeries":
        return TruncatedSeries(self.terms, self.nvars, _min_order(self.order, order))

    def with_order(self, order: int | None) -> "TruncatedSeries":
        """Reinterpret the stored terms at another order (used to mark closed polynomials)."""
        return TruncatedSeries(self.terms, self.nvars, order)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = TruncatedSeries.one(self.nvars) * other
        if not isinstance(other, TruncatedSeries) or other.nvars != self.nvars:
            return NotImplemented
        order = _min_order(self.order, other.order)
        a = self.truncate(order).terms
        b = other.truncate(order).terms
        return a == b

    def __hash__(self):
        return hash((self.nvars, self.order, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*zeta^{list(n)}" for n, c in self.sorted_terms()) or "0"
        return f"TruncatedSeries({body}, order={self.order})"

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.nvars != self.nvars:
                raise ValueError("series have different numbers of variables")
            return other
        return TruncatedSeries({(0,) * self.nvars: other}, self.nvars, None)

    def __add__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        terms = dict(self.terms)
        for n, c in other.terms.items():
            terms[n] = terms.get(n, 0) + c
        return TruncatedSeries(terms, self.nvars, _min_order(self.order, other.order))

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries({n: -c for n, c in self.terms.items()}, self.nvars, self.order)

    def __sub__(self, other) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TruncatedSeries":
        return (-self) + other

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            c = Fraction(other)
            return TruncatedSeries({n: c * v for n, v in self.terms.items()}, self.nvars, self.order)
        if other.nvars != self.nvars:
            raise ValueError("series have different numbers of variables")
        order = _min_order(self.order, other.order)
        out: dict[Exp, Fraction] = {}
        bterms = sorted(other.terms.items(), key=lambda t: sum(t[0]))
        for n1, c1 in self.terms.items():
            d1 = sum(n1)
            for n2, c2 in bterms:
                if order is not None and d1 + sum(n2) > order:
                    break
                key = _add_vec(n1, n2)
                out[key] = out.get(key, 0) + c1 * c2
        return TruncatedSeries(out, self.nvars, order)

    __rmul__ = __mul__

    def shift(self, n: Sequence[int]) -> "TruncatedSeries":
        """Multiply by the monomial ``zeta^n`` (``n >= 0``); the order grows accordingly."""
        order = None if self.order is None else self.order + sum(n)
        return TruncatedSeries({_add_vec(k, n): c for k, c in self.terms.items()}, self.nvars, order)

    def inverse(self, order: int | None = None) -> "TruncatedSeries":
        """Multiplicative inverse; needs a nonzero constant term and a finite order."""
        c0 = self.constant_term()
        if not c0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        order = _min_order(self.order, order)
        if order is None:
            if len(self.terms) == 1:
                return TruncatedSeries({(0,) * self.nvars: 1 / c0}, self.nvars, None)
            raise ValueError("inverting a non-constant exact polynomial needs a truncation order")
        # x^{-1} = c0^{-1} sum_j (-u)^j with u = x/c0 - 1
        u = self * (1 / c0) - 1
        result = TruncatedSeries.one(self.nvars, order)
        power = TruncatedSeries.one(self.nvars, order)
        for _ in range(order):
            power = power * (-u)
            if not power.terms:
                break
            result = result + power
        return result * (1 / c0)

    def __pow__(self, e: int) -> "TruncatedSeries":
        if e < 0:
            return self.inverse() ** (-e)
        result = TruncatedSeries.one(self.nvars, self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def power(self, e: int, order: int | None = None) -> "TruncatedSeries":
        """``self**e`` computed at the given truncation order (required when ``e < 0``)."""
        base = self.truncate(order)
        if e < 0:
            base = base.inverse(order)
            e = -e
        return base ** e

    def substitute_monomials(self, images: Mapping[Exp, "TruncatedSeries"]) -> "TruncatedSeries":
        """Replace each ``zeta^n`` by ``images[n]`` and sum (images precomputed by the caller)."""
        out = None
        for n, c in self.terms.items():
            term = images[n] * c
            out = term if out is None else out + term
        return out if out is not None else TruncatedSeries.zero(self.nvars, self.order)


def binomial_series(k: int, e: int, nvars: int, order: int) -> TruncatedSeries:
    """``(1 + zeta_k)^e`` truncated at ``order`` (any integer ``e``)."""
    terms = {}
    for j in range(order + 1):
        c = _gen_binom(e, j)
        if c == 0 and e >= 0:
            break
        n = [0] * nvars
        n[k] = j
        terms[tuple(n)] = c
    return TruncatedSeries(terms, nvars, order)


def _gen_binom(e: int, j: int) -> int:
    if e >= 0:
        return comb(e, j)
    # (-1)^j C(|e| + j - 1, j)
    return (-1) ** j * comb(-e + j - 1, j)


@dataclass(frozen=True)
class Piece:
    """``zeta^shift * series``; ``shift`` may have negative entries."""

    shift: Exp
    series: TruncatedSeries

    def normalized(self) -> "Piece":
        """Move the largest common monomial factor into the shift."""
        if not self.series.terms:
            return self
        r = self.series.nvars
        low = tuple(min(n[i] for n in self.series.terms) for i in range(r))
        if not any(low):
            return self
        s = self.series
        order = None if s.order is None else s.order - sum(low)
        terms = {_sub_vec(n, low): c for n, c in s.terms.items()}
        return Piece(_add_vec(self.shift, low), TruncatedSeries(terms, r, order))

    def reshift(self, new_shift: Sequence[int]) -> "Piece":
        """Express with a componentwise smaller shift (absolute precision is kept)."""
        delta = _sub_vec(self.shift, new_shift)
        if any(x < 0 for x in delta):
            raise ValueError("new shift must be componentwise <= the current one")
        return Piece(tuple(new_shift), self.series.shift(delta))

    def absolute_terms(self) -> dict[Exp, Fraction]:
        return {_add_vec(n, self.shift): c for n, c in self.series.terms.items()}

    def precision(self) -> int | None:
        """Absolute total degree up to which the piece is exact."""
        if self.series.order is None:
            return None
        return self.series.order + sum(self.shift)


class GradedElement:
    """Finite sum over ``g`` of ``z^g zeta^shift H``; the computational ambient algebra."""

    __slots__ = ("nvars", "pieces")

    def __init__(self, pieces: Mapping[Sequence[int], Piece], nvars: int):
        self.nvars = nvars
        self.pieces: dict[Exp, Piece] = {}
        for g, p in pieces.items():
            if p.series.terms:
                self.pieces[tuple(g)] = p

    @classmethod
    def monomial(cls, g: Sequence[int], n: Sequence[int] | None = None, coeff=1, order=None):
        g = tuple(g)
        n = tuple(n) if n is not None else (0,) * len(g)
        series = TruncatedSeries({(0,) * len(g): coeff}, len(g), order)
        return cls({g: Piece(n, series)}, len(g))

    @classmethod
    def from_series(cls, g: Sequence[int], series: TruncatedSeries, shift=None) -> "GradedElement":
        shift = tuple(shift) if shift is not None else (0,) * series.nvars
        return cls({tuple(g): Piece(shift, series)}, series.nvars)

    @classmethod
    def one(cls, nvars: int) -> "GradedElement":
        return cls.monomial((0,) * nvars)

    @classmethod
    def sigma_monomial(cls, B, n: Sequence[int], coeff=1) -> "GradedElement":
        """``sigma^n = z^{-nB} zeta^n``."""
        g = tuple(-x for x in row_times_B(n, B))
        return cls.monomial(g, n, coeff)

    @classmethod
    def from_z_sigma(cls, B, terms: Mapping[tuple[Exp, Exp], object]) -> "GradedElement":
        """Build from ``{(p, n): c}`` meaning ``sum c z^p sigma^n``."""
        out = None
        for (p, n), c in terms.items():
            nb = row_times_B(n, B)
            x = cls.monomial(_sub_vec(p, nb), n, c)
            out = x if out is None else out + x
        return out if out is not None else cls({}, len(B))

    def is_zero(self) -> bool:
        return not self.pieces

    def g_vector(self) -> Exp | str:
        """The g-vector if homogeneous, else the marker ``"inhomogeneous"``."""
        if len(self.pieces) == 1:
            return next(iter(self.pieces))
        if not self.pieces:
            return (0,) * self.nvars
        return "inhomogeneous"

    def piece(self, g: Sequence[int]) -> Piece | None:
        return self.pieces.get(tuple(g))

    def coefficient(self, m: Sequence[int], n: Sequence[int]) -> Fraction:
        """Coefficient of ``z^m zeta^n``."""
        p = self.pieces.get(tuple(m))
        if p is None:
            return Fraction(0)
        rel = _sub_vec(n, p.shift)
        if any(x < 0 for x in rel):
            return Fraction(0)
        return p.series.coeff(rel)

    def z_sigma_terms(self, B) -> dict[tuple[Exp, Exp], Fraction]:
        """The ``sigma`` view: ``{(p, n): c}`` with ``z^g zeta^n = z^{g+nB} sigma^n``."""
        out = {}
        for g, p in self.pieces.items():
            for n, c in p.absolute_terms().items():
                out[(_add_vec(g, row_times_B(n, B)), n)] = c
        return out

    def precision(self) -> int | None:
        precs = [p.precision() for p in self.pieces.values()]
        finite = [x for x in precs if x is not None]
        return min(finite) if finite else None

    def __add__(self, other: "GradedElement") -> "GradedElement":
        pieces = dict(self.pieces)
        for g, q in other.pieces.items():
            if g not in pieces:
                pieces[g] = q
                continue
            p = pieces[g]
            low = tuple(min(a, b) for a, b in zip(p.shift, q.shift))
            s = p.reshift(low).series + q.reshift(low).series
            pieces[g] = Piece(low, s).normalized()
        return GradedElement(pieces, self.nvars)

    def __neg__(self) -> "GradedElement":
        return GradedElement({g: Piece(p.shift, -p.series) for g, p in self.pieces.items()}, self.nvars)

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def __mul__(self, other) -> "GradedElement":
        if not isinstance(other, GradedElement):
            return GradedElement(
                {g: Piece(p.shift, p.series * other) for g, p in self.pieces.items()}, self.nvars
            )
        out = GradedElement({}, self.nvars)
        for g1, p1 in self.pieces.items():
            for g2, p2 in other.pieces.items():
                piece = Piece(_add_vec(p1.shift, p2.shift), p1.series * p2.series)
                out = out + GradedElement({_add_vec(g1, g2): piece}, self.nvars)
        return out

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "GradedElement":
        if e < 0:
            raise ValueError("negative powers of graded elements are not supported")
        out = GradedElement.one(self.nvars)
        for _ in range(e):
            out = out * self
        return out

    def truncate(self, order: int | None) -> "GradedElement":
        return GradedElement(
            {g: Piece(p.shift, p.series.truncate(order)) for g, p in self.pieces.items()}, self.nvars
        )

    def equals(self, other: "GradedElement", order: int | None = None) -> bool:
        """Piecewise equality on absolute degrees where both sides are known."""
        if set(self.pieces) != set(other.pieces):
            return False
        for g in self.pieces:
            a, b = self.pieces[g], other.pieces[g]
            prec = [x for x in (a.precision(), b.precision(), order) if x is not None]
            cap = min(prec) if prec else None
            ta = {n: c for n, c in a.absolute_terms().items() if cap is None or sum(n) <= cap}
            tb = {n: c for n, c in b.absolute_terms().items() if cap is None or sum(n) <= cap}
            if ta != tb:
                return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedElement):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self) -> str:
        parts = []
        for g, p in sorted(self.pieces.items()):
            parts.append(f"z^{list(g)}*zeta^{list(p.shift)}*({p.series!r})")
        return "GradedElement(" + " + ".join(parts) + ")"


@dataclass(frozen=True)
class PointedElement:
    """``sigma^sigma_shift z^base F``."""

    base: Exp
    F: TruncatedSeries
    sigma_shift: Exp = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        if not self.sigma_shift:
            object.__setattr__(self, "sigma_shift", (0,) * len(self.base))

    def to_graded(self, B) -> GradedElement:
        g = _sub_vec(self.base, row_times_B(self.sigma_shift, B))
        return GradedElement({g: Piece(self.sigma_shift, self.F)}, len(self.base))


def sum_elements(items: Iterable[GradedElement], nvars: int) -> GradedElement:
    out = GradedElement({}, nvars)
    for x in items:
        out = out + x
    return out
