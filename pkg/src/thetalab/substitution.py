"""Seed frames and the mutation substitution of the exchange relations.

A monomial ``z^p sigma^n`` in the unprimed variables becomes
``z'^{p'} sigma'^{n'} (1 + zeta'_k)^e`` in the primed ones.  The series-level
routine :func:`substitute_mutation` works piece by piece in ``(z, zeta)``
coordinates and keeps careful track of which output degrees are determined by
the truncated input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .lattice import ExtendedExchangeMatrix, pos, row_times_B
from .series import GradedElement, Piece, TruncatedSeries, binomial_series


class CoefficientDegeneracyError(ValueError):
    """Raised when ``sgn(sigma_k)`` is undefined at a frame."""


class NotLaurentError(ValueError):
    """Raised when an exact substitution does not produce a Laurent polynomial."""


@dataclass(frozen=True)
class SeedFrame:
    """The seed reached from ``base`` by mutating along ``kseq``."""

    base: ExtendedExchangeMatrix
    kseq: tuple[int, ...] = ()

    @property
    def matrix(self) -> ExtendedExchangeMatrix:
        return self.base.mutate_sequence(self.kseq)

    @property
    def signs(self) -> tuple[int, ...] | None:
        Bt = self.matrix
        if not Bt.frozen_rows_independent():
            return None
        return Bt.sigma_signs()

    def sign(self, k: int) -> int:
        signs = self.signs
        if signs is None:
            raise CoefficientDegeneracyError(
                f"frame {self.kseq}: frozen block is degenerate or not sign-coherent"
            )
        return signs[k]

    def mutate(self, k: int) -> "SeedFrame":
        return SeedFrame(self.base, self.kseq + (k,))


def substitute_z_sigma(p: Sequence[int], n: Sequence[int], Bt: ExtendedExchangeMatrix, s: int, k: int):
    """Image of ``z^p sigma^n`` as ``(p', n', e)``: ``z'^{p'} sigma'^{n'} (1 + zeta'_k)^e``.

    ``Bt`` is the unprimed extended matrix and ``s = sgn(sigma_k)``.
    """
    B = Bt.B
    r = len(B)
    pk = p[k]
    new_p = list(p)
    new_p[k] = -pk
    for j in range(r):
        if j != k:
            new_p[j] += pk * pos(B[k][j])
    sk = -pk * pos(s) - n[k]
    new_n = list(n)
    for i in range(r):
        if i != k:
            sk += n[i] * pos(s * B[i][k])
    new_n[k] = sk
    return tuple(new_p), tuple(new_n), pk


def substitute_z_zeta(g: Sequence[int], nu: Sequence[int], Bt: ExtendedExchangeMatrix, s: int, k: int):
    """Image of ``z^g zeta^nu`` as ``(g', nu', e)``: ``z'^{g'} zeta'^{nu'} (1 + zeta'_k)^e``."""
    B = Bt.B
    nb = row_times_B(nu, B)
    p = tuple(a + b for a, b in zip(g, nb))
    new_p, new_n, e = substitute_z_sigma(p, nu, Bt, s, k)
    Bp = Bt.mutate(k).B
    nb2 = row_times_B(new_n, Bp)
    return tuple(a - b for a, b in zip(new_p, nb2)), new_n, e


def _group_terms(piece: Piece, k: int):
    groups: dict[tuple, dict[int, Fraction]] = {}
    for n, c in piece.series.terms.items():
        key = n[:k] + n[k + 1:]
        groups.setdefault(key, {})[n[k]] = c
    return groups


def _divide_by_one_plus(terms: dict[tuple, Fraction], k: int, times: int) -> dict[tuple, Fraction]:
    """Exact division of a Laurent polynomial by ``(1 + zeta_k)^times``."""
    for _ in range(times):
        chains: dict[tuple, dict[int, Fraction]] = {}
        for n, c in terms.items():
            chains.setdefault(n[:k] + n[k + 1:], {})[n[k]] = c
        out = {}
        for key, coeffs in chains.items():
            lo, hi = min(coeffs), max(coeffs)
            prev = Fraction(0)
            for j in range(lo, hi):
                q = coeffs.get(j, Fraction(0)) - prev
                if q:
                    out[key[:k] + (j,) + key[k:]] = q
                prev = q
            if coeffs.get(hi, Fraction(0)) != prev:
                raise NotLaurentError("division by 1 + zeta_k is not exact")
        terms = out
    return terms


def _substitute_piece_exact(g, piece: Piece, Bt, s, k):
    images = {}
    for n, c in piece.absolute_terms().items():
        g2, nu2, e = substitute_z_zeta(g, n, Bt, s, k)
        images.setdefault(g2, []).append((nu2, e, c))
    result = GradedElement({}, len(g))
    for g2, items in images.items():
        E = max(0, max(-e for _, e, _ in items))
        acc: dict[tuple, Fraction] = {}
        for nu2, e, c in items:
            for j in range(e + E + 1):
                key = list(nu2)
                key[k] += j
                key = tuple(key)
                acc[key] = acc.get(key, 0) + c * comb(e + E, j)
        acc = {n: c for n, c in acc.items() if c}
        acc = _divide_by_one_plus(acc, k, E)
        if not acc:
            continue
        r = len(g)
        low = tuple(min(n[i] for n in acc) for i in range(r))
        series = TruncatedSeries({tuple(a - b for a, b in zip(n, low)): c for n, c in acc.items()}, r, None)
        result = result + GradedElement({g2: Piece(low, series)}, r)
    return result


def _substitute_piece_truncated(g, piece: Piece, Bt, s, k, lower_k):
    """Truncated substitution of one homogeneous piece.

    Each group of terms sharing the non-``k`` exponents maps to
    ``zeta'^{T} (1 + zeta'_k)^e`` with a common ``e``; a group is usable only
    when all its terms down to ``zeta'_k``-exponent ``lower_k`` are known.
    """
    r = len(g)
    D = piece.series.order
    groups = _group_terms(piece, k)
    b = piece.shift

    def T_k_of(rest: tuple, nk: int) -> int:
        full = rest[:k] + (nk,) + rest[k:]
        _, nu2, _ = substitute_z_zeta(g, tuple(x + y for x, y in zip(full, b)), Bt, s, k)
        return nu2[k]

    # lower bound on the output zeta'_k exponent
    if lower_k is None:
        cand = []
        for rest, coeffs in groups.items():
            cand.append(min(T_k_of(rest, nk) for nk in coeffs))
        lower_k = min(cand) if cand else 0

    def complete(rest: tuple) -> bool:
        # T_k decreases by one per unit of n_k: need n_k up to T_k(rest, 0) - lower_k
        need = T_k_of(rest, 0) - lower_k
        return need + sum(rest) <= D

    # smallest degree of an incomplete group bounds the output precision
    out_order = None
    deg = 0
    while out_order is None:
        rests = [t for t in _compositions(deg, r - 1)]
        if any(not complete(rest) for rest in rests):
            out_order = deg - 1
        deg += 1
        if deg > D + 1:
            out_order = D
    shift_out = list(b)
    shift_out[k] = lower_k
    shift_out = tuple(shift_out)
    if out_order < 0:
        return GradedElement({}, r), shift_out, -1

    images: dict[tuple, dict[tuple, Fraction]] = {}
    for rest, coeffs in groups.items():
        if sum(rest) > out_order:
            continue
        for nk, c in coeffs.items():
            full = rest[:k] + (nk,) + rest[k:]
            absn = tuple(x + y for x, y in zip(full, b))
            g2, nu2, e = substitute_z_zeta(g, absn, Bt, s, k)
            rel = tuple(x - y for x, y in zip(nu2, shift_out))
            if rel[k] < 0:
                raise NotLaurentError(f"zeta'_{k} exponent below the assumed lower bound {lower_k}")
            budget = out_order - sum(rel)
            if budget < 0:
                continue
            acc = images.setdefault(g2, {})
            for j, bc in binomial_series(k, e, r, budget).terms.items():
                key = tuple(x + y for x, y in zip(rel, j))
                acc[key] = acc.get(key, 0) + c * bc
    out = GradedElement({}, r)
    for g2, acc in images.items():
        out = out + GradedElement({g2: Piece(shift_out, TruncatedSeries(acc, r, out_order))}, r)
    return out, shift_out, out_order


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def substitute_mutation(
    x: GradedElement, frame: SeedFrame, k: int, lower: Sequence[int] | None = None
) -> GradedElement:
    """Rewrite ``x`` (in the variables of ``frame``) in the variables of ``frame.mutate(k)``.

    Exact pieces (order ``None``) are substituted exactly and must give
    Laurent polynomials.  Truncated pieces need a lower bound for the
    ``zeta'_k`` exponent of the answer: pass ``lower`` (a shift vector whose
    ``k``-th entry is used), otherwise the smallest exponent seen among known
    terms is assumed.  The result carries the order at which it is determined.
    """
    s = frame.sign(k)
    Bt = frame.matrix
    out = GradedElement({}, x.nvars)
    for g, piece in x.pieces.items():
        if piece.series.order is None:
            out = out + _substitute_piece_exact(g, piece, Bt, s, k)
        else:
            lk = None if lower is None else lower[k]
            part, _, _ = _substitute_piece_truncated(g, piece, Bt, s, k, lk)
            out = out + part
    return out
