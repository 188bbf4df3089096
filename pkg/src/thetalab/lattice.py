"""Exchange matrices, matrix mutation and the piecewise-linear mutation maps.

Conventions used throughout the package:

* indices are 0-based; unfrozen indices come first, so an extended
  exchange matrix with ``r`` unfrozen and ``f`` frozen indices is an
  ``r x (r + f)`` integer matrix whose left ``r x r`` block is ``B``;
* vectors in ``N`` are written in the basis ``e_i`` and vectors in ``M``
  in the basis ``f_i``; the pairing satisfies ``<f_i, d_j e_j> = delta_ij``;
* all arithmetic is exact (``int`` or :class:`fractions.Fraction`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd, lcm
from typing import Iterator, Sequence

import sympy

Vector = tuple
Matrix = tuple


def pos(x):
    """Positive part ``[x]_+``."""
    return x if x > 0 else 0 * x


def sign(x) -> int:
    return (x > 0) - (x < 0)


def sign_vector(v: Sequence) -> tuple[int, ...]:
    return tuple(sign(x) for x in v)


def as_matrix(rows) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def mutate_matrix(Bt: Matrix, k: int) -> Matrix:
    """Matrix mutation of a (possibly extended) exchange matrix in direction ``k``."""
    rows = len(Bt)
    if not 0 <= k < rows:
        raise IndexError(f"mutation index {k} out of range for {rows} unfrozen rows")
    out = []
    for i, row in enumerate(Bt):
        new = []
        for j, e in enumerate(row):
            if i == k or j == k:
                new.append(-e)
            else:
                eik, ekj = Bt[i][k], Bt[k][j]
                new.append(e + pos(-eik) * ekj + eik * pos(ekj))
        out.append(tuple(new))
    return tuple(out)


def mutate_sequence(Bt: Matrix, kseq: Sequence[int]) -> Matrix:
    for k in kseq:
        Bt = mutate_matrix(Bt, k)
    return Bt


def skew_symmetrizer(B: Matrix) -> tuple[int, ...]:
    """Minimal positive integers ``d`` with ``d_i B_ij = -d_j B_ji``.

    Each connected component of the support graph is normalized to gcd 1.
    Raises ``ValueError`` when ``B`` is not skew-symmetrizable.
    """
    r = len(B)
    ratio: list[Fraction | None] = [None] * r
    for start in range(r):
        if ratio[start] is not None:
            continue
        ratio[start] = Fraction(1)
        component, stack = [start], [start]
        while stack:
            i = stack.pop()
            for j in range(r):
                a, b = B[i][j], B[j][i]
                if a == 0 and b == 0:
                    continue
                if a == 0 or b == 0 or sign(a) == sign(b):
                    raise ValueError("matrix is not skew-symmetrizable")
                want = ratio[i] * Fraction(-a, b)
                if ratio[j] is None:
                    ratio[j] = want
                    component.append(j)
                    stack.append(j)
                elif ratio[j] != want:
                    raise ValueError("matrix is not skew-symmetrizable")
        if any(B[i][i] != 0 for i in component):
            raise ValueError("exchange matrix must have zero diagonal")
        den = lcm(*(ratio[i].denominator for i in component))
        ints = [int(ratio[i] * den) for i in component]
        g = reduce(gcd, ints)
        for i, v in zip(component, ints):
            ratio[i] = Fraction(v // g)
    return tuple(int(x) for x in ratio)


@dataclass(frozen=True)
class ExtendedExchangeMatrix:
    """The matrix ``B~ = [eps_ij]`` with rows indexed by unfrozen indices."""

    entries: Matrix
    d: tuple[int, ...]

    def __init__(self, entries, d: Sequence[int] | None = None):
        entries = as_matrix(entries)
        r = len(entries)
        if r == 0:
            raise ValueError("at least one unfrozen index is required")
        if any(len(row) != len(entries[0]) for row in entries) or len(entries[0]) < r:
            raise ValueError("extended exchange matrix must be r x (r + f)")
        square = tuple(row[:r] for row in entries)
        if d is None:
            d = skew_symmetrizer(square)
        d = tuple(int(x) for x in d)
        if len(d) != r or any(x <= 0 for x in d):
            raise ValueError("skew-symmetrizers must be positive, one per unfrozen index")
        for i in range(r):
            for j in range(r):
                if d[i] * square[i][j] != -d[j] * square[j][i]:
                    raise ValueError(f"d does not skew-symmetrize B at ({i}, {j})")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "d", d)

    @classmethod
    def principal(cls, B, d: Sequence[int] | None = None) -> "ExtendedExchangeMatrix":
        """``B`` extended by an identity frozen block (principal coefficients)."""
        B = as_matrix(B)
        r = len(B)
        return cls([row + tuple(int(i == j) for j in range(r)) for i, row in enumerate(B)], d)

    @property
    def rank(self) -> int:
        return len(self.entries)

    @property
    def n_frozen(self) -> int:
        return len(self.entries[0]) - self.rank

    @property
    def B(self) -> Matrix:
        r = self.rank
        return tuple(row[:r] for row in self.entries)

    @property
    def frozen(self) -> Matrix:
        r = self.rank
        return tuple(row[r:] for row in self.entries)

    def mutate(self, k: int) -> "ExtendedExchangeMatrix":
        return ExtendedExchangeMatrix(mutate_matrix(self.entries, k), self.d)

    def mutate_sequence(self, kseq: Sequence[int]) -> "ExtendedExchangeMatrix":
        out = self
        for k in kseq:
            out = out.mutate(k)
        return out

    def form(self, i: int, j: int) -> Fraction:
        """The skew form ``{e_i, e_j} = eps_ij / d_j``."""
        return Fraction(self.entries[i][j], self.d[j])

    def frozen_rows_independent(self) -> bool:
        if self.n_frozen == 0:
            return False
        return sympy.Matrix(self.frozen).rank() == self.rank

    def sigma_signs(self) -> tuple[int, ...] | None:
        """Sign of each frozen row, or ``None`` if some row is not sign-coherent or zero."""
        signs = []
        for row in self.frozen:
            s = {sign(x) for x in row} - {0}
            if len(s) != 1:
                return None
            signs.append(s.pop())
        return tuple(signs)


def square_part(B) -> Matrix:
    if isinstance(B, ExtendedExchangeMatrix):
        return B.B
    B = as_matrix(B)
    return tuple(row[: len(B)] for row in B)


def row_times_B(n: Sequence, B) -> tuple:
    """The row vector ``nB`` (f-coordinates) for ``n`` in e-coordinates."""
    B = square_part(B)
    r = len(B)
    return tuple(sum(n[i] * B[i][j] for i in range(r)) for j in range(r))


def row_times(n: Sequence, M: Matrix) -> tuple:
    return tuple(sum(n[i] * M[i][j] for i in range(len(M))) for j in range(len(M[0])))


def pairing(m: Sequence, n: Sequence, d: Sequence[int]) -> Fraction:
    """``<m, n>`` with ``<f_i, d_j e_j> = delta_ij``, i.e. ``sum m_i n_i / d_i``."""
    return sum((Fraction(a) * b / di for a, b, di in zip(m, n, d)), Fraction(0))


def is_primitive(n: Sequence[int]) -> bool:
    return reduce(gcd, (abs(int(x)) for x in n), 0) == 1


def primitive(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector on the ray through a nonzero rational vector."""
    fr = [Fraction(x) for x in v]
    den = lcm(*(x.denominator for x in fr))
    ints = [int(x * den) for x in fr]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return tuple(x // g for x in ints)


def coroot_scale(n: Sequence[int], d: Sequence[int]) -> int:
    """The factor ``t`` with ``n° = t n`` for primitive ``n``."""
    return lcm(*(di // gcd(di, abs(ni)) for ni, di in zip(n, d) if ni))


def n_circ(n: Sequence[int], d: Sequence[int]) -> tuple[int, ...]:
    """Smallest positive multiple of primitive ``n`` in the span of the ``d_i e_i``."""
    t = coroot_scale(n, d)
    return tuple(t * x for x in n)


def pairing_circ(m: Sequence, n: Sequence[int], d: Sequence[int]) -> Fraction:
    """``<m, n°>`` for primitive ``n``; an integer whenever ``m`` is integral."""
    return pairing(m, n_circ(n, d), d)


def eta_step(B, k: int, v: Sequence) -> tuple:
    """``eta_k^B(v)``: append ``v`` as a row under ``B`` and mutate at ``k``."""
    B = square_part(B)
    vk = v[k]
    out = []
    for j, a in enumerate(v):
        if j == k:
            out.append(-a)
        else:
            out.append(a + pos(-vk) * B[k][j] + vk * pos(B[k][j]))
    return tuple(out)


def mutation_map(B, kseq: Sequence[int], v: Sequence) -> tuple:
    """``eta_kseq^B(v)``, composing single steps over the successively mutated ``B``."""
    B = square_part(B)
    v = tuple(v)
    for k in kseq:
        v = eta_step(B, k, v)
        B = mutate_matrix(B, k)
    return v


def mutation_map_inverse(B, kseq: Sequence[int], v: Sequence) -> tuple:
    """Inverse of :func:`mutation_map`, using ``(eta_k^B)^-1 = eta_k^{mu_k B}``."""
    B = square_part(B)
    mats = [B]
    for k in kseq:
        mats.append(mutate_matrix(mats[-1], k))
    v = tuple(v)
    for i in range(len(kseq) - 1, -1, -1):
        v = eta_step(mats[i + 1], kseq[i], v)
    return v


def reduced_sequences(r: int, depth: int) -> Iterator[tuple[int, ...]]:
    """All index sequences of length ``<= depth`` without immediate repeats."""
    yield ()
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for seq in frontier:
            for k in range(r):
                if not seq or seq[-1] != k:
                    nxt.append(seq + (k,))
        yield from nxt
        frontier = nxt


def b_equivalent_up_to_depth(B, m: Sequence, p: Sequence, depth: int = 6) -> bool:
    """Sign vectors of ``eta_k(m)`` and ``eta_k(p)`` agree for all reduced ``k`` up to ``depth``.

    ``False`` is definitive; ``True`` only says no separating sequence was found.
    """
    B = square_part(B)
    r = len(B)
    stack = [(B, tuple(m), tuple(p), None, 0)]
    while stack:
        M, a, b, last, depth_used = stack.pop()
        if sign_vector(a) != sign_vector(b):
            return False
        if depth_used == depth:
            continue
        for k in range(r):
            if k != last:
                stack.append((mutate_matrix(M, k), eta_step(M, k, a), eta_step(M, k, b), k, depth_used + 1))
    return True


def same_b_cone_up_to_depth(B, points: Sequence[Sequence], depth: int = 6) -> bool:
    """All ``eta_k(points)`` are sign-coherent for reduced ``k`` up to ``depth``.

    Sign-coherence of every mutated image characterizes lying in one closed
    B-cone, so boundary rays of a cone count as sharing it.  ``False`` is
    definitive; ``True`` only says no separating sequence was found.
    """
    B = square_part(B)
    r = len(B)
    stack = [(B, tuple(tuple(x) for x in points), None, 0)]
    while stack:
        M, pts, last, depth_used = stack.pop()
        for i in range(r):
            if any(v[i] > 0 for v in pts) and any(v[i] < 0 for v in pts):
                return False
        if depth_used == depth:
            continue
        for k in range(r):
            if k != last:
                stack.append((mutate_matrix(M, k), tuple(eta_step(M, k, v) for v in pts), k, depth_used + 1))
    return True


def find_mutation_symmetries(B, max_len: int) -> list[tuple[int, ...]]:
    """Reduced sequences of length ``1..max_len`` with ``mu_kseq(B) = B``, lexicographic."""
    B = square_part(B)
    found = [
        seq for seq in reduced_sequences(len(B), max_len) if seq and mutate_sequence(B, seq) == B
    ]
    return sorted(found)


def eta_orbit(B, kseq: Sequence[int], m: Sequence, max_iter: int = 100) -> list[tuple] | None:
    """Orbit of ``m`` under iterates of ``eta_kseq``, or ``None`` if not closed within ``max_iter``."""
    start = tuple(m)
    orbit = [start]
    v = start
    for _ in range(max_iter):
        v = mutation_map(B, kseq, v)
        if v == start:
            return orbit
        orbit.append(v)
    return None


def same_domain_of_definition(B, kseq: Sequence[int], v: Sequence, w: Sequence) -> bool:
    B = square_part(B)
    v, w = tuple(v), tuple(w)
    for k in kseq:
        if sign(v[k]) * sign(w[k]) < 0:
            return False
        v, w = eta_step(B, k, v), eta_step(B, k, w)
        B = mutate_matrix(B, k)
    return True


def finite_type_rank2(B) -> bool:
    """Rank-2 finite type test: ``|eps_12 eps_21| <= 3``."""
    B = square_part(B)
    if len(B) != 2:
        raise ValueError("finite-type test implemented for rank 2 only")
    return abs(B[0][1] * B[1][0]) <= 3


def integer_points_box(lo: Sequence[int], hi: Sequence[int]) -> Iterator[tuple[int, ...]]:
    return product(*(range(a, b + 1) for a, b in zip(lo, hi)))
