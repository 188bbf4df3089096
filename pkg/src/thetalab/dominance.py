"""The maps psi, phi, kappa and nu, the sets N_m and the integral dominance regions.

Everything here works in any rank.  The sets ``N_m`` and ``Dom_m`` are
intersections over all mutation sequences; we test reduced sequences up to
a depth, so an ``"out"`` verdict is definitive (it carries the failing
sequence) while ``"in-at-depth"`` only says no sequence of that length
separated the point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import ceil, floor
from typing import Sequence

import sympy
from sympy.matrices.normalforms import smith_normal_decomp

from .lattice import (
    ExtendedExchangeMatrix,
    mutate_sequence,
    mutation_map,
    pos,
    reduced_sequences,
    row_times,
    row_times_B,
    square_part,
)
from .substitution import CoefficientDegeneracyError

DEFAULT_DEPTH = 6


@lru_cache(maxsize=4096)
def _frame_sign(Bt: ExtendedExchangeMatrix, k: int) -> int:
    if not Bt.frozen_rows_independent():
        raise CoefficientDegeneracyError("frozen block has dependent rows")
    signs = Bt.sigma_signs()
    if signs is None:
        raise CoefficientDegeneracyError("some frozen row is not sign-coherent")
    return signs[k]


def _frames(Bt: ExtendedExchangeMatrix, kseq: Sequence[int]):
    """Yield ``(mu_prefix(Bt), k, sgn(sigma_k))`` along ``kseq``."""
    cur = Bt
    for k in kseq:
        yield cur, k, _frame_sign(cur, k)
        cur = cur.mutate(k)


def psi_step(Bt: ExtendedExchangeMatrix, k: int, n: Sequence[int], s: int | None = None) -> tuple[int, ...]:
    """``psi_k``: rewrite the exponent of ``sigma^n`` in the variables mutated at ``k``."""
    if s is None:
        s = _frame_sign(Bt, k)
    B = Bt.B
    out = list(n)
    out[k] = -n[k] + sum(n[i] * pos(s * B[i][k]) for i in range(len(n)) if i != k)
    return tuple(out)


def psi(Bt: ExtendedExchangeMatrix, kseq: Sequence[int], n: Sequence[int]) -> tuple[int, ...]:
    """``psi_kseq``, so that ``sigma^n = (sigma^(kseq))^{psi(n)}``."""
    n = tuple(n)
    for frame, k, s in _frames(Bt, kseq):
        n = psi_step(frame, k, n, s)
    return n


@dataclass(frozen=True)
class PhiKappaFrame:
    kseq: tuple[int, ...]
    kappa: tuple[int, ...]
    phi: tuple[int, ...]


def phi_kappa(Bt: ExtendedExchangeMatrix, kseq: Sequence[int], m: Sequence[int]) -> PhiKappaFrame:
    """Exponents of the leading ``sigma`` and ``z`` monomials of ``theta_m`` at the seed ``kseq``."""
    kappa = tuple(m)
    phi = (0,) * len(kappa)
    for frame, k, s in _frames(Bt, kseq):
        phi = psi_step(frame, k, phi, s)
        phi = tuple(x - pos(s * kappa[k]) * int(i == k) for i, x in enumerate(phi))
        kappa = mutation_map(frame.B, (k,), kappa)
    return PhiKappaFrame(tuple(kseq), kappa, phi)


def nu(Bt: ExtendedExchangeMatrix, kseq: Sequence[int], m: Sequence[int], n: Sequence[int]) -> tuple[int, ...]:
    m = tuple(m)
    shifted = tuple(a + b for a, b in zip(m, row_times_B(n, Bt.B)))
    base = phi_kappa(Bt, kseq, m).phi
    moved = phi_kappa(Bt, kseq, shifted).phi
    return tuple(a + b - c for a, b, c in zip(psi(Bt, kseq, n), moved, base))


@dataclass(frozen=True)
class MembershipVerdict:
    value: str  # "in", "out" or "in-at-depth"
    depth: int
    witness: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.value not in ("in", "out", "in-at-depth"):
            raise ValueError(f"unknown verdict {self.value!r}")
        if self.value == "out" and self.witness is None:
            raise ValueError("an 'out' verdict needs a witness sequence")

    @property
    def excluded(self) -> bool:
        return self.value == "out"


def in_n_set_at(Bt: ExtendedExchangeMatrix, m, n, kseq: Sequence[int]) -> bool:
    """Membership of ``n`` in ``N_{m,kseq}``."""
    if any(x < 0 for x in n):
        return False
    B = Bt.B
    m = tuple(m)
    shifted = tuple(a + b for a, b in zip(m, row_times_B(n, B)))
    v = nu(Bt, kseq, m, n)
    if any(x < 0 for x in v):
        return False
    lhs = tuple(a - b for a, b in zip(mutation_map(B, kseq, shifted), mutation_map(B, kseq, m)))
    return lhs == row_times_B(v, mutate_sequence(B, kseq))


def n_set_membership(Bt: ExtendedExchangeMatrix, m, n, depth: int = DEFAULT_DEPTH) -> MembershipVerdict:
    """Depth-limited membership of ``n`` in ``N_m``."""
    if any(x < 0 for x in n):
        raise ValueError("n must have nonnegative entries")
    if not any(n):
        return MembershipVerdict("in", depth)
    for kseq in reduced_sequences(Bt.rank, depth):
        if not in_n_set_at(Bt, m, n, kseq):
            return MembershipVerdict("out", depth, kseq)
    return MembershipVerdict("in-at-depth", depth)


# integer feasibility of  nu M = v  with nu >= 0 ------------------------------------


def _nonneg_integer_solution(M, v) -> tuple[int, ...] | None:
    """Some ``nu`` in ``Z_{>=0}^r`` with ``nu M = v``, or ``None``.

    Uses a Smith decomposition ``U A V = S`` of ``A = M^T``; the integer
    solutions are ``V y`` with ``y`` fixed on the nonzero invariant factors
    and free on the rest.  A one-dimensional free part is solved exactly as an
    interval of integers; larger kernels fall back to a bounded search.
    """
    r = len(M)
    A = sympy.Matrix(M).T
    b = sympy.Matrix(list(v))
    S, U, V = smith_normal_decomp(A, domain=sympy.ZZ)
    Ub = U * b
    y0 = []
    free = []
    for i in range(r):
        s = S[i, i] if i < min(S.shape) else 0
        if s == 0:
            if Ub[i] != 0:
                return None
            y0.append(0)
            free.append(i)
        else:
            if Ub[i] % s:
                return None
            y0.append(Ub[i] // s)
    for i in range(r, A.rows):
        if Ub[i] != 0:
            return None
    x0 = V * sympy.Matrix(y0)
    base = [int(x) for x in x0]
    if not free:
        return tuple(base) if all(x >= 0 for x in base) else None
    dirs = [[int(V[row, j]) for row in range(r)] for j in free]
    if len(dirs) == 1:
        w = dirs[0]
        lo, hi = -float("inf"), float("inf")
        for x, c in zip(base, w):
            if c > 0:
                lo = max(lo, ceil(Fraction(-x, c)))
            elif c < 0:
                hi = min(hi, floor(Fraction(-x, c)))
            elif x < 0:
                return None
        if lo > hi:
            return None
        t = lo if lo != -float("inf") else (hi if hi != float("inf") else 0)
        return tuple(x + t * c for x, c in zip(base, w))
    bound = 2 * (max(abs(x) for x in base) + 1)
    for ts in product(range(-bound, bound + 1), repeat=len(dirs)):
        cand = [x + sum(t * d[i] for t, d in zip(ts, dirs)) for i, x in enumerate(base)]
        if all(c >= 0 for c in cand):
            return tuple(cand)
    return None


def in_dom_at(B, m, p, kseq: Sequence[int]) -> bool:
    """Membership of ``p`` in ``Dom_{m,kseq}``."""
    B = square_part(B)
    v = tuple(a - b for a, b in zip(mutation_map(B, kseq, p), mutation_map(B, kseq, m)))
    if any(Fraction(x).denominator != 1 for x in v):
        return False
    sol = _nonneg_integer_solution(mutate_sequence(B, kseq), [int(x) for x in v])
    if sol is None:
        return False
    assert row_times(sol, mutate_sequence(B, kseq)) == v
    return True


def dom_membership(B, m, p, depth: int = DEFAULT_DEPTH) -> MembershipVerdict:
    """Depth-limited membership of ``p`` in the integral dominance region of ``m``."""
    B = square_part(B)
    if tuple(p) == tuple(m):
        return MembershipVerdict("in", depth)
    for kseq in reduced_sequences(len(B), depth):
        if not in_dom_at(B, m, p, kseq):
            return MembershipVerdict("out", depth, kseq)
    return MembershipVerdict("in-at-depth", depth)
