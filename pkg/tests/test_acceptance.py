"""One test per acceptance criterion; each prints a PASS or FAIL line with its tolerance."""

import itertools
import random
from collections import Counter

import pytest

from oracles import loop_is_identity, random_table, reconstruction_defect
from thetalab.bases import bcone_product_expand, chain_sum, invert_change_of_basis
from thetalab.broken_lines import (
    POSITIVE_Q,
    enumerate_broken_lines,
    mutate_broken_line,
    mutate_theta,
    theta,
    theta_closed,
    transport_endpoint,
)
from thetalab.dominance import in_n_set_at, nu, phi_kappa, psi
from thetalab.lattice import ExtendedExchangeMatrix, eta_step, row_times_B
from thetalab.scattering import build_scattering_diagram, is_consistent
from thetalab.structure import structure_table
from thetalab.substitution import SeedFrame

from conftest import A2, ACCEPTANCE_LINES, G2, MARKOV

EXACT = "exact, zero tolerance"


def report(number, ok, detail):
    line = f"acceptance {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def check(number, detail, condition_fn):
    try:
        ok = bool(condition_fn())
    except Exception as exc:  # report, then let pytest show the traceback
        report(number, False, f"{detail} ({type(exc).__name__}: {exc})")
        raise
    report(number, ok, detail)
    assert ok


def labels(line):
    return Counter((d.coeff, d.m, d.n) for d in line.domains)


def test_criterion_1_g2_theta():
    diagram = build_scattering_diagram(ExtendedExchangeMatrix.principal(G2), 6)
    expected = {(0, 0): 1, (1, 0): 2, (1, 1): 3, (2, 0): 1, (2, 1): 3, (2, 2): 3, (2, 3): 1}

    def cond():
        res = theta(diagram, (-2, 3), order=6)
        return res.F.terms == expected and res.F.order is None and res.broken_line_count == 7

    check(1, f"G2 theta_[-2,3] at order 6 with 7 broken lines; {EXACT}", cond)


def test_criterion_2_g2_walls():
    diagram = build_scattering_diagram(ExtendedExchangeMatrix.principal(G2), 6)
    expected = sorted([(1, 1), (2, 3), (1, 2), (1, 3)])

    def cond():
        outgoing = [w.f for w in diagram.walls if w.outgoing]
        binomials = [f for f in outgoing if len(f.terms) == 2 and set(f.terms.values()) == {1} and f.order is None]
        tops = sorted(n for f in binomials for n in f.terms if any(n))
        return diagram.is_certified_finite() and len(outgoing) == len(binomials) == 4 and tops == expected

    check(2, f"G2 outgoing walls at order 6, finite type certified; {EXACT}", cond)


def test_criterion_3_mutated_g2_theta(g2):
    diagram = build_scattering_diagram(g2, 8)
    mutated = build_scattering_diagram(g2.mutate(0), 8)
    expected = {(0, 0): 1, (0, 1): 3, (0, 2): 3, (0, 3): 1, (1, 3): 1}

    def cond():
        source = theta(diagram, (-2, 3), order=8)
        image = mutate_theta(source, SeedFrame(g2), 0)
        at_image_of_q = theta(mutated, (2, -3), Q=eta_step(g2.B, 0, source.Q), order=8)
        transported = transport_endpoint(at_image_of_q, mutated, [POSITIVE_Q], order=8)
        piece = image.piece((2, -3))
        return (
            set(image.pieces) == {(2, -3)}
            and not any(piece.shift)
            and piece.series.terms == expected
            and transported.equals(image, 8)
            and theta(mutated, (2, -3), order=8).graded().equals(image)
        )

    check(3, f"mutated G2 theta z'^(2,-3)(1+3z'2+3z'2^2+z'2^3+z'1z'2^3) after transport from eta_1(Q); {EXACT}", cond)


def test_criterion_4_two_mutations_identity():
    rng = random.Random(2)
    cases = 0

    def cond():
        nonlocal cases
        for B in (G2, A2):
            base = ExtendedExchangeMatrix.principal(B)
            diagram = build_scattering_diagram(base, 8)
            mutated = [build_scattering_diagram(base.mutate(k), 8) for k in (0, 1)]
            done = 0
            while done < 50:
                m = (rng.randint(-4, 4), rng.randint(-4, 4))
                if m == (0, 0):
                    continue
                k = rng.randint(0, 1)
                lhs = theta_closed(mutated[k], eta_step(B, k, m))
                rhs = mutate_theta(theta_closed(diagram, m), SeedFrame(base), k)
                if not rhs.equals(lhs.graded()):
                    return False
                done += 1
                cases += 1
        return True

    check(4, f"theta'_eta(m) = substituted theta_m sigma'-power, G2 and A2, 50 m each, order 8; {EXACT}", cond)
    assert cases == 100


def test_criterion_5_markov_n_set(markov):
    m = (1, 1, 1)
    box = list(itertools.product(range(9), repeat=3))
    formulas_ok = True
    min_ok = True
    max_disagreements = 0
    for n in box:
        n1, n2, n3 = n
        shifted = tuple(a + b for a, b in zip(m, row_times_B(n, MARKOV)))
        formulas_ok &= psi(markov, (0,), n) == (-n1 + 2 * n3, n2, n3)
        formulas_ok &= phi_kappa(markov, (0,), shifted).phi == (-max(1 - 2 * n2 + 2 * n3, 0), 0, 0)
        expected_nu = (-n1 + 2 * n3 + 1, n2, n3) if n2 > n3 else (-n1 + 2 * n2, n2, n3)
        formulas_ok &= nu(markov, (0,), m, n) == expected_nu
        inside = in_n_set_at(markov, m, n, (0,))
        min_ok &= inside == (n1 <= min(2 * n2, 2 * n3 + 1))
        max_disagreements += inside != (n1 <= max(2 * n2, 2 * n3 + 1))
    formulas_ok &= phi_kappa(markov, (0,), m).phi == (-1, 0, 0)
    detail = (
        f"psi_1, phi, nu displays {'match' if formulas_ok else 'DIFFER'} on [0,8]^3; "
        f"membership equals n1 <= min(2n2, 2n3+1) at {'all' if min_ok else 'NOT all'} 729 points; "
        f"'iff n1 <= max(2n2, 2n3+1)' fails at {max_disagreements}/729 points; {EXACT}"
    )
    report(5, formulas_ok and min_ok and max_disagreements == 0, detail)
    assert formulas_ok and min_ok
    if max_disagreements:
        pytest.xfail("the max clause contradicts the displayed nu; see the decisions ledger")


CRITERION_6 = [((0, 1), (-1, 0)), ((0, 2), (-1, 0)), ((0, 3), (-1, 0)), ((0, 2), (-2, 0)), ((0, -3), (1, 0))]


def test_criterion_6_consistency():
    def cond():
        for B in CRITERION_6:
            diagram = build_scattering_diagram(ExtendedExchangeMatrix.principal(B), 8)
            if not (is_consistent(diagram, 8) and loop_is_identity(diagram, 8)):
                return False
        return True

    check(6, f"origin loop is the identity mod degree > 8 for 5 matrices (own product and sympy oracle); {EXACT}", cond)


def test_criterion_7_structure_constants():
    rng = random.Random(7)
    pool = [A2, ((0, 2), (-1, 0)), G2, ((0, 2), (-2, 0)), ((0, 3), (-1, 0)), ((0, 1), (-3, 0))]
    diagrams = {B: build_scattering_diagram(ExtendedExchangeMatrix.principal(B), 5) for B in pool}

    def instance_ok(B, p1, p2):
        table = structure_table(diagrams[B], p1, p2, POSITIVE_Q, 5).entries
        swapped = structure_table(diagrams[B], p2, p1, POSITIVE_Q, 5).entries
        if table != swapped:
            return False
        p = tuple(a + b for a, b in zip(p1, p2))
        if table.get(p) is None or table[p].constant_term() != 1:
            return False
        for m, series in table.items():
            for n, c in series.terms.items():
                if c < 0 or c.denominator != 1:
                    return False
                if tuple(a - b for a, b in zip(m, row_times_B(n, B))) != p:
                    return False
        return True

    def a2_finite(p1, p2):
        a2 = build_scattering_diagram(ExtendedExchangeMatrix.principal(A2), 4)
        low = structure_table(a2, p1, p2, POSITIVE_Q, 12).entries
        high = structure_table(a2, p1, p2, POSITIVE_Q, 16).entries
        return {m: s.terms for m, s in low.items()} == {m: s.terms for m, s in high.items()}

    def cond():
        for _ in range(20):
            B = rng.choice(pool)
            p1 = (rng.randint(-2, 2), rng.randint(-2, 2))
            p2 = (rng.randint(-2, 2), rng.randint(-2, 2))
            if not instance_ok(B, p1, p2):
                return False
        pairs = [((rng.randint(-3, 3), rng.randint(-3, 3)), (rng.randint(-3, 3), rng.randint(-3, 3))) for _ in range(6)]
        return all(a2_finite(p1, p2) for p1, p2 in pairs)

    check(7, f"20 random rank-2 tables at order 5 plus A2 tables equal at orders 12 and 16; {EXACT}", cond)


def test_criterion_8_broken_line_bijection(g2):
    diagram = build_scattering_diagram(g2, 8)
    mutated = build_scattering_diagram(g2.mutate(0), 8)

    def cond():
        res = theta(diagram, (-2, 3), order=8)
        Q2 = eta_step(g2.B, 0, res.Q)
        moved = [mutate_broken_line(g, SeedFrame(g2), 0) for g in res.lines]
        found = enumerate_broken_lines(mutated, (2, -3), Q2, 8)
        if len(moved) != 7 or len(found) != 7:
            return False
        key = lambda g: tuple(sorted(labels(g).items()))
        return sorted(map(key, moved)) == sorted(map(key, found))

    check(8, f"eta_1 maps the 7 G2 broken lines onto the 7 lines of the mutated diagram, label multisets equal; {EXACT}", cond)


def test_criterion_9_change_of_basis():
    rng = random.Random(9)

    def cond():
        for _ in range(20):
            B = rng.choice([A2, G2, ((0, 2), (-2, 0))])
            p = (rng.randint(-2, 2), rng.randint(-2, 2))
            c = random_table(rng, B, [p])
            d = invert_change_of_basis(c, B, [p], 5)[p]
            if reconstruction_defect(c, d, B, p, 5):
                return False
            if any(d.get(r, 0) != chain_sum(c, B, p, r) for r in [(1, 0), (0, 1), (2, 1), (1, 2), (3, 2)]):
                return False
        return True

    check(9, f"chain inversion reconstructs v_p for 20 random sparse tables, total degree <= 5; {EXACT}", cond)


def test_criterion_10_bcone_product(g2):
    diagram = build_scattering_diagram(g2, 10)

    def cond():
        report10 = bcone_product_expand(diagram, [((-2, 3), 2)], 10, 4)
        return report10.ok and report10.m == (-4, 6)

    check(10, f"G2 theta_[-2,3]^2 at order 10: support in N_m and Dom_m at depth 4; {EXACT}", cond)
