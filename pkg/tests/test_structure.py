import random
from fractions import Fraction

import pytest

from oracles import series_to_sympy, truncate
from thetalab.bases import exact_theta_F
from thetalab.broken_lines import POSITIVE_Q, enumerate_broken_lines
from thetalab.lattice import ExtendedExchangeMatrix, same_domain_of_definition
from thetalab.scattering import build_scattering_diagram, mutate_diagram
from thetalab.structure import (
    InstabilityError,
    LineCache,
    ResidualError,
    ThetaFSeries,
    a_limit,
    a_Q,
    expand_product_in_theta_basis,
    extract_pointed,
    fixing_power,
    product_F,
    resum_expansion,
    structure_table,
    verify_mut_pair,
    verify_symmetry_support,
)
from thetalab.series import TruncatedSeries

from conftest import A2, KRONECKER


def _terms(expansion):
    return {(m, n): c for m, n, c in expansion}


def test_a2_products(a2_diagram):
    assert _terms(expand_product_in_theta_basis(a2_diagram, [((1, 0), 1), ((-1, 0), 1)], 6)) == {
        ((0, 0), (0, 0)): 1,
        ((0, 1), (1, 0)): 1,
    }
    assert _terms(expand_product_in_theta_basis(a2_diagram, [((1, 0), 1), ((0, 1), 1)], 6)) == {((1, 1), (0, 0)): 1}


def test_g2_square_is_a_theta_function(g2_diagram):
    assert _terms(expand_product_in_theta_basis(g2_diagram, [((-2, 3), 2)], 8)) == {((-4, 6), (0, 0)): 1}


def test_limit_matches_extraction():
    """Pairs of broken lines near m and the triangular extraction are separate routes to a(p1, p2, m)."""
    rng = random.Random(11)
    for B in (A2, ((0, -3), (1, 0)), KRONECKER):
        diagram = build_scattering_diagram(ExtendedExchangeMatrix.principal(B), 5)
        for _ in range(3):
            p1 = (rng.randint(-2, 2), rng.randint(-2, 2))
            p2 = (rng.randint(-2, 2), rng.randint(-2, 2))
            for m, n, c in expand_product_in_theta_basis(diagram, [(p1, 1), (p2, 1)], 5):
                if any(m):
                    assert a_limit(diagram, p1, p2, m, 5).coeff(n) == c


def test_a_limit_a2_value(a2_diagram):
    a = a_limit(a2_diagram, (1, 0), (-1, 0), (0, 1), 4)
    assert a.terms == {(1, 0): 1}


def test_a_limit_rejects_zero(a2_diagram):
    with pytest.raises(ValueError):
        a_limit(a2_diagram, (1, 0), (-1, 0), (0, 0), 4)


def test_instability_error_carries_both_values():
    err = InstabilityError("x", "y")
    assert err.first == "x" and err.second == "y"


def test_table_entries_are_graded(g2_diagram):
    B = g2_diagram.B
    table = structure_table(g2_diagram, (-2, 3), (1, -1), POSITIVE_Q, 6)
    for m, s in table.entries.items():
        for n, c in s.terms.items():
            assert tuple(a - sum(n[i] * B[i][j] for i in range(2)) for j, a in enumerate(m)) == (-1, 2)
            assert c > 0 and c.denominator == 1
    assert a_Q(g2_diagram, (-2, 3), (1, -1), (-1, 2), POSITIVE_Q, 6).constant_term() == 1


def test_line_cache_reuses_enumerations(g2_diagram):
    cache = LineCache()
    first = cache.lines(g2_diagram, (-2, 3), POSITIVE_Q, 5)
    assert cache.lines(g2_diagram, (-2, 3), POSITIVE_Q, 5) is first
    assert cache.lines(g2_diagram, (0, 0), POSITIVE_Q, 5) == []


def test_extraction_round_trip_kronecker():
    diagram = build_scattering_diagram(ExtendedExchangeMatrix.principal(KRONECKER), 5)
    thetas = ThetaFSeries(diagram)
    factors = [((-1, 1), 1), ((1, -2), 1)]
    p, F = product_F(factors, thetas, 5)
    expansion = extract_pointed(F, p, diagram.B, thetas, 5)
    assert resum_expansion(expansion, thetas, p, diagram.B, 5) == F


def test_product_series_matches_sympy(g2_diagram):
    thetas = ThetaFSeries(g2_diagram)
    _, F = product_F([((-2, 3), 1), ((-1, 1), 2)], thetas, 6)
    expected = truncate(series_to_sympy(thetas((-2, 3), 6)) * series_to_sympy(thetas((-1, 1), 6)) ** 2, 6)
    assert truncate(series_to_sympy(F) - expected, 6) == 0


def test_extraction_reports_a_residual():
    diagram = build_scattering_diagram(ExtendedExchangeMatrix.principal(A2), 4)

    def non_pointed(m, order):
        return TruncatedSeries.one(2, order) if any(m) else TruncatedSeries.one(2, order)

    F = TruncatedSeries({(0, 0): 1, (1, 0): Fraction(1, 2)}, 2, 3)
    expansion = extract_pointed(F, (1, 0), diagram.B, non_pointed, 3)
    assert _terms(expansion)[((1, 1), (1, 0))] == Fraction(1, 2)

    def broken_basis(m, order):
        return TruncatedSeries({(0, 0): 2}, 2, order)

    with pytest.raises(ValueError):
        extract_pointed(F, (1, 0), diagram.B, broken_basis, 3)
    assert issubclass(ResidualError, ValueError)


def test_a2_structure_constants_are_finite_polynomials(a2_diagram):
    exact = exact_theta_F(a2_diagram)
    for p1 in [(1, 0), (-1, 0), (0, -1), (-1, 1), (2, -1)]:
        for p2 in [(1, 0), (0, 1), (-1, -1), (1, -2)]:
            p, F = product_F([(p1, 1), (p2, 1)], exact, None)
            expansion = extract_pointed(F, p, a2_diagram.B, exact, F.degree())
            assert expansion and all(c > 0 and c.denominator == 1 for _, _, c in expansion)


def test_symmetry_support():
    Bt = ExtendedExchangeMatrix.principal(A2)
    good = [((1, 1), (0, 0), 1)]
    ell = fixing_power(Bt.B, (0, 1), [(1, 1)])
    assert ell == 5
    assert verify_symmetry_support(Bt, (0, 1), good, 1).ok is False
    assert verify_symmetry_support(Bt, (0, 1), good, ell).ok
    with pytest.raises(ValueError):
        verify_symmetry_support(build_scattering_diagram(ExtendedExchangeMatrix.principal(((0, -3), (1, 0))), 2).matrix,
                                (0,), good, 1)


def test_broken_line_pairs_survive_mutation(g2_diagram, g2):
    Q = POSITIVE_Q
    mutated = mutate_diagram(g2_diagram, 0)
    lines1 = enumerate_broken_lines(g2_diagram, (-2, 3), Q, 6)
    lines2 = enumerate_broken_lines(g2_diagram, (-1, 1), Q, 6)
    checked = 0
    for g1 in lines1:
        for h in lines2:
            m = tuple(a + b for a, b in zip(g1.final.m, h.final.m))
            if not same_domain_of_definition(g2.B, (0,), m, Q):
                continue
            assert verify_mut_pair(g2_diagram, g1, h, (0,), Q, m, mutated_diagram=mutated, order=8)
            checked += 1
    assert checked > 0
