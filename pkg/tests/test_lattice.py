import pytest
from hypothesis import given
from hypothesis import strategies as st

from thetalab.lattice import (
    ExtendedExchangeMatrix,
    b_equivalent_up_to_depth,
    eta_orbit,
    eta_step,
    find_mutation_symmetries,
    finite_type_rank2,
    mutate_matrix,
    mutate_sequence,
    mutation_map,
    mutation_map_inverse,
    pairing,
    reduced_sequences,
    same_domain_of_definition,
    skew_symmetrizer,
)

from conftest import A2, G2, MARKOV


@st.composite
def skew_symmetrizable(draw, r=3):
    d = [draw(st.integers(1, 3)) for _ in range(r)]
    S = [[0] * r for _ in range(r)]
    for i in range(r):
        for j in range(i + 1, r):
            s = draw(st.integers(-2, 2))
            S[i][j], S[j][i] = s, -s
    return tuple(tuple(S[i][j] * d[j] for j in range(r)) for i in range(r))


def _eta_by_definition(B, k, v):
    """Append v as an extra row, mutate the tall matrix at k, read the row back."""
    r = len(B)
    ext = [list(row) for row in B] + [list(v)]
    out = [list(ext[i]) for i in range(r + 1)]
    for i in range(r + 1):
        for j in range(r):
            if i == k or j == k:
                out[i][j] = -ext[i][j]
            else:
                a, b = ext[i][k], ext[k][j]
                out[i][j] = ext[i][j] + (abs(a) * b + a * abs(b)) // 2
    return tuple(out[r])


vectors = st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))


@given(skew_symmetrizable(), st.integers(0, 2))
def test_matrix_mutation_is_an_involution(B, k):
    assert mutate_matrix(mutate_matrix(B, k), k) == B


@given(skew_symmetrizable(), st.integers(0, 2))
def test_mutation_keeps_the_skew_symmetrizer(B, k):
    d = skew_symmetrizer(B)
    ExtendedExchangeMatrix(mutate_matrix(B, k), d)


@given(skew_symmetrizable(), st.integers(0, 2), vectors)
def test_eta_step_matches_row_mutation(B, k, v):
    assert eta_step(B, k, v) == _eta_by_definition(B, k, v)


@given(skew_symmetrizable(), st.lists(st.integers(0, 2), max_size=5), vectors)
def test_mutation_map_inverse(B, kseq, v):
    w = mutation_map(B, kseq, v)
    assert mutation_map_inverse(B, kseq, w) == v


@given(skew_symmetrizable(), st.lists(st.integers(0, 2), max_size=4), vectors, st.integers(1, 4))
def test_mutation_map_is_positively_homogeneous(B, kseq, v, c):
    assert mutation_map(B, kseq, [c * x for x in v]) == tuple(c * x for x in mutation_map(B, kseq, v))


@given(skew_symmetrizable(), st.lists(st.integers(0, 2), max_size=4), vectors, vectors)
def test_mutation_map_is_linear_on_a_common_domain(B, kseq, v, w):
    if same_domain_of_definition(B, kseq, v, w):
        s = tuple(a + b for a, b in zip(v, w))
        lhs = mutation_map(B, kseq, s)
        rhs = tuple(a + b for a, b in zip(mutation_map(B, kseq, v), mutation_map(B, kseq, w)))
        assert lhs == rhs


def test_g2_skew_symmetrizer():
    assert skew_symmetrizer(G2) == (1, 3)
    assert ExtendedExchangeMatrix.principal(G2).d == (1, 3)


def test_skew_symmetrizer_is_normalised_per_component():
    B = ((0, -3, 0, 0), (1, 0, 0, 0), (0, 0, 0, 2), (0, 0, -2, 0))
    assert skew_symmetrizer(B) == (1, 3, 1, 1)


def test_bad_skew_symmetrizer_rejected():
    with pytest.raises(ValueError):
        ExtendedExchangeMatrix(G2, (3, 1))
    with pytest.raises(ValueError):
        ExtendedExchangeMatrix(((0, 1), (1, 0)))


def test_pairing_with_scaled_basis_vector():
    d = (1, 3)
    assert pairing((5, 7), (0, 3), d) == 7


def test_markov_mutations_are_plus_minus_b():
    for kseq in reduced_sequences(3, 4):
        expected = MARKOV if len(kseq) % 2 == 0 else tuple(tuple(-x for x in row) for row in MARKOV)
        assert mutate_sequence(MARKOV, kseq) == expected


@given(st.lists(st.integers(0, 2), max_size=5), vectors)
def test_markov_mutation_maps_preserve_coordinate_sum(kseq, v):
    assert sum(mutation_map(MARKOV, kseq, v)) == sum(v)


def test_reduced_sequence_count():
    seqs = list(reduced_sequences(3, 3))
    assert len(seqs) == 1 + 3 + 6 + 12
    assert seqs[0] == ()
    assert all(a != b for s in seqs for a, b in zip(s, s[1:]))


def test_mutation_symmetries():
    assert find_mutation_symmetries(A2, 2) == [(0, 1), (1, 0)]
    assert (0, 1) in find_mutation_symmetries(MARKOV, 2)
    assert find_mutation_symmetries(G2, 1) == []


def test_a2_orbit_is_a_pentagon():
    orbit = eta_orbit(A2, (0, 1), (1, 0))
    assert orbit is not None and len(orbit) == 5 and len(set(orbit)) == 5


def test_orbit_reports_unbounded_orbits():
    assert eta_orbit(((0, 2), (-2, 0)), (0, 1), (-1, 0), max_iter=30) is None


def test_b_equivalence():
    assert b_equivalent_up_to_depth(G2, (-2, 3), (-4, 6), 5)
    assert not b_equivalent_up_to_depth(G2, (-2, 3), (2, -3), 5)
    assert not b_equivalent_up_to_depth(G2, (-2, 3), (-1, 1), 5)


def test_finite_type_rank2():
    assert finite_type_rank2(G2) and finite_type_rank2(A2)
    assert not finite_type_rank2(((0, 2), (-2, 0)))


def test_closed_b_cones_contain_their_boundary_rays():
    from thetalab.lattice import same_b_cone_up_to_depth

    g2 = ((0, -3), (1, 0))
    assert same_b_cone_up_to_depth(g2, [(-2, 3), (-1, 1), (-3, 4)], 6)
    assert same_b_cone_up_to_depth(g2, [(1, 0), (0, 1)], 6)
    assert not same_b_cone_up_to_depth(g2, [(-1, 3), (-1, 1)], 6)
    assert not same_b_cone_up_to_depth(g2, [(1, 0), (-1, 0)], 0)
    assert same_b_cone_up_to_depth(g2, [(2, 5)], 4)
