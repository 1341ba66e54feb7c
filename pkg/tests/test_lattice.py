import itertools

import numpy as np
import pytest

from lobc import (
    LatticeParams,
    ParameterError,
    enumerate_subspaces,
    gaussian_binomial,
    incidence_matrix,
    subspace_contains,
)


def brute_force_subspace_count(m: int, k: int, q: int) -> int:
    """Independent oracle: group all ordered k-tuples of independent vectors by span."""
    vectors = list(itertools.product(range(q), repeat=m))

    def add(u, v):
        return tuple((a + b) % q for a, b in zip(u, v))

    def span(basis):
        points = {tuple([0] * m)}
        for vec in basis:
            new = set()
            for point in points:
                acc = point
                for _ in range(q - 1):
                    acc = add(acc, vec)
                    new.add(acc)
            points |= new
        return frozenset(points)

    spans = set()
    for combo in itertools.combinations([v for v in vectors if any(v)], k):
        candidate = span(combo)
        if len(candidate) == q**k:  # independent tuple
            spans.add(candidate)
    return len(spans)


def test_gaussian_binomial_fano_layer():
    # the dimension-1 and dimension-2 layers of F_2^3 both have 7 subspaces
    assert gaussian_binomial(3, 1, 2) == 7
    assert gaussian_binomial(3, 2, 2) == 7


@pytest.mark.parametrize("q", [2, 3, 5])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_gaussian_binomial_trivial_ends(q, m):
    assert gaussian_binomial(m, 0, q) == 1
    assert gaussian_binomial(m, m, q) == 1


def test_gaussian_binomial_against_brute_force():
    assert gaussian_binomial(4, 2, 2) == brute_force_subspace_count(4, 2, 2) == 35
    assert gaussian_binomial(3, 1, 3) == brute_force_subspace_count(3, 1, 3)
    assert gaussian_binomial(3, 2, 2) == brute_force_subspace_count(3, 2, 2)


def test_gaussian_binomial_symmetry():
    for q in (2, 3, 5):
        for m in range(1, 6):
            for k in range(m + 1):
                assert gaussian_binomial(m, k, q) == gaussian_binomial(m, m - k, q)


def test_gaussian_binomial_errors():
    with pytest.raises(ParameterError):
        gaussian_binomial(3, 4, 2)
    with pytest.raises(ParameterError):
        gaussian_binomial(3, -1, 2)
    with pytest.raises(ParameterError):
        gaussian_binomial(3, 1, 4)


def test_params_validation():
    with pytest.raises(ParameterError):
        LatticeParams(4, 3, 2)
    with pytest.raises(ParameterError):
        LatticeParams(2, 7, 2)
    with pytest.raises(ParameterError):
        LatticeParams(2, 3, 4)
    with pytest.raises(ParameterError):
        LatticeParams(7, 6, 3)  # middle layer above the size guard


@pytest.mark.parametrize("q,max_m", [(2, 4), (3, 4), (5, 4)])
def test_enumeration_counts(q, max_m):
    for m in range(1, max_m + 1):
        params = LatticeParams(q, m, 0)
        for d in range(m + 1):
            layer = enumerate_subspaces(params, d)
            assert len(layer) == gaussian_binomial(m, d, q)
            assert len({s.basis for s in layer}) == len(layer)
            assert [s.index for s in layer] == list(range(len(layer)))


def test_enumeration_zero_dim():
    params = LatticeParams(2, 3, 2)
    layer = enumerate_subspaces(params, 0)
    assert len(layer) == 1
    assert layer[0].basis == ()


def test_enumeration_q3_m2_dim1_matches_vector_grouping():
    # independent oracle: nonzero vectors of F_3^2 grouped into scalar classes
    vectors = [v for v in itertools.product(range(3), repeat=2) if any(v)]
    classes = {frozenset((tuple((c * x) % 3 for x in v)) for c in (1, 2)) for v in vectors}
    layer = enumerate_subspaces(LatticeParams(3, 2, 1), 1)
    assert len(layer) == len(classes) == 4


def test_enumeration_deterministic():
    params = LatticeParams(2, 4, 2)
    first = enumerate_subspaces(params, 2)
    second = enumerate_subspaces(params, 2)
    assert first == second
    flattened = [tuple(v for row in s.basis for v in row) for s in first]
    assert flattened == sorted(flattened)


def test_enumeration_dim_out_of_range():
    with pytest.raises(ParameterError):
        enumerate_subspaces(LatticeParams(2, 3, 2), 4)


def test_subspace_contains_basics():
    params = LatticeParams(2, 3, 2)
    zero = enumerate_subspaces(params, 0)[0]
    planes = enumerate_subspaces(params, 2)
    lines = enumerate_subspaces(params, 1)
    assert subspace_contains(zero, zero)
    for plane in planes:
        assert subspace_contains(plane, plane)
        assert subspace_contains(plane, zero)
        assert not subspace_contains(zero, plane)
    # 110 = 100 + 010 over F_2
    plane = next(s for s in planes if s.basis == ((1, 0, 0), (0, 1, 0)))
    line = next(s for s in lines if s.basis == ((1, 1, 0),))
    assert subspace_contains(plane, line)
    outside = next(s for s in lines if s.basis == ((0, 0, 1),))
    assert not subspace_contains(plane, outside)


def test_subspace_contains_mismatched_lattices():
    a = enumerate_subspaces(LatticeParams(2, 3, 2), 1)[0]
    b = enumerate_subspaces(LatticeParams(3, 3, 2), 1)[0]
    with pytest.raises(ParameterError):
        subspace_contains(a, b)


def test_fano_incidence_structure():
    params = LatticeParams(2, 3, 2)
    inc = incidence_matrix(params, 2, 1, stochastic=True)
    assert inc.entries.shape == (7, 7)
    assert np.all(np.isin(inc.entries, [0.0, 1.0 / 3.0]))
    assert np.allclose(inc.entries.sum(axis=1), 1.0, atol=1e-12)
    # three lines per plane and three planes per line
    assert np.all((inc.entries > 0).sum(axis=1) == 3)
    assert np.all((inc.entries > 0).sum(axis=0) == 3)


def test_incidence_identity_and_zero_column():
    params = LatticeParams(2, 3, 2)
    same = incidence_matrix(params, 2, 2, stochastic=True)
    assert np.array_equal(same.entries, np.eye(7))
    to_zero = incidence_matrix(params, 2, 0, stochastic=True)
    assert np.array_equal(to_zero.entries, np.ones((7, 1)))


def test_incidence_plain_row_sums_exact():
    for q, m in ((2, 4), (3, 3)):
        params = LatticeParams(q, m, 0)
        for l in range(m + 1):
            for s in range(l + 1):
                plain = incidence_matrix(params, l, s).entries
                expected = gaussian_binomial(l, s, q)
                assert np.all(plain.sum(axis=1) == expected)


def test_incidence_errors():
    with pytest.raises(ParameterError):
        incidence_matrix(LatticeParams(2, 3, 2), 1, 2)


@pytest.mark.parametrize("q,m", [(2, 3), (2, 4), (3, 3), (3, 4), (5, 3)])
def test_composition_identity(q, m):
    # composing stochastic incidence down two steps equals the one-step matrix
    params = LatticeParams(q, m, 0)
    cache = {
        (l, s): incidence_matrix(params, l, s, stochastic=True).entries
        for l in range(m + 1)
        for s in range(l + 1)
    }
    for l in range(m + 1):
        for s in range(l + 1):
            for t in range(s + 1):
                product = cache[(l, s)] @ cache[(s, t)]
                assert np.abs(product - cache[(l, t)]).max() < 1e-12
