import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from fracdecomp.errors import DomainError, ResourceError, UnsupportedError
from fracdecomp.scheme_core import (
    SchemeParams, binom, build_scheme_table, complete_edges, degrees, eigenvalues_M,
    idempotent_coeffs, idempotent_coeffs_k3, inclusion_matrix, kernel_projector_coeffs, krawtchouk,
    krawtchouk_transform_check, product_expansion, relation_matrix, relation_of,
    structure_constants_bruteforce, structure_constants_k3, verify_idempotents, verify_spectrum,
    verify_structure_constants, waw_expansion_t2, waw_rowsum)


def test_params_validation():
    with pytest.raises(DomainError):
        SchemeParams(2, 3)
    with pytest.raises(DomainError):
        SchemeParams(3, 1)
    with pytest.raises(DomainError):
        SchemeParams(3, 3, t=4)
    assert SchemeParams(3, 4).num_edges == 48
    assert SchemeParams(3, 4).num_relations == 5
    assert SchemeParams(4, 4).num_relations == 6


# -- Krawtchouk --------------------------------------------------------------


def test_krawtchouk_examples():
    assert krawtchouk(3, 2, 0, 2) == 1
    assert krawtchouk(SchemeParams(4, 3), 2, 4) == 6 == math.comb(4, 2)
    assert krawtchouk(3, 2, 1, 1) == 1


def test_krawtchouk_domain():
    with pytest.raises(DomainError):
        krawtchouk(3, 2, 4, 0)
    with pytest.raises(DomainError):
        krawtchouk(3, 2, 0, -1)


@given(k=st.integers(1, 7), n=st.integers(2, 6), data=st.data())
def test_krawtchouk_matches_generating_function(k, n, data):
    i = data.draw(st.integers(0, k))
    x = data.draw(st.integers(0, k))
    assert krawtchouk(k, n, i, x) == oracles.krawtchouk_genfun(k, n, i, x)


def test_krawtchouk_orthogonality():
    for k in range(1, 7):
        for n in range(2, 5):
            for j in range(k + 1):
                for l in range(k + 1):
                    s = sum(math.comb(k, i) * (n - 1) ** i * krawtchouk(k, n, j, i) * krawtchouk(k, n, l, i)
                            for i in range(k + 1))
                    expected = n**k * math.comb(k, j) * (n - 1) ** j if j == l else 0
                    assert s == expected


def test_hamming_dimension_bookkeeping():
    for k in range(1, 9):
        for n in range(2, 7):
            assert sum(math.comb(k, j) * (n - 1) ** j for j in range(k + 1)) == n**k


@pytest.mark.parametrize("k,n", [(2, 2), (3, 2), (1, 3), (2, 3), (4, 3), (3, 4)])
def test_krawtchouk_transform(k, n):
    assert krawtchouk_transform_check(k, n)


def test_krawtchouk_transform_guard():
    with pytest.raises(ResourceError):
        krawtchouk_transform_check(5, 6)


# -- relations ---------------------------------------------------------------


def test_relation_examples():
    p3 = SchemeParams(3, 4)
    assert relation_of(p3, (0, 1, 1, 2), (0, 1, 1, 2)) == 0
    # alpha beta * and * beta gamma share beta and touch three classes
    assert relation_of(p3, (0, 0, 1, 2), (1, 2, 2, 3)) == 3
    p5 = SchemeParams(5, 3)
    assert relation_of(p5, (1, 0, 2, 0), (3, 0, 4, 0)) == 5


def test_relation_malformed():
    p = SchemeParams(3, 2)
    with pytest.raises(DomainError):
        relation_of(p, (1, 0, 0, 0), (0, 0, 1, 0))
    with pytest.raises(DomainError):
        relation_of(p, (0, 0, 1, 2), (0, 0, 1, 0))
    with pytest.raises(DomainError):
        relation_of(p, "edge", (0, 0, 1, 0))


@pytest.mark.parametrize("k,n", [(3, 2), (3, 3), (4, 2), (5, 2)])
def test_relation_matrix_matches_oracle(k, n):
    expected, _ = oracles.relation_table(k, n)
    assert np.array_equal(relation_matrix(SchemeParams(k, n)), expected)


def test_edge_order_canonical():
    edges = complete_edges(4, 3)
    keys = [(int(e[0]), int(e[2]), int(e[1]), int(e[3])) for e in edges]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    n = 3
    for idx in [0, 7, 20, 53]:
        ca, va, cb, vb = edges[idx]
        pair = list(itertools.combinations(range(4), 2)).index((ca, cb))
        assert idx == pair * n * n + va * n + vb
    assert all(e[0] < e[2] for e in edges)


# -- structure constants, degrees --------------------------------------------


def test_table_examples():
    assert build_scheme_table(SchemeParams(3, 2)).structure_constants[0, 1, 1] == 2
    assert build_scheme_table(SchemeParams(3, 3)).structure_constants[2, 2, 2] == 1
    assert build_scheme_table(SchemeParams(3, 4)).structure_constants[3, 1, 2] == 0


def test_build_table_t_unsupported():
    with pytest.raises(UnsupportedError):
        build_scheme_table(SchemeParams(4, 2, t=3))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_closed_form_constants_match_bruteforce(n):
    p = SchemeParams(3, n)
    assert np.array_equal(structure_constants_k3(n), structure_constants_bruteforce(p))
    assert verify_structure_constants(p)


@pytest.mark.parametrize("k,n", [(3, 3), (4, 2), (4, 3), (5, 2)])
def test_table_invariants(k, n):
    t = build_scheme_table(SchemeParams(k, n))
    a, nu = t.structure_constants, t.degrees
    assert np.array_equal(a, a.transpose(0, 2, 1))
    assert tuple(int(a[0, i, i]) for i in range(len(nu))) == nu
    assert nu[0] == 1 and sum(nu) == SchemeParams(k, n).num_edges
    for h in range(len(nu)):
        for i in range(len(nu)):
            assert a[h, i].sum() == nu[i]


def test_degrees_general_k():
    assert degrees(SchemeParams(3, 4)) == (1, 6, 9, 8, 24)
    assert degrees(SchemeParams(5, 3)) == (1, 4, 4, 18, 36, 27)


def test_product_spot_pair():
    # A'_1 A'_3 = (n - 1) A'_3 + A'_4
    n = 5
    assert product_expansion(SchemeParams(3, n), 1, 3) == {3: n - 1, 4: 1}


def test_verify_guard():
    with pytest.raises(ResourceError):
        verify_structure_constants(SchemeParams(3, 60))


# -- spectrum and idempotents -----------------------------------------------------


def test_eigenvalue_examples():
    assert eigenvalues_M(SchemeParams(3, 2)) == [(6, 1), (4, 3), (2, 3), (0, 5)]
    for n in range(2, 8):
        assert eigenvalues_M(SchemeParams(3, n))[2][0] == n
    pairs = eigenvalues_M(SchemeParams(4, 2))
    assert pairs[1] == (12, 4)


@pytest.mark.parametrize("k,n,t", [(3, 2, 2), (3, 4, 2), (4, 2, 2), (4, 2, 3), (5, 2, 2), (4, 3, 3)])
def test_spectrum_dense(k, n, t):
    assert verify_spectrum(SchemeParams(k, n, t))


def test_spectrum_oracle_float():
    W, _, _ = oracles.inclusion(4, 2, 2)
    eig = np.linalg.eigvalsh((W @ W.T).astype(float))
    values = sorted(np.round(eig).astype(int).tolist())
    expected = sorted(itertools.chain.from_iterable([th] * m for th, m in eigenvalues_M(SchemeParams(4, 2))))
    assert values == expected


def test_idempotent_rows_k3():
    n = 4
    rows = idempotent_coeffs_k3(n)
    assert rows[0] == [Fraction(1, 3 * n * n)] * 5
    assert rows[2][3] == 0
    assert verify_idempotents(SchemeParams(3, 2))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
def test_general_idempotents_reduce_to_k3(n):
    assert idempotent_coeffs(SchemeParams(3, n)) == idempotent_coeffs_k3(n)


@pytest.mark.parametrize("k,n", [(3, 2), (3, 5), (4, 2), (4, 3), (5, 2)])
def test_idempotents_dense(k, n):
    assert verify_idempotents(SchemeParams(k, n))


@pytest.mark.parametrize("k,n", [(3, 2), (3, 3), (4, 2)])
def test_kernel_coeffs_match_nullspace_projector(k, n):
    P = oracles.fractions(oracles.kernel_projector_exact(k, n))
    labels = relation_matrix(SchemeParams(k, n))
    coeffs = kernel_projector_coeffs(SchemeParams(k, n))
    assert all(P[i][j] == coeffs[labels[i, j]] for i in range(len(P)) for j in range(len(P)))


# -- WAW expansions ---------------------------------------------------------------


def test_waw_rowsum_examples():
    assert waw_rowsum(SchemeParams(3, 2), 0) == 6
    assert waw_rowsum(SchemeParams(3, 3), 3) == 72
    assert waw_rowsum(SchemeParams(4, 2, t=3), 1) == 32


def test_waw_expansion_example():
    coeffs = waw_expansion_t2(SchemeParams(4, 2), 0)
    assert coeffs[0] == 4
    assert coeffs[1] == coeffs[2] == coeffs[4] == 0
    assert len(waw_expansion_t2(SchemeParams(3, 3), 2)) == 5


@pytest.mark.parametrize("k,n", [(3, 2), (3, 3), (4, 2), (4, 3), (5, 2), (5, 3)])
def test_waw_rowsum_consistency(k, n):
    p = SchemeParams(k, n)
    for i in range(k + 1):
        assert sum(c * nu for c, nu in zip(waw_expansion_t2(p, i), degrees(p))) == waw_rowsum(p, i)


@pytest.mark.parametrize("k,n", [(3, 2), (3, 3), (4, 2), (4, 3), (5, 2)])
def test_waw_expansion_bruteforce(k, n):
    W, _, _ = oracles.inclusion(k, n, 2)
    rel, _ = oracles.relation_table(k, n)
    p = SchemeParams(k, n)
    for i in range(k + 1):
        waw = W @ oracles.hamming_adjacency(k, n, i) @ W.T
        coeffs = waw_expansion_t2(p, i)
        assert np.array_equal(waw, np.array(coeffs)[rel])


@pytest.mark.parametrize("k,n,t", [(3, 2, 2), (4, 2, 3), (4, 2, 2), (3, 3, 3)])
def test_waw_rowsum_bruteforce(k, n, t):
    W, _, _ = oracles.inclusion(k, n, t)
    p = SchemeParams(k, n, t)
    for i in range(k + 1):
        rows = (W @ oracles.hamming_adjacency(k, n, i) @ W.T).sum(axis=1)
        assert set(rows.tolist()) == {waw_rowsum(p, i)}


def test_inclusion_matrix_matches_oracle():
    for k, n, t in [(3, 2, 2), (4, 2, 3), (3, 3, 2)]:
        W, _, _ = oracles.inclusion(k, n, t)
        assert np.array_equal(inclusion_matrix(k, n, t), W)


@settings(max_examples=30)
@given(a=st.integers(-3, 12), b=st.integers(-3, 12))
def test_binom_zero_outside_range(a, b):
    assert binom(a, b) == (math.comb(a, b) if 0 <= b <= a else 0)
