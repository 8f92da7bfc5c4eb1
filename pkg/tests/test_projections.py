import numpy as np
import pytest

from unitons import (
    BadShape,
    ProjChain,
    Span,
    c_operator,
    max_principal_angle,
    orthonormal_basis,
    principal_angles,
    projection_pair,
    s_operator,
    spans_equal,
)
from unitons.projections import c_rows, s_rows

from oracles import c_words, product_inverse_coeff, random_chain, s_words


def chain_of(pis, perps):
    return ProjChain(list(zip(pis, perps)), validate=False)


def test_orthonormal_basis_examples():
    s = orthonormal_basis([np.array([1.0, 0.0])])
    assert s.dim == 1
    assert np.abs(np.abs(s.basis[0, 0]) - 1) < 1e-12
    dep = orthonormal_basis([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
    assert dep.dim == 1
    eps = 1e-14
    near = orthonormal_basis([np.array([1.0, 1.0]), np.array([1.0, 1.0 + eps])])
    assert near.dim == 1  # below the rank tolerance


def test_orthonormal_basis_empty_and_zero():
    assert orthonormal_basis(np.zeros((3, 0))).dim == 0
    assert orthonormal_basis([np.zeros(3)]).dim == 0


def test_projection_pair_examples():
    pi, perp = projection_pair(orthonormal_basis([np.array([1.0, 0.0])]))
    assert np.allclose(pi, np.diag([1, 0]))
    assert np.allclose(perp, np.diag([0, 1]))
    pi, perp = projection_pair(Span.zero(3))
    assert np.allclose(pi, 0) and np.allclose(perp, np.eye(3))
    pi, perp = projection_pair(Span.full(3))
    assert np.allclose(pi, np.eye(3)) and np.allclose(perp, 0)


def test_projection_pair_orthogonality():
    rng = np.random.default_rng(0)
    for _ in range(5):
        s = orthonormal_basis(rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2)))
        pi, perp = projection_pair(s)
        assert np.abs(pi @ perp).max() <= 1e-12
        assert np.abs(pi @ pi - pi).max() <= 1e-12
        assert np.abs(pi - pi.conj().T).max() <= 1e-12


def test_c_operator_paper_examples():
    rng = np.random.default_rng(1)
    pis, perps = random_chain(rng, 4, 3)
    ch2 = chain_of(pis[:2], perps[:2])
    assert np.abs(c_operator(ch2, 1) - (perps[0] + perps[1])).max() <= 1e-12
    ch3 = chain_of(pis, perps)
    expect = perps[1] @ perps[0] + perps[2] @ perps[0] + perps[2] @ perps[1]
    assert np.abs(c_operator(ch3, 2) - expect).max() <= 1e-12
    for ch in (ch2, ch3):
        assert np.allclose(c_operator(ch, 0), np.eye(4))
        assert np.allclose(c_operator(ch, -1), 0)
        assert np.allclose(c_operator(ch, len(ch) + 1), 0)


def test_s_operator_definition_cases():
    rng = np.random.default_rng(2)
    pis, perps = random_chain(rng, 4, 2)
    ch1 = chain_of(pis[:1], perps[:1])
    assert np.allclose(s_operator(ch1, 0), pis[0])
    assert np.allclose(s_operator(ch1, 1), perps[0])
    ch2 = chain_of(pis, perps)
    expect = perps[1] @ pis[0] + pis[1] @ perps[0]
    assert np.abs(s_operator(ch2, 1) - expect).max() <= 1e-12
    with pytest.raises(IndexError):
        s_operator(ch2, 3)
    with pytest.raises(IndexError):
        s_operator(ch2, -1)


def test_lemma_41_instance():
    # S^2_1 + 2 S^2_2 = C^2_1 for random projections
    rng = np.random.default_rng(3)
    pis, perps = random_chain(rng, 5, 2)
    ch = chain_of(pis, perps)
    lhs = s_operator(ch, 1) + 2 * s_operator(ch, 2)
    assert np.abs(lhs - c_operator(ch, 1)).max() <= 1e-11


def test_pascal_recursion_vs_word_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        i = int(rng.integers(1, 5))
        pis, perps = random_chain(rng, n, i)
        C = c_rows(perps, n, i)
        for s in range(i + 1):
            assert np.abs(C[s] - c_words(perps, n, s)).max() <= 1e-12


def test_s_recursion_vs_words_and_expansion():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        i = int(rng.integers(1, 5))
        pis, perps = random_chain(rng, n, i)
        S = s_rows(pis, perps, n)
        for s in range(i + 1):
            assert np.abs(S[s] - s_words(pis, perps, n, s)).max() <= 1e-12
            assert np.abs(S[s] - product_inverse_coeff(pis, perps, s)).max() <= 1e-12


def test_principal_angles_examples():
    e1 = orthonormal_basis([np.array([1.0, 0.0])])
    e2 = orthonormal_basis([np.array([0.0, 1.0])])
    diag = orthonormal_basis([np.array([1.0, 1.0])])
    assert max_principal_angle(e1, e1) == 0.0
    assert principal_angles(e1, e2)[0] == pytest.approx(np.pi / 2)
    assert principal_angles(e1, diag)[0] == pytest.approx(np.pi / 4)


def test_principal_angles_small_angle_resolution():
    rng = np.random.default_rng(6)
    b = orthonormal_basis(rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3)))
    comp = orthonormal_basis(np.eye(6) - b.basis @ b.basis.conj().T)
    tilted = b.basis.copy()
    tilted[:, 0] += 3e-10 * comp.basis[:, 0]
    c = orthonormal_basis(tilted)
    got = max_principal_angle(b, c)
    assert 1e-10 < got < 1e-9


def test_spans_equal():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    a = orthonormal_basis(m)
    b = orthonormal_basis(m @ np.array([[2, 1], [0, 1j]]))  # same column span
    assert spans_equal(a, b)
    assert not spans_equal(a, orthonormal_basis(rng.standard_normal((4, 2))))
    assert not spans_equal(a, orthonormal_basis(m[:, :1]))


def test_projchain_validation():
    bad = np.array([[0.5, 0.5], [0.0, 0.5]])
    with pytest.raises(BadShape):
        ProjChain([(bad, np.eye(2) - bad)])
    pi = np.diag([1.0, 0.0])
    ProjChain([(pi, np.eye(2) - pi)])  # fine


def test_span_validation():
    with pytest.raises(BadShape):
        Span(np.array([[1.0, 1.0], [0.0, 0.0]]))  # not orthonormal
    s = Span(np.array([[1.0], [0.0]]))
    assert s.contains(np.array([2.0, 0.0]))
    assert not s.contains(np.array([0.0, 1.0]))
