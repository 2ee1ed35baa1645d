import numpy as np
from hypothesis import given, settings, strategies as st

from bergman_jet.polynomial import (Poly, exponents_of_degree, graded_lex, multi_factorial,
                                    normal_degree, tangential_degree)


def test_degrees_split():
    assert normal_degree((2, 1, 3), 2) == 3
    assert tangential_degree((2, 1, 3), 2) == 3
    assert multi_factorial((2, 3)) == 12


def test_graded_lex_counts():
    # number of monomials of degree <= N in n variables is C(N+n, n)
    assert len(graded_lex(2, 4)) == 15
    assert len(graded_lex(3, 3)) == 20
    degs = [sum(a) for a in graded_lex(2, 4)]
    assert degs == sorted(degs)
    assert exponents_of_degree(1, 3) == [(3,)]


def test_evaluate_and_multiply():
    f = Poly(2, {(1, 0): 1.0, (0, 1): 2j})
    z = np.array([[1.0 + 1j, 2.0], [0.5, -1j]])
    assert np.allclose(f(z), z[:, 0] + 2j * z[:, 1])
    g = f * f
    assert np.allclose(g(z), f(z) ** 2)
    assert (f - f).is_zero()


def test_split_normal():
    f = Poly(2, {(1, 0): 1.0, (1, 2): 3.0, (2, 0): 1.0})
    parts = f.split_normal(1)
    assert set(parts) == {(1,), (2,)}
    assert parts[(1,)].coeffs == {(0,): 1.0, (2,): 3.0}


def test_json_roundtrip():
    f = Poly(2, {(1, 0): 1.5 - 2j, (0, 3): 0.25})
    assert Poly.from_json(2, f.to_json()) == f


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3),
                          st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=5),
       st.floats(0, 2 * np.pi))
def test_compose_unitary_matches_direct_evaluation(terms, theta):
    f = Poly(2, {(a, b): complex(re, im) for a, b, re, im in terms})
    U = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    g = f.compose_linear(U, 2)
    z = np.array([[0.3 + 0.1j, -0.2 + 0.4j], [0.7j, 0.1]])
    assert np.allclose(g(z), f(z @ U.T), atol=1e-12)
