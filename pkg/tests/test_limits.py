import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walkconv.errors import ConfigError, ValidationError
from walkconv.limits import (
    corpus_error,
    expected_frequency_matrix,
    expected_frequency_series,
    matrix_power_rows,
    omega_matrix,
    write_coo_matrix,
    write_dense_matrix,
)
from walkconv.walker import WalkConfig, generate_corpus, relative_frequencies, start_distribution

from conftest import dense_power, enumerate_expected, k2, k3, karate_model, p3, random_connected


def test_power_zero_is_identity():
    np.testing.assert_array_equal(matrix_power_rows(karate_model(), 0), np.eye(34))


def test_power_k2_and_k3():
    np.testing.assert_allclose(matrix_power_rows(k2(), 2), np.eye(2))
    P2 = matrix_power_rows(k3(), 2)
    np.testing.assert_allclose(np.diag(P2), 0.5)
    np.testing.assert_allclose(P2[~np.eye(3, dtype=bool)], 0.25)


def test_power_selected_rows():
    tm = karate_model()
    np.testing.assert_allclose(matrix_power_rows(tm, 5, rows=[3, 0]), dense_power(tm, 5)[[3, 0]], atol=1e-15)


def test_stationary_start_equals_omega_for_every_L():
    tm = karate_model()
    omega = omega_matrix(tm, 10)
    for L in (11, 12, 17, 40):
        np.testing.assert_allclose(expected_frequency_matrix(tm, L, 10, "stationary"), omega, atol=1e-12, rtol=0)


def test_k2_expected():
    E = expected_frequency_matrix(k2(), 3, 1)
    np.testing.assert_allclose(E, [[0, 0.5], [0.5, 0]], atol=1e-15)


def test_p3_matches_enumeration():
    tm = p3()
    E = expected_frequency_matrix(tm, 4, 2)
    np.testing.assert_allclose(E, enumerate_expected(tm, 4, 2, np.full(3, 1 / 3)), atol=1e-12, rtol=0)


def test_omega_closed_forms():
    np.testing.assert_allclose(omega_matrix(k2(), 1), [[0, 0.5], [0.5, 0]])
    off = ~np.eye(3, dtype=bool)
    np.testing.assert_allclose(omega_matrix(k3(), 1)[off], 1 / 6)
    W = omega_matrix(k3(), 2)
    # pi = 1/3, P_vc = 1/2, (P^2)_vc = 1/4, (P^2)_vv = 1/2
    np.testing.assert_allclose(W[off], 1 / 8, atol=1e-15)
    np.testing.assert_allclose(np.diag(W), 1 / 12, atol=1e-15)


def test_k3_omega_long_walk_monte_carlo():
    c = generate_corpus(k3(), WalkConfig(N=20, L=20_000, T=2, seed=1))
    assert corpus_error(relative_frequencies(c), omega_matrix(k3(), 2), "max_abs") < 0.005


def test_expected_frequency_is_probability_matrix():
    E = expected_frequency_matrix(karate_model(), 15, 4, 0)
    assert abs(E.sum() - 1) < 1e-12
    np.testing.assert_allclose(E, E.T, atol=0)


def test_series_matches_single_calls():
    tm = karate_model()
    Ls = [30, 11, 12, 20]
    for L, E in expected_frequency_series(tm, Ls, 10, "uniform"):
        np.testing.assert_array_equal(E, expected_frequency_matrix(tm, L, 10, "uniform"))


def test_L_must_exceed_T():
    with pytest.raises(ConfigError):
        expected_frequency_matrix(k3(), 3, 3)


def test_corpus_error():
    A = np.arange(9.0).reshape(3, 3)
    assert corpus_error(A, A) == 0
    B = A.copy()
    B[1, 2] += 0.1
    assert abs(corpus_error(B, A) - 0.1) < 1e-12
    assert abs(corpus_error(B, A, "max_abs") - 0.1) < 1e-12
    with pytest.raises(ValidationError):
        corpus_error(A, np.zeros((2, 2)))
    with pytest.raises(ConfigError):
        corpus_error(A, A, "l1")


def test_k3_corpus_error_at_scale():
    tm = k3()
    c = generate_corpus(tm, WalkConfig(N=10_000, L=40, T=10, seed=0))
    assert corpus_error(relative_frequencies(c), expected_frequency_matrix(tm, 40, 10)) < 0.02


def test_matrix_writers():
    buf = io.StringIO()
    write_dense_matrix(np.array([[0.0, 0.5], [0.5, 0.0]]), buf)
    assert buf.getvalue() == "0\t0.5\n0.5\t0\n"
    buf = io.StringIO()
    write_coo_matrix(np.array([[0.0, 0.5], [0.25, 0.0]]), buf)
    assert buf.getvalue() == "0\t1\t0.5\n1\t0\t0.25\n"


@settings(max_examples=25, deadline=None)
@given(
    st.integers(2, 4),
    st.booleans(),
    st.integers(0, 2**31),
    st.integers(1, 3),
    st.integers(1, 3),
    st.sampled_from(["uniform", "stationary", 0]),
)
def test_expected_matches_enumeration(n, directed, seed, T, extra, start):
    L = T + extra
    if L > 6:
        L, T = 6, min(T, 5)
    tm = random_connected(np.random.default_rng(seed), n, directed=directed)
    f = start_distribution(tm, start)
    np.testing.assert_allclose(expected_frequency_matrix(tm, L, T, start), enumerate_expected(tm, L, T, f), atol=1e-12, rtol=0)
