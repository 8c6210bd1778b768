import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walkconv.bounds import (
    bias_bound_matrix,
    bound_report,
    bound_sweep,
    directed_U,
    directed_U_matrix,
    epsilon_for_confidence,
    fit_inverse_rate,
    geometric_average,
    hoeffding_failure_bound,
    joint_failure_bound,
    periodic_rate,
    undirected_U,
    undirected_U_matrix,
    write_bound_sweep,
)
from walkconv.errors import ConfigError, UnsupportedOperationError, ValidationError
from walkconv.limits import expected_frequency_matrix, expected_frequency_series, omega_matrix
from walkconv.spectral import doeblin_constants, normalized_laplacian

from conftest import (
    DIRECTED_APERIODIC,
    DIRECTED_PERIODIC,
    UNDIRECTED_BIPARTITE,
    UNDIRECTED_NONBIPARTITE,
    c4,
    dcycle3,
    dcycle3_loop,
    k3,
    karate_model,
    p3,
    random_connected,
)


def test_hoeffding_examples():
    assert abs(hoeffding_failure_bound(1000, 0.04295) - 0.05) < 2e-4
    assert hoeffding_failure_bound(10, 1e3) == 0.0
    assert abs(hoeffding_failure_bound(1, 0.01) - 2 * math.exp(-0.0002)) < 1e-15
    assert hoeffding_failure_bound(1, 0.01) > 1


def test_epsilon_examples():
    assert abs(epsilon_for_confidence(1000, 0.05) - 0.0429469) < 1e-6
    assert epsilon_for_confidence(10, 2) == 0
    assert abs(epsilon_for_confidence(4000, 0.05) - epsilon_for_confidence(1000, 0.05) / 2) < 1e-15
    with pytest.raises(ConfigError):
        epsilon_for_confidence(0, 0.05)


@given(st.integers(1, 10**6), st.floats(1e-6, 1.99))
def test_epsilon_inverts_hoeffding(N, delta):
    eps = epsilon_for_confidence(N, delta)
    if eps > 0:
        assert hoeffding_failure_bound(N, eps) == pytest.approx(delta, rel=1e-9)


def test_geometric_average():
    assert geometric_average(1.0, 7) == 1.0
    assert geometric_average(0.0, 4) == 0.25
    assert geometric_average(0.5, 10) == pytest.approx(sum(0.5**j for j in range(10)) / 10)


def test_undirected_U_k3_closed_form():
    tm = k3()
    s = normalized_laplacian(tm)
    # (1/10) (1 - 2^-10)/(1/2) * E[d^-1/2] * (1/2)(sqrt(d) P_vc + sqrt(d) P_cv), d = 2, P_vc = 1/2
    expected = (1 / 10) * (1 - 2.0**-10) / 0.5 * (1 / math.sqrt(2)) * math.sqrt(2) / 2
    assert undirected_U(tm, "uniform", s, 0, 1, 11, 1) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.0999, abs=1e-4)


def test_undirected_U_vanishes_with_L():
    tm = karate_model()
    U_small, _ = undirected_U_matrix(tm, "stationary", None, 20, 10)
    U_big, _ = undirected_U_matrix(tm, "stationary", None, 10**6, 10)
    assert U_big.max() < 1e-3 * U_small.max()


def test_undirected_U_dominates_on_k3():
    tm = k3()
    s = normalized_laplacian(tm)
    omega = omega_matrix(tm, 1)
    for L in range(12, 101):
        U, vac = undirected_U_matrix(tm, "uniform", s, L, 1)
        assert not vac
        assert np.all(np.abs(expected_frequency_matrix(tm, L, 1, 0) - omega) <= U + 1e-15)


def test_bipartite_needs_even_positions():
    with pytest.raises(ConfigError, match="even"):
        undirected_U_matrix(p3(), "uniform", None, 4, 1)
    U, vacuous = undirected_U_matrix(c4(), "uniform", None, 5, 1)
    assert not vacuous and np.all(np.isfinite(U))


def test_undirected_U_rejects_directed():
    with pytest.raises(UnsupportedOperationError):
        undirected_U_matrix(dcycle3_loop(), "uniform", None, 5, 1)


def test_directed_U_loop_cycle():
    tm = dcycle3_loop()
    d = doeblin_constants(tm)
    omega = omega_matrix(tm, 1)
    prev = np.inf
    for L in range(5, 101):
        U = directed_U_matrix(tm, d, L, 1)
        assert np.all(np.isfinite(U)) and U.max() < prev
        prev = U.max()
        assert np.all(np.abs(expected_frequency_matrix(tm, L, 1, 0) - omega) <= U + 1e-15)
    assert directed_U(tm, d, 0, 1, 10**7, 1) < 1e-5


def test_directed_U_periodic_rejected():
    with pytest.raises(ValidationError, match="period 3"):
        directed_U_matrix(dcycle3(), None, 5, 1)


def test_joint_bound():
    assert joint_failure_bound(1000, 0.1, 0.0) == hoeffding_failure_bound(1000, 0.1)
    assert joint_failure_bound(1000, 0.1, 0.05) == pytest.approx(2 * math.exp(-5), rel=1e-12)
    assert joint_failure_bound(1000, 0.05 + 1e-12, 0.05) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        joint_failure_bound(1000, 0.05, 0.05)
    with pytest.raises(ConfigError):
        joint_failure_bound(1000, 0.1, -0.01)


def test_bound_report_regimes():
    assert bound_report(k3(), 100, None, 2, 0.1).regime == "n_only"
    assert bound_report(k3(), 100, 20, 2, 0.1).regime == "joint_undirected"
    assert bound_report(dcycle3_loop(), 100, 20, 2, 0.5).regime == "joint_directed_aperiodic"
    r = bound_report(dcycle3(), 100, 20, 2, 0.1)
    assert r.regime == "joint_directed_periodic_rate_only" and r.vacuous and math.isnan(r.U)
    r = bound_report(k3(), 100, 12, 2, 1e-4)
    assert r.vacuous and r.failure_prob == 2.0


def test_bound_sweep_and_writer():
    rows = list(bound_sweep(k3(), range(3, 6), 2))
    assert len(rows) == 3 * 6
    assert all(slack >= 0 for *_, slack in rows)
    buf = io.StringIO()
    write_bound_sweep(rows[:1], buf)
    header, first = buf.getvalue().splitlines()
    assert header == "L\tpair\tactual_error\tU\tslack"
    assert first.startswith("3\t0,0\t")
    # bipartite graphs keep only even L - T
    assert {L for L, *_ in bound_sweep(p3(), range(3, 8), 1)} == {3, 5, 7}


def test_fit_inverse_rate_exact():
    x = np.arange(1, 50)
    c, r2 = fit_inverse_rate(x, 3.0 / x)
    assert c == pytest.approx(3.0) and r2 == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        fit_inverse_rate([1, 2], [0.0, 1.0])


def test_periodic_rate_zero_error_flag():
    r = periodic_rate(dcycle3(), 2, range(3, 60), "uniform")
    assert r["zero_error"]
    r = periodic_rate(dcycle3(), 2, range(3, 60), 0)
    assert not r["zero_error"] and r["r2"] > 0.99


def _dominance(tm, T, s_dist, L_values):
    omega = omega_matrix(tm, T)
    worst = np.inf
    for L, E in expected_frequency_series(tm, L_values, T, s_dist):
        U, _, _ = bias_bound_matrix(tm, L, T, s_dist)
        worst = min(worst, float((U - np.abs(E - omega)).min()))
    return worst


@pytest.mark.parametrize("name", sorted(UNDIRECTED_NONBIPARTITE) + sorted(DIRECTED_APERIODIC))
@pytest.mark.parametrize("start", ["uniform", 0])
def test_U_dominates(name, start):
    factory = {**UNDIRECTED_NONBIPARTITE, **DIRECTED_APERIODIC}[name]
    tm = factory()
    for T in (1, 3, 10):
        assert _dominance(tm, T, start, range(T + 1, 201)) >= -1e-15


@pytest.mark.parametrize("name", sorted(UNDIRECTED_BIPARTITE))
def test_U_dominates_bipartite_even(name):
    tm = UNDIRECTED_BIPARTITE[name]()
    for T in (1, 2, 5):
        assert _dominance(tm, T, 0, range(T + 2, 201, 2)) >= -1e-15


@pytest.mark.parametrize("name", sorted(DIRECTED_PERIODIC))
def test_periodic_graphs_fit_inverse_rate(name):
    tm = DIRECTED_PERIODIC[name]()
    r = periodic_rate(tm, 2, range(3, 201), 0)
    assert not r["zero_error"] and r["r2"] >= 0.95


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 7), st.booleans(), st.integers(0, 2**31), st.integers(1, 4))
def test_U_dominates_random(n, directed, seed, T):
    tm = random_connected(np.random.default_rng(seed), n, directed=directed)
    if (directed and tm.period > 1) or tm.bipartite:
        return
    assert _dominance(tm, T, 0, range(T + 1, 80)) >= -1e-15
