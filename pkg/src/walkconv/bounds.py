"""Finite-sample error bounds for corpus pair frequencies.

The Hoeffding tail controls the sampling error in the number of walks ``N``.
The bias bound ``U`` controls the finite walk length; it is spectral on
undirected graphs and Doeblin-based on aperiodic directed ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsupportedOperationError, ValidationError
from .graph import TransitionModel
from .limits import expected_frequency_series, omega_matrix, window_power_sum
from .spectral import DoeblinConstants, SpectralSummary, doeblin_constants, normalized_laplacian
from .walker import StartSpec, start_distribution

__all__ = [
    "BoundReport",
    "hoeffding_failure_bound",
    "epsilon_for_confidence",
    "geometric_average",
    "undirected_U",
    "undirected_U_matrix",
    "directed_U",
    "directed_U_matrix",
    "joint_failure_bound",
    "bias_bound_series",
    "bias_bound_matrix",
    "bound_report",
    "bound_sweep",
    "write_bound_sweep",
    "fit_inverse_rate",
    "periodic_rate",
]

# Mixing factors this close to 1 make the geometric average numerically meaningless.
_UNIT_TOL = 1e-12
# Below this the expectation already equals omega up to rounding.
_ZERO_ERROR = 1e-12


@dataclass(frozen=True)
class BoundReport:
    epsilon: float
    failure_prob: float
    U: float
    regime: str
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "failure_prob": self.failure_prob,
            "U": self.U,
            "regime": self.regime,
            "vacuous": self.vacuous,
        }


def hoeffding_failure_bound(N: int, epsilon: float) -> float:
    """``2 exp(-2 N eps^2)``; may exceed 1 (vacuous) for small ``N eps^2``."""
    if N < 1 or epsilon <= 0:
        raise ConfigError("need N >= 1 and epsilon > 0")
    return 2.0 * math.exp(-2.0 * N * epsilon * epsilon)


def epsilon_for_confidence(N: int, delta: float) -> float:
    if N < 1 or not 0 < delta <= 2:
        raise ConfigError("need N >= 1 and 0 < delta <= 2")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * N))


def geometric_average(phi: float, n: int) -> float:
    """``(1/n) sum_{j<n} phi^j``, i.e. ``(1 - phi^n) / (n (1 - phi))``; 1 at ``phi = 1``."""
    if phi >= 1.0 - _UNIT_TOL:
        return 1.0
    return (1.0 - phi**n) / ((1.0 - phi) * n)


def _undirected_parts(tm, s_dist, spectral, T):
    """``(phi, vacuous, M)`` with ``U = geometric_average(phi, L - T) * M``."""
    if tm.directed:
        raise UnsupportedOperationError("undirected_U needs an undirected graph")
    if spectral is None:
        spectral = normalized_laplacian(tm)
    phi = spectral.nu_star if tm.bipartite else spectral.mu_star
    f = start_distribution(tm, s_dist)
    d = tm.degrees
    start_term = float(np.dot(f, d**-0.5))
    A = np.sqrt(d)[:, None] * window_power_sum(tm, T)
    return phi, phi >= 1.0 - _UNIT_TOL, start_term * (A + A.T) / (2 * T)


def _check_lengths(tm, L, T):
    if L <= T:
        raise ConfigError(f"walk length L={L} must exceed window T={T}")
    if tm.bipartite and (L - T) % 2:
        raise ConfigError("bipartite graphs need an even number L - T of window positions")


def undirected_U_matrix(
    tm: TransitionModel,
    s_dist: StartSpec,
    spectral: SpectralSummary | None,
    L: int,
    T: int,
) -> tuple[np.ndarray, bool]:
    """Entrywise spectral bias bound; returns ``(U, vacuous)``.

    Bipartite graphs use ``nu*`` and require an even number ``L - T`` of window
    positions; everything else uses ``mu*``.
    """
    if not tm.directed:
        _check_lengths(tm, L, T)
    phi, vacuous, M = _undirected_parts(tm, s_dist, spectral, T)
    return geometric_average(phi, L - T) * M, vacuous


def undirected_U(tm, s_dist, spectral, v: int, c: int, L: int, T: int) -> float:
    U, _ = undirected_U_matrix(tm, s_dist, spectral, L, T)
    return float(U[v, c])


def _directed_parts(tm, doeblin, T):
    if tm.period > 1:
        raise ValidationError(
            f"chain has period {tm.period}: only an O(1/L) rate is available for periodic graphs "
            "with no explicit constant"
        )
    if doeblin is None:
        doeblin = doeblin_constants(tm)
    S = window_power_sum(tm, T)
    return doeblin, doeblin.C * (S + S.T) / (2 * T)


def directed_U_matrix(tm: TransitionModel, doeblin: DoeblinConstants | None, L: int, T: int) -> np.ndarray:
    """``C/(L-T) (1 - alpha^(L-T))/(1 - alpha) (1/2T) sum_r (P^r)_vc + (P^r)_cv``."""
    doeblin, M = _directed_parts(tm, doeblin, T)
    if L <= T:
        raise ConfigError(f"walk length L={L} must exceed window T={T}")
    return geometric_average(doeblin.alpha, L - T) * M


def directed_U(tm, doeblin, v: int, c: int, L: int, T: int) -> float:
    return float(directed_U_matrix(tm, doeblin, L, T)[v, c])


def joint_failure_bound(N: int, epsilon: float, U: float) -> float:
    """``2 exp(-2 N (eps - U)^2)`` for ``eps > U >= 0``."""
    if U < 0:
        raise ConfigError("U must be nonnegative")
    if epsilon <= U:
        raise ValidationError(f"bound undefined below U: epsilon={epsilon} <= U={U}")
    gap = epsilon - U
    return 2.0 * math.exp(-2.0 * N * gap * gap)


def bias_bound_series(tm: TransitionModel, T: int, s_dist: StartSpec = "uniform"):
    """``(regime, vacuous, U_of_L)`` where ``U_of_L(L)`` returns the bias-bound matrix."""
    if not tm.directed:
        phi, vacuous, M = _undirected_parts(tm, s_dist, None, T)

        def U_of_L(L):
            _check_lengths(tm, L, T)
            return geometric_average(phi, L - T) * M

        return "joint_undirected", vacuous, U_of_L
    doeblin, M = _directed_parts(tm, None, T)

    def U_of_L(L):
        if L <= T:
            raise ConfigError(f"walk length L={L} must exceed window T={T}")
        return geometric_average(doeblin.alpha, L - T) * M

    return "joint_directed_aperiodic", False, U_of_L


def bias_bound_matrix(tm: TransitionModel, L: int, T: int, s_dist: StartSpec = "uniform") -> tuple[np.ndarray, str, bool]:
    """The applicable ``U`` matrix for this graph with its regime name and vacuous flag."""
    regime, vacuous, U_of_L = bias_bound_series(tm, T, s_dist)
    return U_of_L(L), regime, vacuous


def bound_report(
    tm: TransitionModel,
    N: int,
    L: int | None,
    T: int,
    epsilon: float,
    s_dist: StartSpec = "uniform",
) -> BoundReport:
    """Failure-probability bound at ``epsilon``.

    Without ``L`` only the Hoeffding bound around the finite-L expectation is
    reported.  With ``L`` the bound is around ``omega`` and uses the largest
    entry of ``U``; periodic directed graphs fall back to the rate-only regime.
    """
    if L is None:
        fp = hoeffding_failure_bound(N, epsilon)
        return BoundReport(epsilon, fp, 0.0, "n_only", vacuous=fp >= 1.0)
    if tm.directed and tm.period > 1:
        fp = hoeffding_failure_bound(N, epsilon)
        return BoundReport(epsilon, fp, float("nan"), "joint_directed_periodic_rate_only", vacuous=True)
    U, regime, vac = bias_bound_matrix(tm, L, T, s_dist)
    u = float(U.max())
    if epsilon <= u:
        return BoundReport(epsilon, 2.0, u, regime, vacuous=True)
    fp = joint_failure_bound(N, epsilon, u)
    return BoundReport(epsilon, fp, u, regime, vacuous=vac or fp >= 1.0)


def bound_sweep(tm: TransitionModel, L_values, T: int, s_dist: StartSpec = "uniform"):
    """Yield ``(L, (v, c), actual_error, U, slack)`` for every pair ``v <= c``."""
    omega = omega_matrix(tm, T)
    iu = np.triu_indices(tm.n)
    _, _, U_of_L = bias_bound_series(tm, T, s_dist)
    if tm.bipartite:
        L_values = [L for L in L_values if (L - T) % 2 == 0]
    for L, E in expected_frequency_series(tm, L_values, T, s_dist):
        U = U_of_L(L)
        err = np.abs(E - omega)
        for v, c in zip(*iu):
            yield int(L), (int(v), int(c)), float(err[v, c]), float(U[v, c]), float(U[v, c] - err[v, c])


def write_bound_sweep(rows, fh) -> None:
    fh.write("L\tpair\tactual_error\tU\tslack\n")
    for L, (v, c), err, u, slack in rows:
        fh.write(f"{L}\t{v},{c}\t{err:.17g}\t{u:.17g}\t{slack:.17g}\n")


def fit_inverse_rate(x, y) -> tuple[float, float]:
    """Fit ``y ~ c / x`` in log space (slope fixed at -1); returns ``(c, R^2)``.

    ``c`` is the geometric mean of ``x * y`` and ``R^2`` is computed on
    ``log y``.  Nonpositive ``y`` values carry no rate information and are skipped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    lx, ly = np.log(x[keep]), np.log(y[keep])
    if len(ly) < 2:
        raise ValidationError("need at least two positive errors to fit a rate")
    log_c = float(np.mean(ly + lx))
    resid = ly - (log_c - lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return float(np.exp(log_c)), r2


def periodic_rate(
    tm: TransitionModel, T: int, L_values, s_dist: StartSpec = "uniform", burn_in: int = 1
) -> dict:
    """Empirical ``max |E - omega|`` against ``L`` and its ``c / (L - T)`` fit.

    The error of a periodic chain oscillates with ``(L - T) mod period``, so the
    fit uses the per-block maximum over ``period`` consecutive walk lengths,
    skipping the first ``burn_in`` blocks where boundary offsets dominate.
    """
    L_values = sorted(int(L) for L in L_values)
    omega = omega_matrix(tm, T)
    errors = np.array([np.abs(E - omega).max() for _, E in expected_frequency_series(tm, L_values, T, s_dist)])
    theta = max(tm.period, 1)
    env_x, env_y = [], []
    for lo in range(burn_in * theta, len(L_values) - theta + 1, theta):
        block = slice(lo, lo + theta)
        k = lo + int(np.argmax(errors[block]))
        env_x.append(L_values[k] - T)
        env_y.append(float(errors[k]))
    zero = bool(max(env_y, default=0.0) < _ZERO_ERROR)
    c, r2 = (0.0, float("nan")) if zero else fit_inverse_rate(env_x, env_y)
    return {
        "zero_error": zero,
        "period": tm.period,
        "L": L_values,
        "error": errors.tolist(),
        "envelope_window_positions": env_x,
        "envelope_error": env_y,
        "c": c,
        "r2": r2,
    }
