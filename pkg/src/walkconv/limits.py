"""Exact expectations and asymptotic limits of corpus pair frequencies."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ValidationError
from .graph import TransitionModel
from .walker import StartSpec, start_distribution

__all__ = [
    "matrix_power_rows",
    "window_power_sum",
    "expected_frequency_matrix",
    "omega_matrix",
    "averaged_start_marginal",
    "corpus_error",
    "write_dense_matrix",
    "write_coo_matrix",
]


def matrix_power_rows(tm: TransitionModel, t: int, rows=None) -> np.ndarray:
    """Rows of ``P^t`` (all rows by default), by repeated sparse products."""
    if t < 0:
        raise ConfigError("t must be nonnegative")
    rows = np.arange(tm.n) if rows is None else np.atleast_1d(np.asarray(rows, dtype=np.int64))
    X = np.zeros((len(rows), tm.n))
    X[np.arange(len(rows)), rows] = 1.0
    PT = tm.P.T.tocsr()
    for _ in range(t):
        X = (PT @ X.T).T
    return X


def window_power_sum(tm: TransitionModel, T: int) -> np.ndarray:
    """``sum_{r=1..T} P^r`` as a dense matrix."""
    if T < 1:
        raise ConfigError("T must be >= 1")
    Q = np.eye(tm.n)
    S = np.zeros((tm.n, tm.n))
    PT = tm.P.T.tocsr()
    for _ in range(T):
        Q = (PT @ Q.T).T
        S += Q
    return S


def averaged_start_marginal(tm: TransitionModel, f: np.ndarray, steps: int) -> np.ndarray:
    """``(1/steps) sum_{j<steps} f P^j``: the law of the window's left vertex."""
    PT = tm.P.T.tocsr()
    x = np.asarray(f, dtype=float)
    acc = np.zeros(tm.n)
    for _ in range(steps):
        acc += x
        x = PT @ x
    return acc / steps


def _symmetrised(weights: np.ndarray, S: np.ndarray, T: int) -> np.ndarray:
    A = weights[:, None] * S / T
    return 0.5 * (A + A.T)


def expected_frequency_matrix(tm: TransitionModel, L: int, T: int, f_V0: StartSpec = "uniform") -> np.ndarray:
    """``E[m(v, c) / |D|]`` for walks of length ``L``, window ``T`` and start law ``f_V0``."""
    if L <= T:
        raise ConfigError(f"walk length L={L} must exceed window T={T}")
    f = start_distribution(tm, f_V0)
    a = averaged_start_marginal(tm, f, L - T)
    return _symmetrised(a, window_power_sum(tm, T), T)


def expected_frequency_series(tm: TransitionModel, L_values, T: int, f_V0: StartSpec = "uniform"):
    """Yield ``(L, expected_frequency_matrix(tm, L, T, f_V0))`` for increasing ``L``.

    Shares ``sum_r P^r`` and the running start marginal across all lengths.
    """
    L_values = sorted(int(L) for L in L_values)
    if L_values and L_values[0] <= T:
        raise ConfigError(f"walk length L={L_values[0]} must exceed window T={T}")
    S = window_power_sum(tm, T)
    PT = tm.P.T.tocsr()
    x = start_distribution(tm, f_V0)
    acc = np.zeros(tm.n)
    steps = 0
    for L in L_values:
        while steps < L - T:
            acc += x
            x = PT @ x
            steps += 1
        yield L, _symmetrised(acc / steps, S, T)


def omega_matrix(tm: TransitionModel, T: int) -> np.ndarray:
    """Limit ``omega(v, c) = (1/2T) sum_r pi_v (P^r)_vc + pi_c (P^r)_cv``."""
    return _symmetrised(tm.pi, window_power_sum(tm, T), T)


def corpus_error(freqs, reference, norm: str = "frobenius") -> float:
    if sp.issparse(freqs):
        freqs = freqs.toarray()
    if sp.issparse(reference):
        reference = reference.toarray()
    freqs = np.asarray(freqs, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if freqs.shape != reference.shape:
        raise ValidationError(f"shape mismatch: {freqs.shape} vs {reference.shape}")
    diff = freqs - reference
    if norm == "frobenius":
        return float(np.sqrt(np.sum(diff * diff)))
    if norm == "max_abs":
        return float(np.abs(diff).max()) if diff.size else 0.0
    raise ConfigError(f"unknown norm {norm!r}")


def write_dense_matrix(M: np.ndarray, fh) -> None:
    for row in np.asarray(M):
        fh.write("\t".join(format(float(x), ".17g") for x in row) + "\n")


def write_coo_matrix(M, fh) -> None:
    coo = sp.coo_matrix(M)
    order = np.lexsort((coo.col, coo.row))
    for i, j, x in zip(coo.row[order], coo.col[order], coo.data[order]):
        if x != 0:
            fh.write(f"{i}\t{j}\t{format(float(x), '.17g')}\n")
