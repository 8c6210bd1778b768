"""Normalized-Laplacian spectrum, spectral expansion of P^t and mixing constants."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsupportedOperationError, ValidationError
from .graph import TransitionModel
from .limits import matrix_power_rows

__all__ = [
    "SpectralSummary",
    "DoeblinConstants",
    "normalized_laplacian",
    "spectral_transition_power",
    "mixing_bound",
    "bipartite_mixing_bound",
    "doeblin_constants",
    "total_variation",
    "spectrum_report",
]


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    """Eigendecomposition of ``I - D^{1/2} P D^{-1/2}``.

    ``mu_star`` is the largest ``|1 - lambda_k|`` over ``k >= 2``; ``nu_star``
    additionally leaves out the top eigenvalue (the one equal to 2 on a
    bipartite graph) and is 0 when nothing remains.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mu_star: float
    nu_star: float
    laplacian: np.ndarray


@dataclass(frozen=True)
class DoeblinConstants:
    r: int
    delta: float
    theta: float
    alpha: float
    C: float


def normalized_laplacian(tm: TransitionModel) -> SpectralSummary:
    if tm.directed:
        raise UnsupportedOperationError("normalized Laplacian spectrum requires an undirected graph")
    sq = np.sqrt(tm.degrees)
    P = tm.P.toarray()
    lap = np.eye(tm.n) - sq[:, None] * P / sq[None, :]
    lap = 0.5 * (lap + lap.T)
    vals, vecs = np.linalg.eigh(lap)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    for k in range(vecs.shape[1]):
        nz = np.flatnonzero(np.abs(vecs[:, k]) > 1e-12)
        if len(nz) and vecs[nz[0], k] < 0:
            vecs[:, k] = -vecs[:, k]
    dev = np.abs(1.0 - vals)
    mu = float(dev[1:].max()) if len(vals) > 1 else 0.0
    nu = float(dev[1:-1].max()) if len(vals) > 2 else 0.0
    return SpectralSummary(eigenvalues=vals, eigenvectors=vecs, mu_star=mu, nu_star=nu, laplacian=lap)


def spectral_transition_power(s: SpectralSummary, tm: TransitionModel, t: int) -> np.ndarray:
    """``(P^t)_ij = pi_j + sum_{k>=2} (1 - lambda_k)^t v_i^(k) v_j^(k) sqrt(d_j / d_i)``."""
    if t < 0:
        raise ConfigError("t must be nonnegative")
    V = s.eigenvectors[:, 1:]
    decay = (1.0 - s.eigenvalues[1:]) ** t
    core = (V * decay) @ V.T
    sq = np.sqrt(tm.degrees)
    return tm.pi[None, :] + core * (sq[None, :] / sq[:, None])


def mixing_bound(s: SpectralSummary, tm: TransitionModel, i: int, j: int, t: int) -> float:
    """Upper bound ``sqrt(d_j / d_i) mu*^t`` on ``|(P^t)_ij - pi_j|``."""
    d = tm.degrees
    return float(np.sqrt(d[j] / d[i]) * s.mu_star**t)


def bipartite_mixing_bound(
    s: SpectralSummary, tm: TransitionModel, i: int, j: int, window: Sequence[int]
) -> tuple[float, float]:
    """Window-averaged ``(P^t)_ij`` and its bound ``sqrt(d_j/d_i) <nu*^t>``.

    ``window`` must be an even number of consecutive time steps.
    """
    window = [int(t) for t in window]
    if len(window) == 0 or len(window) % 2:
        raise ConfigError("bipartite averaging needs an even number of time steps")
    if any(b - a != 1 for a, b in zip(window, window[1:])) or window[0] < 0:
        raise ConfigError("window must be consecutive nonnegative time steps")
    if not tm.bipartite:
        raise ValidationError("bipartite_mixing_bound requires a bipartite graph")
    X = matrix_power_rows(tm, window[0], rows=[i])
    PT = tm.P.T.tocsr()
    acc = 0.0
    for _ in window:
        acc += X[0, j]
        X = (PT @ X.T).T
    avg = acc / len(window)
    d = tm.degrees
    bound = float(np.sqrt(d[j] / d[i]) * np.mean([s.nu_star**t for t in window]))
    return float(avg), bound


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def doeblin_constants(tm: TransitionModel, r_cap: int | None = None) -> DoeblinConstants:
    """Constants with ``max_i ||P^t(i, .) - pi||_TV <= C alpha^t`` for an aperiodic chain.

    ``r`` is the first power with ``P^r > 0`` entrywise, ``delta = min_ij
    (P^r)_ij / pi_j`` and ``theta = 1 - delta``; then ``alpha = theta^(1/r)``
    and ``C = 1/theta``.
    """
    if tm.period > 1:
        raise ValidationError("periodic chain has no Doeblin constants")
    cap = 4 * tm.n if r_cap is None else r_cap
    PT = tm.P.T.tocsr()
    Q = np.eye(tm.n)
    for r in range(1, cap + 1):
        Q = (PT @ Q.T).T
        if np.all(Q > 0):
            break
    else:
        raise ValidationError(f"no entrywise-positive power P^r found for r <= {cap}")
    delta = float(np.min(Q / tm.pi[None, :]))
    # P^r equal to the stationary projector gives delta = 1; keep theta strictly positive.
    theta = 1.0 - delta
    if theta <= 0.0:
        theta = np.finfo(float).eps
        delta = 1.0 - theta
    return DoeblinConstants(r=r, delta=delta, theta=theta, alpha=theta ** (1.0 / r), C=1.0 / theta)


def spectrum_report(tm: TransitionModel) -> dict:
    report = {"vertex_count": tm.n, "directed": tm.directed, "bipartite": tm.bipartite, "period": tm.period}
    if not tm.directed:
        s = normalized_laplacian(tm)
        report.update(
            eigenvalues=[float(x) for x in s.eigenvalues],
            mu_star=s.mu_star,
            nu_star=s.nu_star,
        )
    else:
        report.update(eigenvalues=None, mu_star=None, nu_star=None)
    try:
        dc = doeblin_constants(tm)
        report["doeblin"] = {"r": dc.r, "delta": dc.delta, "theta": dc.theta, "alpha": dc.alpha, "C": dc.C}
    except ValidationError:
        report["doeblin"] = None
    return report
