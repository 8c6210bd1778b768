"""Split a fixed walk budget ``K = N (L - T)`` between walk count and walk length."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import ConfigError

__all__ = ["HeuristicPlan", "predicted_error", "optimal_walk_count", "plan", "compare_strategies"]


@dataclass(frozen=True)
class HeuristicPlan:
    K: int
    delta: float
    g: float
    T: int
    N: int
    L: int
    predicted_epsilon: float

    def to_dict(self) -> dict:
        return asdict(self)


def predicted_error(N: float, K: float, delta: float, g: float = 1.0) -> float:
    """Bias term ``g N / K`` plus the Hoeffding radius ``sqrt(ln(2/delta) / 2N)``."""
    if N < 1 or K < N or not 0 < delta < 1 or g < 0:
        raise ConfigError("need 1 <= N <= K, 0 < delta < 1 and g >= 0")
    return g * N / K + math.sqrt(math.log(2.0 / delta) / (2.0 * N))


def optimal_walk_count(K: float, delta: float, g: float = 1.0) -> float:
    """Continuous minimiser of :func:`predicted_error`: ``0.5 (K^2 ln(2/delta) / g^2)^(1/3)``."""
    return 0.5 * (K * K * math.log(2.0 / delta) / (g * g)) ** (1.0 / 3.0)


def plan(K: int, delta: float = 0.01, g: float = 1.0, T: int = 10) -> HeuristicPlan:
    if K < 1 or not 0 < delta < 1 or g <= 0 or T < 1:
        raise ConfigError("need K >= 1, 0 < delta < 1, g > 0, T >= 1")
    N = min(max(round(optimal_walk_count(K, delta, g)), 1), K)  # round() is half-to-even
    L = T + max(round(K / N), 1)
    return HeuristicPlan(
        K=K, delta=delta, g=g, T=T, N=N, L=L, predicted_epsilon=predicted_error(N, K, delta, g)
    )


def compare_strategies(K: int, T: int = 10, delta: float = 0.01, g: float = 1.0) -> dict[str, tuple[int, int]]:
    """``(N, L)`` for many short walks (A), one long walk (B) and the heuristic (C)."""
    if K < 1:
        raise ConfigError("K must be >= 1")
    p = plan(K, delta, g, T)
    return {"A": (K, T + 1), "B": (1, T + K), "C": (p.N, p.L)}
