"""Windowed random-walk corpus generation (the first stage of DeepWalk).

Walk ``n`` of a corpus draws all of its randomness from its own Philox stream
keyed by ``(seed, n)``: one uniform picks the start vertex, the next ``L - 1``
drive the transitions.  Counts are therefore a pure function of the config, no
matter how walks are distributed over threads.
"""
from __future__ import annotations

import bisect
import re
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ValidationError
from .graph import TransitionModel

__all__ = [
    "WalkConfig",
    "Corpus",
    "walk_stream",
    "start_distribution",
    "sample_walk",
    "generate_corpus",
    "relative_frequencies",
    "visit_frequencies",
    "write_corpus",
    "read_corpus",
]

StartSpec = Union[str, int, Sequence[float], np.ndarray]

CHUNK = 2048
_DENSE_COUNT_LIMIT = 1 << 24
_U64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class WalkConfig:
    """Parameters of one corpus.

    ``start`` is ``"uniform"``, ``"stationary"``, a vertex id (one-hot start) or
    an explicit probability vector over the vertices.
    """

    N: int
    L: int
    T: int
    start: StartSpec = "uniform"
    seed: int = 0

    def __post_init__(self):
        if int(self.N) < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if int(self.T) < 1:
            raise ConfigError(f"T must be >= 1, got {self.T}")
        if int(self.L) <= int(self.T):
            raise ConfigError(f"walk length L={self.L} must exceed window T={self.T}")
        if not 0 <= int(self.seed) <= _U64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        s = self.start
        if isinstance(s, str):
            if s not in ("uniform", "stationary"):
                raise ConfigError(f"unknown start selector {s!r}")
        elif isinstance(s, (int, np.integer)):
            if s < 0:
                raise ConfigError("start vertex must be nonnegative")
        else:
            f = np.asarray(s, dtype=float)
            if f.ndim != 1 or np.any(f < 0) or abs(f.sum() - 1.0) > 1e-12:
                raise ConfigError("explicit start distribution must be a probability vector")

    @property
    def pairs_per_walk(self) -> int:
        return 2 * (self.L - self.T) * self.T

    @property
    def expected_total(self) -> int:
        return self.N * self.pairs_per_walk


@dataclass(frozen=True, eq=False)
class Corpus:
    """Co-occurrence counts ``m`` (sparse, int64) with total multiplicity ``|D|``."""

    counts: sp.csr_matrix
    total: int
    config: WalkConfig | None = None

    @property
    def vertex_count(self) -> int:
        return self.counts.shape[0]

    def scaled(self, factor: int) -> Corpus:
        """Same pairs, every multiplicity multiplied by ``factor``."""
        return Corpus(self.counts * int(factor), self.total * int(factor), self.config)


def walk_stream(seed: int, n: int) -> np.random.Generator:
    """Counter-based stream for walk ``n``: Philox keyed by the 128-bit value (n, seed)."""
    return np.random.Generator(np.random.Philox(key=(int(n) << 64) | int(seed)))


def start_distribution(tm: TransitionModel, start: StartSpec) -> np.ndarray:
    n = tm.n
    if isinstance(start, str):
        if start == "uniform":
            return np.full(n, 1.0 / n)
        if start == "stationary":
            return tm.pi.copy()
        raise ConfigError(f"unknown start selector {start!r}")
    if isinstance(start, (int, np.integer)):
        if not 0 <= start < n:
            raise ConfigError(f"start vertex {start} out of range for {n} vertices")
        f = np.zeros(n)
        f[start] = 1.0
        return f
    f = np.asarray(start, dtype=float)
    if f.shape != (n,):
        raise ConfigError(f"start distribution has length {f.size}, graph has {n} vertices")
    if np.any(f < 0) or abs(f.sum() - 1.0) > 1e-12:
        raise ConfigError("start distribution must be a probability vector")
    return f


class _Sampler:
    """Inverse-CDF tables over the sorted adjacency lists of ``P``.

    Row ``v``'s cumulative probabilities are stored offset by ``v`` in one global
    sorted key array, so a batch of walks at different vertices can be advanced
    with a single ``searchsorted``.
    """

    def __init__(self, tm: TransitionModel):
        P = tm.P
        self.indptr = P.indptr.astype(np.int64)
        self.indices = P.indices.astype(np.int64)
        rows = np.repeat(np.arange(tm.n), np.diff(self.indptr))
        cum = np.empty_like(P.data)
        for v in range(tm.n):
            lo, hi = self.indptr[v], self.indptr[v + 1]
            c = np.cumsum(P.data[lo:hi])
            c[-1] = 1.0
            cum[lo:hi] = c
        self.keys = rows + cum
        self._keys_list = self.keys.tolist()
        self._indptr_list = self.indptr.tolist()
        self._indices_list = self.indices.tolist()

    def step(self, cur: np.ndarray, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.keys, cur + u, side="right")
        idx = np.minimum(idx, self.indptr[cur + 1] - 1)
        return self.indices[idx]

    def step_one(self, cur: int, u: float) -> int:
        # must agree exactly with step()
        lo, hi = self._indptr_list[cur], self._indptr_list[cur + 1]
        idx = bisect.bisect_right(self._keys_list, cur + u, lo, hi)
        return self._indices_list[min(idx, hi - 1)]

    def walks(self, starts: np.ndarray, U: np.ndarray) -> np.ndarray:
        W = np.empty((len(starts), U.shape[1] + 1), dtype=np.int64)
        W[:, 0] = starts
        for t in range(U.shape[1]):
            W[:, t + 1] = self.step(W[:, t], U[:, t])
        return W


def _draw_start(f_cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(f_cum, u, side="right"), len(f_cum) - 1)


def sample_walk(tm: TransitionModel, start_vertex: int, L: int, rng: np.random.Generator) -> np.ndarray:
    """One walk of ``L`` vertices beginning at ``start_vertex``; consumes ``L - 1`` uniforms."""
    if not 0 <= start_vertex < tm.n:
        raise ValidationError(f"start vertex {start_vertex} out of range")
    if L < 1:
        raise ConfigError("L must be >= 1")
    sampler = _Sampler(tm)
    u = rng.random(L - 1)
    return sampler.walks(np.array([start_vertex]), u[None, :])[0]


def _count_pairs(W: np.ndarray, T: int, n: int) -> np.ndarray | sp.csr_matrix:
    L = W.shape[1]
    span = L - T
    left = W[:, :span]
    keys = [(left * n + W[:, r:r + span]).ravel() for r in range(1, T + 1)]
    keys = np.concatenate(keys)
    if n * n <= _DENSE_COUNT_LIMIT:
        m = np.bincount(keys, minlength=n * n).reshape(n, n)
        return m + m.T
    uniq, cnt = np.unique(keys, return_counts=True)
    m = sp.csr_matrix((cnt.astype(np.int64), (uniq // n, uniq % n)), shape=(n, n))
    return m + m.T


def _chunk_counts(sampler, f_cum, one_hot, tm, cfg, lo, hi):
    U = np.empty((hi - lo, cfg.L))
    for k, walk in enumerate(range(lo, hi)):
        U[k] = walk_stream(cfg.seed, walk).random(cfg.L)
    starts = np.full(hi - lo, one_hot) if one_hot is not None else _draw_start(f_cum, U[:, 0])
    W = sampler.walks(starts, U[:, 1:])
    return _count_pairs(W, cfg.T, tm.n)


def generate_corpus(tm: TransitionModel, cfg: WalkConfig, threads: int = 1) -> Corpus:
    """Sample ``cfg.N`` walks and count every (vertex, context) pair within the window.

    For each walk and each ``j`` in ``0..L-T-1``, ``r`` in ``1..T`` both
    ``(v_j, v_{j+r})`` and ``(v_{j+r}, v_j)`` are counted.
    """
    f = start_distribution(tm, cfg.start)
    one_hot = int(cfg.start) if isinstance(cfg.start, (int, np.integer)) else None
    f_cum = np.cumsum(f)
    sampler = _Sampler(tm)
    bounds = [(lo, min(lo + CHUNK, cfg.N)) for lo in range(0, cfg.N, CHUNK)]

    def work(b):
        return _chunk_counts(sampler, f_cum, one_hot, tm, cfg, *b)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    m = parts[0]
    for p in parts[1:]:
        m = m + p
    counts = sp.csr_matrix(m, dtype=np.int64)
    counts.sort_indices()
    total = int(counts.sum())
    if total != cfg.expected_total:
        raise AssertionError(f"corpus total {total} != {cfg.expected_total}")
    return Corpus(counts=counts, total=total, config=cfg)


def relative_frequencies(c: Corpus, dense: bool = True):
    """Entrywise ``m(v, c) / |D|``."""
    if c.total <= 0:
        raise ValidationError("relative frequencies of an empty corpus are undefined")
    freq = c.counts.astype(float) / c.total
    return freq.toarray() if dense else freq


def visit_frequencies(tm: TransitionModel, start_vertex: int, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Fraction of the first ``n_steps`` positions of one walk spent at each vertex."""
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    sampler = _Sampler(tm)
    u = rng.random(n_steps - 1).tolist()
    path = np.empty(n_steps, dtype=np.int64)
    cur = int(start_vertex)
    path[0] = cur
    step = sampler.step_one
    for t, ut in enumerate(u, start=1):
        cur = step(cur, ut)
        path[t] = cur
    return np.bincount(path, minlength=tm.n) / n_steps


_HEADER = re.compile(r"#(.*)")


def write_corpus(c: Corpus, fh) -> None:
    """TSV: ``#total=.. N=.. L=.. T=.. seed=..`` header then ``v<TAB>c<TAB>count`` rows."""
    cfg = c.config
    if cfg is None:
        fh.write(f"#total={c.total}\n")
    else:
        fh.write(f"#total={c.total} N={cfg.N} L={cfg.L} T={cfg.T} seed={cfg.seed}\n")
    coo = c.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for i, j, v in zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist()):
        if v:
            fh.write(f"{i}\t{j}\t{v}\n")


def read_corpus(fh, vertex_count: int | None = None) -> Corpus:
    first = fh.readline()
    match = _HEADER.match(first.strip())
    if not match:
        raise ValidationError("corpus file must start with a '#total=...' header")
    fields = dict(tok.split("=", 1) for tok in match.group(1).split())
    if "total" not in fields:
        raise ValidationError("corpus header lacks total=")
    rows, cols, vals = [], [], []
    for lineno, line in enumerate(fh, start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValidationError(f"line {lineno}: expected v<TAB>c<TAB>count")
        rows.append(int(parts[0]))
        cols.append(int(parts[1]))
        vals.append(int(parts[2]))
    n = vertex_count if vertex_count is not None else max(max(rows, default=-1), max(cols, default=-1)) + 1
    counts = sp.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n, n),
    )
    counts.sort_indices()
    total = int(fields["total"])
    if int(counts.sum()) != total:
        raise ValidationError(f"corpus rows sum to {int(counts.sum())}, header says total={total}")
    cfg = None
    if all(k in fields for k in ("N", "L", "T", "seed")):
        cfg = WalkConfig(N=int(fields["N"]), L=int(fields["L"]), T=int(fields["T"]), seed=int(fields["seed"]))
    return Corpus(counts=counts, total=total, config=cfg)
