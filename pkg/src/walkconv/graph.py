"""Weighted graphs in CSR layout and the random-walk transition model on them."""
from __future__ import annotations

import json
import math
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import (
    NotIrreducibleError,
    ParseError,
    UnsupportedOperationError,
    ValidationError,
)

__all__ = [
    "Graph",
    "TransitionModel",
    "from_edges",
    "load_edge_list",
    "read_edge_file",
    "build_transition",
    "detect_bipartite",
    "compute_period",
    "graph_summary",
]

PI_TOL = 1e-13
PI_MAX_ITER = 10**6


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted graph stored as compressed sparse rows.

    Attributes
    ----------
    vertex_count : int
    offsets : ndarray of int64, shape (vertex_count + 1,)
        Arcs of vertex ``u`` live in ``targets[offsets[u]:offsets[u + 1]]``.
    targets : ndarray of int64
        Arc heads, sorted ascending within each row.
    weights : ndarray of float64
        Positive arc weights aligned with ``targets``.
    directed : bool
        If False both orientations of every edge are stored.
    """

    vertex_count: int
    offsets: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    directed: bool = False

    def __post_init__(self):
        n = self.vertex_count
        if n < 0:
            raise ValidationError("vertex_count must be nonnegative")
        if len(self.offsets) != n + 1 or self.offsets[0] != 0:
            raise ValidationError("offsets must have length vertex_count + 1 and start at 0")
        if np.any(np.diff(self.offsets) < 0):
            raise ValidationError("offsets must be nondecreasing")
        if self.offsets[-1] != len(self.targets) or len(self.targets) != len(self.weights):
            raise ValidationError("final offset must equal the number of arcs")
        if len(self.targets) and (self.targets.min() < 0 or self.targets.max() >= n):
            raise ValidationError("arc target out of range")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ValidationError("weights must be finite and nonnegative")
        out = self.degrees
        dangling = np.flatnonzero(out <= 0)
        if len(dangling):
            raise ValidationError(f"vertex {int(dangling[0])} has no outgoing edge")
        if not self.directed:
            w = self.adjacency()
            if (w != w.T).nnz:
                raise ValidationError("undirected graph has an asymmetric edge multiset")

    @property
    def degrees(self) -> np.ndarray:
        """Weighted out-degrees d_i = sum_j w_ij."""
        return np.bincount(self.sources(), weights=self.weights, minlength=self.vertex_count)

    @property
    def arc_count(self) -> int:
        return len(self.targets)

    @property
    def edge_count(self) -> int:
        if self.directed:
            return self.arc_count
        loops = int(np.sum(self.targets == self.sources()))
        return (self.arc_count - loops) // 2 + loops

    def sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.vertex_count), np.diff(self.offsets))

    def neighbors(self, u: int) -> np.ndarray:
        return self.targets[self.offsets[u]:self.offsets[u + 1]]

    def adjacency(self) -> sp.csr_matrix:
        n = self.vertex_count
        return sp.csr_matrix((self.weights, self.targets, self.offsets), shape=(n, n))


def from_edges(
    edges: Iterable[tuple],
    directed: bool = False,
    vertex_count: int | None = None,
) -> Graph:
    """Build a :class:`Graph` from ``(src, dst[, weight])`` tuples.

    Undirected input stores both orientations; duplicate arcs accumulate weight
    and zero-weight arcs are dropped.
    """
    src, dst, wts = [], [], []
    for e in edges:
        u, v = int(e[0]), int(e[1])
        w = float(e[2]) if len(e) > 2 else 1.0
        if w < 0:
            raise ValidationError(f"negative weight on edge ({u}, {v})")
        src.append(u)
        dst.append(v)
        wts.append(w)
        if not directed:
            src.append(v)
            dst.append(u)
            wts.append(w)
    n = vertex_count
    if n is None:
        n = max(max(src, default=-1), max(dst, default=-1)) + 1
    coo = sp.coo_matrix(
        (np.asarray(wts, dtype=float), (np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64))),
        shape=(n, n),
    )
    csr = coo.tocsr()  # sums duplicates
    csr.eliminate_zeros()
    csr.sort_indices()
    return Graph(
        vertex_count=n,
        offsets=csr.indptr.astype(np.int64),
        targets=csr.indices.astype(np.int64),
        weights=csr.data.astype(float),
        directed=directed,
    )


def load_edge_list(stream: Iterable[str], directed: bool = False) -> Graph:
    """Parse ``src dst [weight]`` lines; ``#`` starts a comment line."""
    edges = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'src dst [weight]', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise ParseError(f"malformed line {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise ParseError("vertex ids must be nonnegative integers", lineno)
        if not (w >= 0) or math.isinf(w):
            raise ParseError(f"invalid weight {parts[2]!r}; weights must be finite and nonnegative", lineno)
        edges.append((u, v, w))
    return from_edges(edges, directed=directed)


def read_edge_file(path, directed: bool = False) -> Graph:
    with open(path) as fh:
        return load_edge_list(fh, directed=directed)


def _reachable(adj: sp.csr_matrix, root: int) -> np.ndarray:
    """BFS depths from ``root`` (-1 for unreachable vertices)."""
    n = adj.shape[0]
    depth = np.full(n, -1, dtype=np.int64)
    depth[root] = 0
    queue = deque([root])
    indptr, indices = adj.indptr, adj.indices
    while queue:
        u = queue.popleft()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                queue.append(v)
    return depth


def _check_irreducible(g: Graph) -> np.ndarray:
    """Return BFS depths from vertex 0, raising unless the graph is (strongly) connected."""
    if g.vertex_count == 0:
        raise NotIrreducibleError("graph has no vertices")
    adj = g.adjacency()
    depth = _reachable(adj, 0)
    if np.any(depth < 0) or (g.directed and np.any(_reachable(adj.T.tocsr(), 0) < 0)):
        kind = "strongly connected" if g.directed else "connected"
        raise NotIrreducibleError(f"graph not irreducible: it is not {kind}")
    return depth


def detect_bipartite(g: Graph) -> tuple[bool, np.ndarray | None]:
    """Try to 2-colour an undirected graph by BFS.

    Returns ``(True, colouring)`` with a 0/1 colour per vertex, or ``(False, None)``.
    """
    if g.directed:
        raise UnsupportedOperationError("bipartiteness is only defined here for undirected graphs")
    colour = np.full(g.vertex_count, -1, dtype=np.int64)
    for root in range(g.vertex_count):
        if colour[root] >= 0:
            continue
        colour[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if colour[v] < 0:
                    colour[v] = 1 - colour[u]
                    queue.append(v)
                elif colour[v] == colour[u]:
                    return False, None
    return True, colour


def compute_period(g: Graph) -> tuple[int, tuple[np.ndarray, ...] | None]:
    """Period of the walk and its cyclic classes (``None`` when aperiodic).

    The period is the gcd over arcs (u, v) of ``depth(u) + 1 - depth(v)``, with
    depths taken by BFS from vertex 0.
    """
    depth = _check_irreducible(g)
    shifts = depth[g.sources()] + 1 - depth[g.targets]
    period = reduce(math.gcd, (abs(int(s)) for s in np.unique(shifts)), 0)
    if period == 1:
        return 1, None
    classes = tuple(np.flatnonzero(depth % period == i) for i in range(period))
    return period, classes


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Random walk on a :class:`Graph`: ``P``, degrees, ``pi``, period, bipartiteness."""

    graph: Graph
    P: sp.csr_matrix
    degrees: np.ndarray
    pi: np.ndarray
    period: int
    bipartite: bool
    period_classes: tuple[np.ndarray, ...] | None = field(default=None)

    @property
    def n(self) -> int:
        return self.graph.vertex_count

    @property
    def directed(self) -> bool:
        return self.graph.directed


def _power_iteration_pi(P: sp.csr_matrix, period: int) -> np.ndarray:
    # Averaging over one period kills the unit-modulus eigenvalues of a periodic chain.
    n = P.shape[0]
    PT = P.T.tocsr()
    x = np.full(n, 1.0 / n)
    for _ in range(PI_MAX_ITER):
        acc = np.zeros(n)
        y = x
        for _ in range(period):
            y = PT @ y
            acc += y
        new = acc / period
        new /= new.sum()
        if np.abs(new - x).sum() < PI_TOL:
            return new
        x = new
    raise NotIrreducibleError("graph not irreducible: power iteration did not converge")


def build_transition(g: Graph) -> TransitionModel:
    """Derive the transition model P_ij = w_ij / d_i and its stationary distribution."""
    period, classes = compute_period(g)
    d = g.degrees
    W = g.adjacency()
    P = sp.csr_matrix((g.weights / np.repeat(d, np.diff(g.offsets)), W.indices, W.indptr), shape=W.shape)
    if g.directed:
        pi = _power_iteration_pi(P, period)
        bipartite = False
    else:
        pi = d / d.sum()
        bipartite, _ = detect_bipartite(g)
    residual = np.abs(P.T @ pi - pi).max()
    if residual >= 1e-10:
        raise NotIrreducibleError(f"graph not irreducible: stationary residual {residual:.3g}")
    return TransitionModel(
        graph=g, P=P, degrees=d, pi=pi, period=period, bipartite=bipartite, period_classes=classes
    )


def graph_summary(g: Graph, tm: TransitionModel | None = None) -> dict:
    if tm is None:
        tm = build_transition(g)
    d = g.degrees
    return {
        "vertex_count": g.vertex_count,
        "edge_count": g.edge_count,
        "directed": g.directed,
        "period": tm.period,
        "bipartite": tm.bipartite,
        "degree_min": float(d.min()),
        "degree_max": float(d.max()),
    }


def summary_json(g: Graph, tm: TransitionModel | None = None) -> str:
    return json.dumps(graph_summary(g, tm), sort_keys=True)
