"""A small deterministic embedding stage on top of a corpus.

The per-pair term is ``g_ic(Z) = log sigmoid(z_i . z_c) - reg * |z_i|^2``, which
is bounded above, and the optimiser is plain full-batch gradient ascent on the
frequency-weighted objective.  Training only ever sees ``m / |D|``, so corpora
that differ by a constant multiplicity factor train to identical embeddings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TrainingDivergedError, ValidationError
from .walker import Corpus

__all__ = [
    "ObjectiveConfig",
    "EmbeddingMatrix",
    "pair_terms",
    "objective_value",
    "normalized_objective_value",
    "objective_gradient",
    "train",
    "write_embedding",
]


@dataclass(frozen=True)
class ObjectiveConfig:
    dim: int = 2
    reg: float = 1e-3
    learning_rate: float = 0.1
    iterations: int = 200
    seed: int = 0
    init_std: float = 0.1
    g_form: str = "sigmoid"

    def __post_init__(self):
        if self.g_form != "sigmoid":
            raise ConfigError(f"unsupported pair term {self.g_form!r}")
        if self.dim < 1 or self.iterations < 0 or self.learning_rate <= 0 or self.reg < 0:
            raise ConfigError("invalid objective configuration")


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Columns of ``Z`` (shape ``dim x |V|``) are the vertex vectors."""

    Z: np.ndarray
    history: tuple = field(default=())

    @property
    def dim(self) -> int:
        return self.Z.shape[0]


def _pairs(corpus: Corpus):
    coo = corpus.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    keep = coo.data[order] > 0
    return coo.row[order][keep], coo.col[order][keep], coo.data[order][keep]


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def pair_terms(Z: np.ndarray, rows: np.ndarray, cols: np.ndarray, reg: float) -> np.ndarray:
    """``g_ic(Z)`` for every listed pair."""
    zi, zc = Z[:, rows], Z[:, cols]
    return _log_sigmoid(np.sum(zi * zc, axis=0)) - reg * np.sum(zi * zi, axis=0)


def _check(Z, corpus):
    if Z.ndim != 2 or Z.shape[1] != corpus.vertex_count:
        raise ValidationError(f"Z has shape {Z.shape}, corpus has {corpus.vertex_count} vertices")


def objective_value(Z: np.ndarray, corpus: Corpus, cfg: ObjectiveConfig = ObjectiveConfig()) -> float:
    """``F(Z, D) = sum m(v, c) g_vc(Z)`` over pairs present in the corpus."""
    _check(Z, corpus)
    rows, cols, m = _pairs(corpus)
    return float(np.dot(m.astype(float), pair_terms(Z, rows, cols, cfg.reg)))


def _frequencies(corpus: Corpus):
    if corpus.total <= 0:
        raise ValidationError("normalized objective of an empty corpus is undefined")
    rows, cols, m = _pairs(corpus)
    return rows, cols, m.astype(float) / corpus.total


def normalized_objective_value(Z: np.ndarray, corpus: Corpus, cfg: ObjectiveConfig = ObjectiveConfig()) -> float:
    _check(Z, corpus)
    rows, cols, w = _frequencies(corpus)
    return float(np.dot(w, pair_terms(Z, rows, cols, cfg.reg)))


def _gradient(Z, rows, cols, w, reg):
    zi, zc = Z[:, rows], Z[:, cols]
    coef = w * np.exp(_log_sigmoid(-np.sum(zi * zc, axis=0)))  # w * sigmoid(-s)
    G = np.zeros_like(Z)
    np.add.at(G.T, rows, (coef * zc - 2.0 * reg * w * zi).T)
    np.add.at(G.T, cols, (coef * zi).T)
    return G


def objective_gradient(Z: np.ndarray, corpus: Corpus, cfg: ObjectiveConfig = ObjectiveConfig(), normalized: bool = True):
    """Gradient of the (normalized, by default) objective with respect to ``Z``."""
    _check(Z, corpus)
    if normalized:
        rows, cols, w = _frequencies(corpus)
    else:
        rows, cols, m = _pairs(corpus)
        w = m.astype(float)
    return _gradient(Z, rows, cols, w, cfg.reg)


def train(corpus: Corpus, cfg: ObjectiveConfig = ObjectiveConfig()) -> EmbeddingMatrix:
    """Deterministic gradient ascent from a seeded Gaussian start."""
    rows, cols, w = _frequencies(corpus)
    rng = np.random.default_rng(cfg.seed)
    Z = rng.normal(0.0, cfg.init_std, size=(cfg.dim, corpus.vertex_count))
    history = [float(np.dot(w, pair_terms(Z, rows, cols, cfg.reg)))]
    for it in range(1, cfg.iterations + 1):
        # overflow is caught by the finiteness check below
        with np.errstate(over="ignore", invalid="ignore"):
            Z = Z + cfg.learning_rate * _gradient(Z, rows, cols, w, cfg.reg)
            value = float(np.dot(w, pair_terms(Z, rows, cols, cfg.reg)))
        if not np.isfinite(value) or not np.all(np.isfinite(Z)):
            raise TrainingDivergedError(it)
        history.append(value)
    return EmbeddingMatrix(Z=Z, history=tuple(history))


def write_embedding(emb: EmbeddingMatrix, fh) -> None:
    for v in range(emb.Z.shape[1]):
        fh.write(str(v) + "\t" + "\t".join(format(float(x), ".17g") for x in emb.Z[:, v]) + "\n")
