"""Estimate one shared membership from a pair of networks.

Pipeline: pool the two adjacency matrices, embed the nodes with the leading
eigenvectors of a normalized (and optionally diffused) operator, then cluster
the embedding rows with k-means.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh

from . import _rng
from .graph_core import InputError, Membership, PreconditionError, as_adjacency, validate_pair

__all__ = [
    "DetectConfig",
    "Embedding",
    "pool_networks",
    "default_regularizer",
    "spectral_embed",
    "slim_similarity",
    "slim_embed",
    "lloyd",
    "kmeans",
    "detect_communities",
]

# below this size eigenproblems are solved densely
DENSE_LIMIT = 400
SLIM_ALPHA = 0.9


@dataclass(frozen=True)
class DetectConfig:
    method: str = "spectral"
    regularizer: float | None = None  # None -> average degree / n
    slim_steps: int = 10
    kmeans_restarts: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("spectral", "slim"):
            raise InputError(f"unknown detection method {self.method!r}")
        if self.regularizer is not None and self.regularizer < 0:
            raise InputError("regularizer must be nonnegative")
        if self.slim_steps < 1:
            raise InputError("slim_steps must be >= 1")
        if self.kmeans_restarts < 1:
            raise InputError("kmeans_restarts must be >= 1")


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray  # n x K, one row per node
    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def K(self) -> int:
        return self.coords.shape[1]


def pool_networks(a1, a2) -> sp.csr_array:
    problems = validate_pair(a1, a2)
    if problems:
        raise InputError("; ".join(problems))
    return (as_adjacency(a1) + as_adjacency(a2)) / 2.0


def default_regularizer(w) -> float:
    """Average degree divided by ``n``."""
    n = w.shape[0]
    return float(w.sum()) / (n * n)


def _normalized_operator(w, regularizer: float):
    """Return ``(matvec, dense_or_None, n)`` for ``D^-1/2 (W + tau J) D^-1/2``."""
    w = as_adjacency(w) if sp.issparse(w) else sp.csr_array(np.asarray(w, dtype=np.float64))
    n = w.shape[0]
    deg = np.asarray(w.sum(axis=1)).ravel() + regularizer * n
    if np.any(deg <= 0):
        raise PreconditionError(
            "a node has zero degree; use a positive regularizer to handle isolated nodes"
        )
    dm = 1.0 / np.sqrt(deg)

    def matvec(x):
        x = np.asarray(x, dtype=np.float64)
        y = dm[:, None] * x if x.ndim == 2 else dm * x
        out = w @ y + regularizer * y.sum(axis=0)
        return dm[:, None] * out if x.ndim == 2 else dm * out

    dense = None
    if n <= DENSE_LIMIT:
        dense = dm[:, None] * (w.toarray() + regularizer) * dm[None, :]
        dense = (dense + dense.T) / 2
    return matvec, dense, n


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _top_eigenpairs(matvec, dense, n: int, K: int) -> Embedding:
    if K < 1 or K > n:
        raise PreconditionError(f"need 1 <= K <= n, got K={K}, n={n}")
    if dense is not None or K >= n - 1:
        if dense is None:
            dense = matvec(np.eye(n))
            dense = (dense + dense.T) / 2
        vals, vecs = np.linalg.eigh(dense)
    else:
        op = LinearOperator((n, n), matvec=matvec, matmat=matvec, dtype=np.float64)
        v0 = np.random.default_rng(0).standard_normal(n)
        vals, vecs = eigsh(op, k=K, which="LM", v0=v0, tol=0)
    # by magnitude; ties (e.g. +1/-1 on bipartite graphs) favor the positive eigenvalue
    order = np.lexsort((-vals, -np.abs(vals)))[:K]
    return Embedding(_fix_signs(vecs[:, order]), vals[order])


def spectral_embed(w, K: int, regularizer: float = 0.0) -> Embedding:
    """Leading eigenvectors (by eigenvalue magnitude) of the regularized normalized adjacency."""
    matvec, dense, n = _normalized_operator(w, regularizer)
    return _top_eigenpairs(matvec, dense, n, K)


def _series(x, matvec, steps: int, alpha: float):
    term = x
    total = np.zeros_like(x, dtype=np.float64)
    for t in range(steps):
        term = alpha * matvec(term)
        total = total + term
    return total


def slim_similarity(w, steps: int = 10, regularizer: float = 0.0, alpha: float = SLIM_ALPHA) -> np.ndarray:
    """Dense truncated diffusion similarity ``sum_{t=1..steps} alpha^t L^t`` (symmetrized)."""
    matvec, _, n = _normalized_operator(w, regularizer)
    m = _series(np.eye(n), matvec, steps, alpha)
    return (m + m.T) / 2


def slim_embed(w, K: int, steps: int = 10, regularizer: float = 0.0, alpha: float = SLIM_ALPHA) -> Embedding:
    """Leading eigenvectors of the truncated diffusion similarity.

    Large graphs never form the similarity matrix: the series is applied as a
    matrix-free operator.
    """
    if steps < 1:
        raise InputError("steps must be >= 1")
    matvec, dense, n = _normalized_operator(w, regularizer)
    if dense is not None:
        m = _series(np.eye(n), lambda x: dense @ x, steps, alpha)
        return _top_eigenpairs(None, (m + m.T) / 2, n, K)
    return _top_eigenpairs(lambda x: _series(x, matvec, steps, alpha), None, n, K)


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (x * x).sum(1)[:, None] - 2.0 * x @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _plusplus(x: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _sq_dists(x, x[chosen]).ravel()
    for _ in range(1, K):
        weights = d2.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total <= 0:
            # all remaining points coincide with a center
            weights = np.ones(n)
            weights[chosen] = 0.0
            total = weights.sum()
        nxt = int(rng.choice(n, p=weights / total))
        chosen.append(nxt)
        d2 = np.minimum(d2, _sq_dists(x, x[[nxt]]).ravel())
    return x[chosen].copy()


def lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    """Lloyd iterations from given centers.

    Returns ``(labels, centers, history)`` where ``history`` lists the
    within-cluster sum of squares after every assignment step. Clusters that
    empty out are re-seeded with the point farthest from its center.
    """
    x = np.asarray(x, dtype=np.float64)
    K = centers.shape[0]
    labels = None
    history = []
    for _ in range(max_iter):
        d = _sq_dists(x, centers)
        new = np.argmin(d, axis=1)
        dist = d[np.arange(x.shape[0]), new]
        counts = np.bincount(new, minlength=K)
        for k in np.flatnonzero(counts == 0):
            movable = counts[new] > 1
            far = int(np.argmax(np.where(movable, dist, -1.0)))
            counts[new[far]] -= 1
            new[far] = k
            counts[k] = 1
            dist[far] = 0.0
        history.append(float(dist.sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in range(K):
            centers[k] = x[labels == k].mean(axis=0)
    return labels, centers, history




def kmeans(e, K: int, restarts: int = 50, seed: int = 0) -> Membership:
    """k-means++ seeded Lloyd clustering of embedding rows, best of ``restarts``.

    Restart ``r`` uses its own stream derived from ``(seed, r)``; ties in the
    objective go to the lowest restart index.
    """
    x = e.coords if isinstance(e, Embedding) else np.asarray(e, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if K < 1 or n < K:
        raise PreconditionError(f"cannot form {K} clusters from {n} points")
    best_obj, best_labels = np.inf, None
    for r in range(restarts):
        rng = _rng.stream(seed, _rng.KMEANS, r)
        labels, _, history = lloyd(x, _plusplus(x, K, rng))
        if history[-1] < best_obj:
            best_obj, best_labels = history[-1], labels
    return Membership(best_labels, K).canonical()


def detect_communities(a1, a2, K: int, cfg: DetectConfig | None = None) -> Membership:
    cfg = cfg or DetectConfig()
    w = pool_networks(a1, a2)
    n = w.shape[0]
    if K < 1:
        raise PreconditionError("K must be >= 1")
    if K == 1:
        return Membership(np.zeros(n, dtype=np.int64), 1)
    tau = default_regularizer(w) if cfg.regularizer is None else cfg.regularizer
    if cfg.method == "spectral":
        emb = spectral_embed(w, K, tau)
    else:
        emb = slim_embed(w, K, cfg.slim_steps, tau)
    membership = kmeans(emb, K, cfg.kmeans_restarts, cfg.seed)
    sizes = membership.sizes
    if sizes.min() < 2:
        raise PreconditionError(
            f"clustering produced a community with {sizes.min()} node(s); "
            "block estimates need at least 2 nodes per community"
        )
    return membership
