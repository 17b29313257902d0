"""Graph and model types, SBM sampling, validation and regime checks.

Adjacency matrices are ``scipy.sparse.csr_array`` objects holding a symmetric
0/1 pattern with an empty diagonal. Community labels are 0-based integers
``0..K-1``; block matrices are plain ``K x K`` float arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "InputError",
    "PreconditionError",
    "Membership",
    "AssumptionReport",
    "as_adjacency",
    "as_block_matrix",
    "sample_sbm",
    "membership_equal_probability",
    "validate_adjacency",
    "validate_pair",
    "check_assumptions",
    "edge_count",
]


class InputError(ValueError):
    """Malformed or inconsistent input data."""


class PreconditionError(ValueError):
    """Inputs are well formed but violate an operation's preconditions."""


@dataclass(frozen=True)
class Membership:
    """Community assignment of ``n`` nodes to ``K`` labelled blocks."""

    labels: np.ndarray
    K: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise InputError("labels must be a 1-d vector")
        if self.K < 1:
            raise InputError("K must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.K):
            raise InputError(f"labels must lie in 0..{self.K - 1}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def indicator(self) -> sp.csr_array:
        """``n x K`` 0/1 matrix with a single one per row."""
        n = self.n
        return sp.csr_array(
            (np.ones(n), (np.arange(n), self.labels)), shape=(n, self.K)
        )

    def permuted(self, perm) -> "Membership":
        """Membership of the graph whose node ``i`` is node ``perm[i]`` here."""
        return Membership(self.labels[np.asarray(perm)], self.K)

    def canonical(self) -> "Membership":
        """Relabel communities in order of first appearance along the nodes."""
        return Membership(_canonical(self.labels), self.K)

    def same_partition(self, other: "Membership") -> bool:
        """True when both label vectors induce the same partition of nodes."""
        if self.n != other.n:
            return False
        return bool(np.array_equal(_canonical(self.labels), _canonical(other.labels)))


def _canonical(labels: np.ndarray) -> np.ndarray:
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse]


@dataclass
class AssumptionReport:
    """Finite-sample surrogate checks of the asymptotic regime. Advisory only."""

    min_size_ok: bool
    max_size_ok: bool
    degree_growth_ok: bool
    sampling_ok: bool
    messages: list[str] = field(default_factory=list)
    thresholds: dict[str, float] = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return self.min_size_ok and self.max_size_ok and self.degree_growth_ok and self.sampling_ok


def as_adjacency(a) -> sp.csr_array:
    """Coerce a dense or sparse matrix to the canonical csr adjacency layout.

    No validation is performed; see :func:`validate_adjacency`.
    """
    if sp.issparse(a):
        out = sp.csr_array(a, dtype=np.float64)
    else:
        out = sp.csr_array(np.asarray(a, dtype=np.float64))
    out.eliminate_zeros()
    out.sort_indices()
    return out


def as_block_matrix(b, K: int | None = None) -> np.ndarray:
    b = np.array(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InputError(f"block matrix must be square, got shape {b.shape}")
    if K is not None and b.shape[0] != K:
        raise InputError(f"block matrix has dimension {b.shape[0]}, expected K={K}")
    if not np.allclose(b, b.T, rtol=0, atol=1e-12):
        raise InputError("block matrix must be symmetric")
    if np.any(~np.isfinite(b)) or b.min() < 0 or b.max() > 1:
        raise InputError("block probabilities must lie in [0, 1]")
    return b


def edge_count(a) -> int:
    return int(as_adjacency(a).nnz // 2)


def _triangle_pairs(t: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    # Inverse of the row-major enumeration of pairs (i < j) in an m-set.
    t = np.asarray(t, dtype=np.int64)
    total = m * (m - 1) // 2
    i = m - 2 - np.floor(np.sqrt(-8.0 * t + 4.0 * m * (m - 1) - 7) / 2.0 - 0.5).astype(np.int64)
    j = t + i + 1 - total + (m - i) * (m - i - 1) // 2
    return i, j


def sample_sbm(membership: Membership, blocks, seed: int) -> sp.csr_array:
    """Draw one undirected SBM adjacency matrix.

    Each block pair ``(k, l)`` draws its edge count from the binomial law and
    then places that many edges uniformly among the candidate node pairs,
    which is equivalent to independent Bernoulli draws for every pair.
    """
    blocks = as_block_matrix(blocks)
    if blocks.shape[0] != membership.K:
        raise InputError(
            f"membership has K={membership.K} but block matrix is {blocks.shape[0]}x{blocks.shape[0]}"
        )
    n = membership.n
    if n < 2:
        raise PreconditionError("need at least two nodes")
    rng = np.random.default_rng(seed)
    groups = [membership.members(k) for k in range(membership.K)]
    rows, cols = [], []
    for k in range(membership.K):
        for l in range(k, membership.K):
            nk, nl = groups[k].size, groups[l].size
            pairs = nk * (nk - 1) // 2 if k == l else nk * nl
            if pairs == 0:
                continue
            m = rng.binomial(pairs, blocks[k, l])
            if m == 0:
                continue
            picks = rng.choice(pairs, size=m, replace=False)
            if k == l:
                i, j = _triangle_pairs(picks, nk)
                rows.append(groups[k][i])
                cols.append(groups[k][j])
            else:
                rows.append(groups[k][picks // nl])
                cols.append(groups[l][picks % nl])
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
    else:
        r = c = np.empty(0, dtype=np.int64)
    data = np.ones(2 * r.size)
    a = sp.csr_array((data, (np.concatenate([r, c]), np.concatenate([c, r]))), shape=(n, n))
    a.sort_indices()
    return a


def membership_equal_probability(n: int, K: int, seed: int, max_retries: int = 100) -> Membership:
    """I.i.d. uniform labels, redrawn until every community is nonempty."""
    if not 1 <= K <= n:
        raise PreconditionError(f"need n >= K >= 1, got n={n}, K={K}")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        labels = rng.integers(0, K, size=n)
        if np.bincount(labels, minlength=K).min() > 0:
            return Membership(labels, K)
    raise PreconditionError(
        f"could not draw a membership with all {K} communities nonempty in {max_retries} tries (n={n})"
    )


def validate_adjacency(a, name: str = "adjacency") -> list[str]:
    """Return a list of violations (empty when ``a`` is a valid adjacency matrix)."""
    problems = []
    shape = a.shape
    if len(shape) != 2 or shape[0] != shape[1]:
        return [f"{name}: not square (shape {shape})"]
    m = sp.csr_array(a, dtype=np.float64) if sp.issparse(a) else sp.csr_array(np.asarray(a, dtype=np.float64))
    vals = m.data[m.data != 0]
    if vals.size and not np.all(vals == 1):
        problems.append(f"{name}: entries must be 0 or 1")
    if np.any(m.diagonal() != 0):
        bad = np.flatnonzero(m.diagonal())
        problems.append(f"{name}: nonzero diagonal at node(s) {bad[:10].tolist()}")
    if (m != m.T).nnz:
        problems.append(f"{name}: not symmetric")
    return problems


def validate_pair(a1, a2) -> list[str]:
    """Check two adjacency matrices describe graphs on one common node set."""
    problems = validate_adjacency(a1, "first network") + validate_adjacency(a2, "second network")
    if a1.shape != a2.shape:
        problems.append(f"size mismatch: {a1.shape[0]} vs {a2.shape[0]} nodes")
    return problems


def check_assumptions(membership: Membership, b1, b2, s: int, m: int) -> AssumptionReport:
    """Evaluate finite-n surrogates of the regime the Gumbel limit needs.

    Surrogates: ``min n_k >= n/(4K)``, ``max n_k <= n^2/(K^2 log^2 n)``,
    ``n * min B >= log n`` for both block matrices, ``M*K <= n/2`` and
    ``S <= sqrt(n)``.
    """
    n, K = membership.n, membership.K
    b1 = as_block_matrix(b1, K)
    b2 = as_block_matrix(b2, K)
    sizes = membership.sizes
    log_n = math.log(n) if n > 1 else 0.0
    min_size = n / (4 * K)
    max_size = n**2 / (K**2 * log_n**2) if log_n > 0 else math.inf
    min_nb = n * min(b1.min(), b2.min())
    thresholds = {
        "min_community_size": min_size,
        "max_community_size": max_size,
        "min_n_times_B": log_n,
        "max_MK": n / 2,
        "max_S": math.sqrt(n),
    }
    messages = []
    min_size_ok = bool(sizes.min() >= min_size)
    if not min_size_ok:
        messages.append(f"smallest community has {sizes.min()} nodes < n/(4K) = {min_size:.1f}")
    max_size_ok = bool(sizes.max() <= max_size)
    if not max_size_ok:
        messages.append(f"largest community has {sizes.max()} nodes > n^2/(K^2 log^2 n) = {max_size:.1f}")
    degree_growth_ok = bool(min_nb >= log_n)
    if not degree_growth_ok:
        messages.append(f"min_kl n*B_kl = {min_nb:.3g} < log n = {log_n:.3g}")
    sampling_ok = True
    if m * K > n / 2:
        sampling_ok = False
        messages.append(f"M*K = {m * K} > n/2 = {n / 2:g}")
    if s > math.sqrt(n):
        sampling_ok = False
        messages.append(f"S = {s} > sqrt(n) = {math.sqrt(n):.2f}")
    return AssumptionReport(min_size_ok, max_size_ok, degree_growth_ok, sampling_ok, messages, thresholds)
