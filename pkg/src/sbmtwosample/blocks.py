"""Plug-in estimates of community-wise edge probabilities."""
from __future__ import annotations

import numpy as np

from .graph_core import InputError, Membership, PreconditionError, as_adjacency, as_block_matrix

__all__ = ["community_sizes", "estimate_block_matrix", "default_epsilon", "clamp_blocks"]


def community_sizes(membership: Membership) -> np.ndarray:
    return membership.sizes


def estimate_block_matrix(a, membership: Membership) -> np.ndarray:
    """Block-wise edge frequencies given a membership.

    Off-diagonal blocks divide the edge count by ``n_k * n_l``; diagonal blocks
    divide the count of pairs ``i < j`` by ``n_k (n_k - 1) / 2``.
    """
    a = as_adjacency(a)
    if a.shape[0] != membership.n:
        raise InputError(f"adjacency has {a.shape[0]} nodes, membership has {membership.n}")
    sizes = membership.sizes.astype(np.float64)
    if sizes.min() < 2:
        raise PreconditionError(
            f"every community needs at least 2 nodes, got sizes {sizes.astype(int).tolist()}"
        )
    z = membership.indicator()
    # counts[k, l] = sum_{i in k, j in l} A_ij; diagonal counts each pair twice
    counts = (z.T @ (a @ z)).toarray()
    slots = np.outer(sizes, sizes)
    np.fill_diagonal(slots, sizes * (sizes - 1))
    b = counts / slots
    return (b + b.T) / 2


def default_epsilon(n: int) -> float:
    return 1.0 / (n * (n - 1))


def clamp_blocks(b, epsilon: float) -> np.ndarray:
    """Map every entry into ``[epsilon, 1 - epsilon]`` (variance denominators only)."""
    if not 0 < epsilon < 0.5:
        raise InputError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    return np.clip(as_block_matrix(b), epsilon, 1 - epsilon)
