"""Entry-wise deviations, resampled aggregates and the two-sample decision."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _rng
from .blocks import clamp_blocks, default_epsilon, estimate_block_matrix
from .community import DetectConfig, detect_communities
from .graph_core import (
    AssumptionReport,
    InputError,
    Membership,
    PreconditionError,
    as_adjacency,
    check_assumptions,
    validate_pair,
)
from .gumbel import gumbel_quantile, gumbel_sf

__all__ = [
    "TestConfig",
    "TestResult",
    "entrywise_deviation",
    "resample_gamma",
    "max_statistic",
    "statistic_T",
    "statistic_T_plus",
    "default_s",
    "default_m",
    "two_sample_test",
]


@dataclass(frozen=True)
class TestConfig:
    s: int | None = None  # draws per aggregate; None -> derived from the sparsity
    m: int | None = None  # realizations per community; None -> floor(n / 2K)
    alpha: float = 0.05
    seed: int = 0
    resample: str = "without"  # or "with" replacement
    epsilon: float | None = None  # clamp level; None -> 1 / (n(n-1))
    detect: DetectConfig = field(default_factory=DetectConfig)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.resample not in ("with", "without"):
            raise InputError(f"resample must be 'with' or 'without', got {self.resample!r}")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")


@dataclass
class TestResult:
    statistic_T: float
    f_n: float
    threshold: float
    p_value: float
    reject: bool
    alpha: float
    s_used: int
    m_used: int
    k_used: int
    seed: int
    clamp_activated: bool
    assumption_report: AssumptionReport
    statistic_T_plus: float
    membership: Membership | None = None

    __test__ = False

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("membership")
        d["assumption_report"] = asdict(self.assumption_report)
        return d


def entrywise_deviation(a1, a2, membership: Membership, b1hat, b2hat, epsilon: float | None = None):
    """Standardized row-wise differences between the networks, one column per community.

    ``rho[i, k]`` sums ``(A1_ij - A2_ij)`` over members ``j != i`` of community
    ``k``, divides by the block-pair standard deviation and by the square
    root of the number of summands. Block estimates are clamped to
    ``[epsilon, 1 - epsilon]`` before forming the variance.
    """
    a1 = as_adjacency(a1)
    a2 = as_adjacency(a2)
    n, K = membership.n, membership.K
    if a1.shape != (n, n) or a2.shape != (n, n):
        raise InputError("adjacency and membership sizes disagree")
    sizes = membership.sizes
    if sizes.min() < 2:
        raise PreconditionError(
            f"every community needs at least 2 nodes, got sizes {sizes.tolist()}"
        )
    eps = default_epsilon(n) if epsilon is None else epsilon
    v1 = clamp_blocks(b1hat, eps)
    v2 = clamp_blocks(b2hat, eps)
    var = v1 * (1 - v1) + v2 * (1 - v2)
    g = membership.labels
    diff = ((a1 - a2) @ membership.indicator()).toarray()
    count = np.broadcast_to(sizes.astype(np.float64), (n, K)).copy()
    count[np.arange(n), g] -= 1
    return diff / np.sqrt(var[g, :]) / np.sqrt(count)


def resample_gamma(rho, s: int, m: int, seed: int, replace: bool = False) -> np.ndarray:
    """Sums of ``s`` randomly drawn entries per column, scaled by ``1/sqrt(s)``.

    Entry ``(r, k)`` draws its indices from a stream keyed on ``(seed, r, k)``,
    so any subset of entries can be recomputed independently.
    """
    rho = np.asarray(rho, dtype=np.float64)
    n, K = rho.shape
    if s < 1:
        raise PreconditionError(f"S must be >= 1, got {s}")
    if not replace and s > n:
        raise PreconditionError(f"S = {s} exceeds n = {n} for draws without replacement")
    if m < 1:
        raise PreconditionError(f"M must be >= 1, got {m}")
    gamma = np.empty((m, K))
    root_s = math.sqrt(s)
    for r in range(m):
        for k in range(K):
            rng = _rng.stream(seed, _rng.RESAMPLE, r, k)
            idx = rng.choice(n, size=s, replace=replace)
            gamma[r, k] = rho[idx, k].sum() / root_s
    return gamma


def max_statistic(max_abs: float, count: int) -> float:
    """``max_abs^2 - 2 log(count) + log log(count)``."""
    if count < 3:
        raise PreconditionError(f"normalizing count must be >= 3, got {count}")
    return max_abs**2 - 2.0 * math.log(count) + math.log(math.log(count))


def statistic_T(gamma) -> float:
    gamma = np.asarray(gamma)
    m, K = gamma.shape
    return max_statistic(float(np.abs(gamma).max()), m * K)


def statistic_T_plus(rho, n: int | None = None, K: int | None = None) -> float:
    """Dense-regime baseline: un-resampled max deviation normalized by ``2Kn``."""
    rho = np.asarray(rho)
    n = rho.shape[0] if n is None else n
    K = rho.shape[1] if K is None else K
    return max_statistic(float(np.abs(rho).max()), 2 * K * n)


def default_s(q: float, n: int) -> int:
    """``min(max(ceil(1/sqrt(q)), 2), floor(sqrt(n)))``; ``q`` is the largest block probability."""
    return max(1, min(max(math.ceil(1.0 / math.sqrt(q)), 2), math.isqrt(n)))


def default_m(n: int, K: int) -> int:
    return max(1, n // (2 * K))


def two_sample_test(a1, a2, K: int, cfg: TestConfig | None = None, membership: Membership | None = None) -> TestResult:
    """Test whether two networks share one block-probability matrix.

    ``membership`` skips community detection when the labels are known.
    """
    cfg = cfg or TestConfig()
    problems = validate_pair(a1, a2)
    if problems:
        raise InputError("; ".join(problems))
    if K < 1:
        raise PreconditionError("K must be >= 1")
    a1 = as_adjacency(a1)
    a2 = as_adjacency(a2)
    n = a1.shape[0]
    if membership is None:
        detect = cfg.detect
        if detect.seed != cfg.seed:
            detect = DetectConfig(detect.method, detect.regularizer, detect.slim_steps, detect.kmeans_restarts, cfg.seed)
        membership = detect_communities(a1, a2, K, detect)
    elif membership.K != K or membership.n != n:
        raise InputError("supplied membership does not match K or n")
    else:
        # results must not depend on how communities are numbered
        membership = membership.canonical()

    b1 = estimate_block_matrix(a1, membership)
    b2 = estimate_block_matrix(a2, membership)
    eps = default_epsilon(n) if cfg.epsilon is None else cfg.epsilon
    pooled = clamp_blocks((b1 + b2) / 2, eps)
    s = cfg.s if cfg.s is not None else default_s(float(pooled.max()), n)
    m = cfg.m if cfg.m is not None else default_m(n, K)

    rho = entrywise_deviation(a1, a2, membership, b1, b2, eps)
    gamma = resample_gamma(rho, s, m, cfg.seed, replace=cfg.resample == "with")
    t = statistic_T(gamma)
    threshold = gumbel_quantile(1 - cfg.alpha)
    report = check_assumptions(membership, b1, b2, s, m)
    clamped = bool(np.any((b1 < eps) | (b1 > 1 - eps) | (b2 < eps) | (b2 > 1 - eps)))
    if clamped:
        report.messages.append(f"block estimates clamped to [{eps:.3g}, 1 - {eps:.3g}] in variance terms")
    return TestResult(
        statistic_T=t,
        f_n=float(np.abs(gamma).max()),
        threshold=threshold,
        p_value=gumbel_sf(t),
        reject=t >= threshold,
        alpha=cfg.alpha,
        s_used=s,
        m_used=m,
        k_used=K,
        seed=cfg.seed,
        clamp_activated=clamped,
        assumption_report=report,
        statistic_T_plus=statistic_T_plus(rho, n, K),
        membership=membership,
    )
