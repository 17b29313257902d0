"""Limit law of the max-deviation statistic.

Under the null the statistic converges to a Gumbel law with location
``-log(pi)`` and scale 2, i.e. ``P(T <= y) = exp(-exp(-y/2) / sqrt(pi))``.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["LOCATION", "SCALE", "gumbel_cdf", "gumbel_sf", "gumbel_pdf", "gumbel_quantile", "gumbel_sample"]

LOCATION = -2.0 * math.log(math.sqrt(math.pi))
SCALE = 2.0
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


def gumbel_cdf(y):
    y = np.asarray(y, dtype=np.float64)
    out = np.exp(-_INV_SQRT_PI * np.exp(-y / 2.0))
    return float(out) if out.ndim == 0 else out


def gumbel_sf(y):
    """Upper tail ``1 - cdf(y)``, accurate far into the tail."""
    y = np.asarray(y, dtype=np.float64)
    out = -np.expm1(-_INV_SQRT_PI * np.exp(-y / 2.0))
    return float(out) if out.ndim == 0 else out


def gumbel_pdf(y):
    y = np.asarray(y, dtype=np.float64)
    z = _INV_SQRT_PI * np.exp(-y / 2.0)
    out = 0.5 * z * np.exp(-z)
    return float(out) if out.ndim == 0 else out


def gumbel_quantile(p: float) -> float:
    """Inverse of :func:`gumbel_cdf`; ``gumbel_quantile(1 - alpha)`` is the rejection threshold."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {p}")
    return -2.0 * math.log(-math.sqrt(math.pi) * math.log(p))


def gumbel_sample(size, rng: np.random.Generator) -> np.ndarray:
    """Draw from the limit law by inversion."""
    u = rng.random(size)
    return -2.0 * np.log(-math.sqrt(math.pi) * np.log(u))
