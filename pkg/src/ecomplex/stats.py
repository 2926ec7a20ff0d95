"""Correlation helpers with explicit handling of zero-variance inputs."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateDistributionError


def is_constant(x, rtol: float = 1e-12) -> bool:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return True
    spread = np.ptp(x)
    return bool(spread == 0 or spread <= rtol * max(1.0, float(np.max(np.abs(x)))))


def pearson(x, y) -> float:
    """Pearson correlation of two equal-length vectors.

    Raises:
        DegenerateDistributionError: if either vector has zero variance or fewer
            than two points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    if x.size < 2 or is_constant(x) or is_constant(y):
        raise DegenerateDistributionError("correlation undefined for zero-variance input")
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(dx @ dy / np.sqrt((dx @ dx) * (dy @ dy)))
    return min(1.0, max(-1.0, r))


def spearman(x, y) -> float:
    """Spearman rank correlation, ties given their average rank."""
    return pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def safe_pearson(x, y) -> float:
    """Like :func:`pearson` but returns NaN instead of raising on degenerate input."""
    try:
        return pearson(x, y)
    except DegenerateDistributionError:
        return float("nan")


def safe_spearman(x, y) -> float:
    try:
        return spearman(x, y)
    except DegenerateDistributionError:
        return float("nan")


def descending_ranks(x) -> np.ndarray:
    """Rank 1 for the largest value; ties share their average rank."""
    return rankdata(-np.asarray(x, dtype=float), method="average")
