"""Distance metrics between count vectors."""

from __future__ import annotations

import numpy as np

from .graph import as_counts

__all__ = ["tv_distance", "log_mse"]


def _padded_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    av = as_counts(a).values
    bv = as_counts(b).values
    length = max(len(av), len(bv))
    return as_counts(a).padded(length), as_counts(b).padded(length)


def tv_distance(a, b) -> float:
    """Total-variation distance between the two vectors normalized to
    probability mass functions (zero-padded to a common length)."""
    av, bv = _padded_pair(a, b)
    ta, tb = av.sum(), bv.sum()
    if ta <= 0 or tb <= 0:
        raise ValueError("tv_distance needs vectors with positive total mass")
    return float(0.5 * np.abs(av / ta - bv / tb).sum())


def log_mse(a, b, support=None) -> float:
    """Mean squared difference of log10 values over the support.

    ``support`` defaults to the full common index range; entries there must
    be strictly positive in both vectors.
    """
    av, bv = _padded_pair(a, b)
    if support is None:
        idx = np.arange(len(av))
    else:
        idx = np.asarray(list(support), dtype=int)
    if idx.size == 0:
        raise ValueError("empty support")
    sa, sb = av[idx], bv[idx]
    if (sa <= 0).any() or (sb <= 0).any():
        raise ValueError("log_mse needs strictly positive entries on the support")
    diff = np.log10(sa) - np.log10(sb)
    return float(np.mean(diff * diff))
