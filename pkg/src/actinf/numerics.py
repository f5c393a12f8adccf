"""Small numerical helpers used throughout the package.

All information quantities are in nats. A probability floor ``EPS`` is
applied inside every logarithm so that exact zeros, which occur routinely in
deterministic kernels, do not poison downstream sums.
"""

from __future__ import annotations

import numpy as np

from .errors import SupportViolationError

# Floor applied inside logarithms of probabilities.
EPS = 1e-16


def floored_log(x) -> np.ndarray:
    """Elementwise natural log with probabilities floored at ``EPS``."""
    return np.log(np.maximum(np.asarray(x, dtype=float), EPS))


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale a non-negative vector to sum to one."""
    v = np.asarray(v, dtype=float)
    total = v.sum()
    if total <= 0:
        raise ValueError("cannot normalize a vector with non-positive mass")
    return v / total


def softmax(values) -> np.ndarray:
    """sigma(mu)_i = exp(mu_i) / sum_j exp(mu_j), with max-subtraction for stability."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("softmax of an empty input")
    shifted = values - values.max()
    e = np.exp(shifted)
    return e / e.sum()


def entropy(p) -> float:
    """Shannon entropy in nats, with the 0*ln(0) = 0 convention."""
    p = np.asarray(p, dtype=float)
    return float(-np.sum(p * floored_log(p)))


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats; requires support(p) within support(q).

    Zero-probability entries of ``p`` contribute nothing. Mass of ``p`` on
    entries where ``q`` is zero (beyond the floor) raises
    :class:`SupportViolationError` rather than returning an arbitrary large
    number.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    bad = (p > EPS) & (q <= EPS)
    if np.any(bad):
        raise SupportViolationError(
            f"p has mass {p[bad].max():.3g} where q is zero (index {int(np.flatnonzero(bad)[0])})"
        )
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - floored_log(q[mask]))))
