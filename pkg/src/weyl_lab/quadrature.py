"""Shared numerical helpers: Gauss-Legendre tensor rules, vectorized
bisection for monotone slice boundaries, and Monte Carlo estimates."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np


class MonteCarloEstimate(NamedTuple):
    """Monte Carlo value with its standard error."""

    value: float
    stderr: float


@lru_cache(maxsize=32)
def gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


def tensor_nodes(nodes: int, d: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre grid on [-radius, radius]^d.

    Returns points of shape (nodes^d, d) and matching product weights
    (already scaled by radius^d).
    """
    x, w = gauss_legendre(nodes)
    axes = np.meshgrid(*([radius * x] * d), indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=-1)
    wts = np.ones(1)
    for _ in range(d):
        wts = np.multiply.outer(wts, radius * w).ravel()
    return pts, wts


def bisect_increasing(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    iterations: int = 80,
) -> np.ndarray:
    """Vectorized bisection for the sign change of an increasing function.

    Expects f(lo) <= 0 <= f(hi) elementwise; returns the crossing point to
    within (hi - lo) * 2^-iterations.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = f(mid) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)
