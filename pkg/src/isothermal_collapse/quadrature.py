"""Composite Gauss-Legendre quadrature on explicit panel edges."""

import logging
from functools import lru_cache

import numpy as np

from . import numerics_config
from .exceptions import QuadratureFailure

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights for every panel, shape (..., panels, order).

    The last axis of edges lists panel boundaries; leading axes are broadcast.
    Zero-length panels contribute nothing.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    lo = edges[..., :-1, None]
    hi = edges[..., 1:, None]
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def composite(f, edges, order: int = numerics_config.GAUSS_ORDER) -> float:
    """Integral of a vectorized f over [edges[0], edges[-1]]."""
    nodes, weights = panel_nodes(np.asarray(edges, dtype=float), order)
    return float(np.sum(f(nodes) * weights))


def bisect_panels(edges: np.ndarray) -> np.ndarray:
    """Insert the midpoint of every panel."""
    edges = np.asarray(edges, dtype=float)
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * edges.size - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def refined(
    f,
    edges,
    tol: float,
    order: int = numerics_config.GAUSS_ORDER,
    max_levels: int = numerics_config.QUAD_MAX_LEVELS,
) -> tuple[float, float]:
    """Bisect all panels until two successive levels agree.

    Returns:
        (value, error) where error is the last level-to-level difference.

    Raises:
        QuadratureFailure: no agreement within max_levels bisections.
    """
    edges = np.asarray(edges, dtype=float)
    previous = composite(f, edges, order)
    error = float("inf")
    for level in range(1, max_levels + 1):
        edges = bisect_panels(edges)
        current = composite(f, edges, order)
        error = abs(current - previous)
        if error <= tol * max(1.0, abs(current)):
            logger.debug(f"quadrature converged at level {level} ({edges.size - 1} panels), error={error:.3e}")
            return current, error
        previous = current
    raise QuadratureFailure(f"no convergence after {max_levels} bisections (last difference {error:.3e})")


def graded_edges(lo: float, hi: float, ratio: float = numerics_config.GRADING_RATIO) -> np.ndarray:
    """Geometric edges from lo > 0 to hi with successive ratio at most `ratio`."""
    if lo <= 0 or hi <= lo:
        return np.array([lo, hi], dtype=float)
    count = max(1, int(np.ceil(np.log(hi / lo) / np.log(ratio))))
    return np.geomspace(lo, hi, count + 1)


def merge_edges(*parts) -> np.ndarray:
    """Sorted union of edge arrays, dropping exact duplicates."""
    return np.unique(np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in parts]))
