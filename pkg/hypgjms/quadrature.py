"""
Quadrature Module
=================

Gauss-Legendre rules, composite panel rules and geometrically graded
breakpoints used by the volume, norm and singular-kernel integrals.

Functions:
    - gauss_legendre: Cached nodes and weights on [-1, 1]
    - gauss_legendre_interval: Rule mapped to [a, b]
    - composite_gauss_legendre: Rule applied panel by panel
    - uniform_breaks: Panel breakpoints of bounded width
    - graded_breaks: Breakpoints refined geometrically toward a point
    - graded_angle_rule: Angular rule on [0, pi] graded toward theta = 0
"""

from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np
from scipy import special

from .validation import DomainError

GRADING = {
    "ratio": 0.5,
    "levels": 12,
    "panel_order": 8,
}


@lru_cache(maxsize=64)
def _legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = special.roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if order < 1:
        raise DomainError(f"quadrature order must be positive, got {order}")
    return _legendre(int(order))


def gauss_legendre_interval(a: float, b: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [a, b]."""
    nodes, weights = gauss_legendre(order)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def composite_gauss_legendre(breaks: Iterable[float], order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Apply an order-``order`` rule on every panel [breaks[i], breaks[i+1]].

    Args:
        breaks: Increasing panel boundaries
        order: Nodes per panel

    Returns:
        (nodes, weights), concatenated over panels
    """
    breaks = np.asarray(list(breaks), dtype=float)
    if breaks.size < 2:
        return np.empty(0), np.empty(0)
    if np.any(np.diff(breaks) <= 0):
        raise DomainError("panel breakpoints must be strictly increasing")
    ref_nodes, ref_weights = gauss_legendre(order)
    half = 0.5 * np.diff(breaks)
    nodes = breaks[:-1, None] + half[:, None] * (ref_nodes[None, :] + 1.0)
    weights = half[:, None] * ref_weights[None, :]
    return nodes.ravel(), weights.ravel()


def uniform_breaks(a: float, b: float, max_width: float) -> np.ndarray:
    """Breakpoints splitting [a, b] into equal panels no wider than max_width."""
    if b <= a:
        raise DomainError(f"empty interval [{a}, {b}]")
    count = max(1, int(np.ceil((b - a) / max_width - 1e-12)))
    return np.linspace(a, b, count + 1)


def graded_breaks(a: float, b: float, center: float, width: float,
                  levels: int = GRADING["levels"], ratio: float = GRADING["ratio"]) -> np.ndarray:
    """
    Breakpoints center +/- width * ratio^j, j = 0..levels-1, clipped to (a, b).

    The center itself is included when it lies inside (a, b).
    """
    offsets = width * ratio ** np.arange(levels)
    pts = np.concatenate([center - offsets, center + offsets, [center]])
    return pts[(pts > a) & (pts < b)]


def merge_breaks(*groups: Iterable[float], min_gap: float = 1e-13) -> np.ndarray:
    """Sort and deduplicate breakpoints, dropping panels thinner than min_gap."""
    pts = np.unique(np.concatenate([np.asarray(list(g), dtype=float) for g in groups]))
    if pts.size < 2:
        return pts
    keep = np.concatenate([[True], np.diff(pts) > min_gap * max(1.0, float(np.abs(pts).max()))])
    return pts[keep]


@lru_cache(maxsize=16)
def _angle_rule(order: int, cut: float, levels: int, panel_order: int) -> Tuple[np.ndarray, np.ndarray]:
    bulk_nodes, bulk_weights = gauss_legendre_interval(cut, np.pi, order)
    edges = cut * GRADING["ratio"] ** np.arange(levels + 1)
    breaks = np.concatenate([[0.0], edges[::-1]])
    fine_nodes, fine_weights = composite_gauss_legendre(breaks, panel_order)
    nodes = np.concatenate([fine_nodes, bulk_nodes])
    weights = np.concatenate([fine_weights, bulk_weights])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def graded_angle_rule(order: int = 48, cut: float = 0.5, levels: int = GRADING["levels"],
                      panel_order: int = GRADING["panel_order"]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadrature on [0, pi]: order-``order`` Gauss-Legendre on [cut, pi] plus
    geometrically shrinking panels [cut 2^-(j+1), cut 2^-j] down to zero.
    """
    if not 0.0 < cut < np.pi:
        raise DomainError(f"angular cut must lie in (0, pi), got {cut}")
    return _angle_rule(int(order), float(cut), int(levels), int(panel_order))
