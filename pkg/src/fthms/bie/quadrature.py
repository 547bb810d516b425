from __future__ import annotations

import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import legendre

from fthms.errors import ParameterDomainError

SELECTORS = ("none", "both", "left", "right")

# Innermost panel width of the graded singular rules (in s units).
GRADED_MIN_WIDTH = 1e-11
GRADED_RATIO = 0.15
BULK_WIDTH = 0.5


@lru_cache(maxsize=None)
def chebyshev_nodes(n: int) -> np.ndarray:
    """First-kind Chebyshev points on (−1, 1), ascending."""
    k = np.arange(n)
    nodes = -np.cos((2 * k + 1) * math.pi / (2 * n))
    nodes.setflags(write=False)
    return nodes


@lru_cache(maxsize=None)
def fejer_weights(n: int) -> np.ndarray:
    """Fejér's first rule on the first-kind Chebyshev points."""
    theta = (2 * np.arange(n) + 1) * math.pi / (2 * n)
    j = np.arange(1, n // 2 + 1)
    series = np.cos(2.0 * np.outer(theta, j)) / (4.0 * j * j - 1.0)
    weights = (2.0 / n) * (1.0 - 2.0 * series.sum(axis=1))
    weights.setflags(write=False)
    return weights


@lru_cache(maxsize=None)
def chebyshev_transform(n: int) -> np.ndarray:
    """Matrix mapping node values to Chebyshev coefficients (discrete orthogonality)."""
    vander = cheb.chebvander(chebyshev_nodes(n), n - 1)
    transform = (2.0 / n) * vander.T
    transform[0] *= 0.5
    transform.setflags(write=False)
    return transform


def interpolation_matrix(n: int, targets: np.ndarray) -> np.ndarray:
    """Rows evaluate the degree n−1 interpolant through the n Chebyshev nodes at ``targets``."""
    return cheb.chebvander(np.asarray(targets, dtype=float), n - 1) @ chebyshev_transform(n)


def chebyshev_coefficients(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    return chebyshev_transform(values.shape[0]) @ values


def tail_mass(values: np.ndarray) -> float:
    """Share of |coefficient| mass carried by the last quartile of Chebyshev modes."""
    coeffs = np.abs(chebyshev_coefficients(values))
    total = float(coeffs.sum())
    if total == 0.0:
        return 0.0
    quartile = max(1, len(coeffs) // 4)
    return float(coeffs[-quartile:].sum()) / total


def cov_theta(s: np.ndarray, selector: str) -> Tuple[np.ndarray, np.ndarray]:
    """Cosine changes of variables of [−1, 1]; θ′ vanishes at flagged endpoints."""
    s = np.asarray(s, dtype=float)
    if selector == "none":
        return s.copy(), np.ones_like(s)
    if selector == "both":
        arg = 0.5 * math.pi * (1.0 - s)
        return np.cos(arg), 0.5 * math.pi * np.sin(arg)
    if selector == "left":
        arg = 0.25 * math.pi * (1.0 + s)
        return 1.0 - 2.0 * np.cos(arg), 0.5 * math.pi * np.sin(arg)
    if selector == "right":
        arg = 0.25 * math.pi * (1.0 - s)
        return 2.0 * np.cos(arg) - 1.0, 0.5 * math.pi * np.sin(arg)
    raise ParameterDomainError(f"Unknown change-of-variables selector '{selector}', expected {SELECTORS}")


def cov_inverse(theta: np.ndarray, selector: str) -> np.ndarray:
    theta = np.clip(np.asarray(theta, dtype=float), -1.0, 1.0)
    if selector == "none":
        return theta.copy()
    if selector == "both":
        return 1.0 - (2.0 / math.pi) * np.arccos(theta)
    if selector == "left":
        return (4.0 / math.pi) * np.arccos(np.clip(0.5 * (1.0 - theta), -1.0, 1.0)) - 1.0
    if selector == "right":
        return 1.0 - (4.0 / math.pi) * np.arccos(np.clip(0.5 * (1.0 + theta), -1.0, 1.0))
    raise ParameterDomainError(f"Unknown change-of-variables selector '{selector}', expected {SELECTORS}")


@lru_cache(maxsize=None)
def _gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return legendre.leggauss(order)


@lru_cache(maxsize=4096)
def graded_offsets(
    length: float,
    fine_order: int = 12,
    bulk_order: int = 16,
    min_width: float = GRADED_MIN_WIDTH,
) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre rule on (0, length), geometrically refined toward 0."""
    if length <= 0.0:
        return np.zeros(0), np.zeros(0)
    breaks = [length]
    while breaks[-1] * GRADED_RATIO > min_width:
        breaks.append(breaks[-1] * GRADED_RATIO)
    breaks.append(0.0)
    breaks = breaks[::-1]
    nodes, weights = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        span = hi - lo
        if span > BULK_WIDTH:
            pieces = int(math.ceil(span / BULK_WIDTH))
            x, w = _gauss_legendre(bulk_order)
            edges = np.linspace(lo, hi, pieces + 1)
        else:
            x, w = _gauss_legendre(fine_order)
            edges = np.array([lo, hi])
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            nodes.append(a + half * (x + 1.0))
            weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def singular_rule(
    s_star: float,
    fine_order: int = 12,
    bulk_order: int = 16,
) -> Tuple[np.ndarray, np.ndarray]:
    """Rule on [−1, 1] graded toward s_star from both sides."""
    s_star = float(np.clip(s_star, -1.0, 1.0))
    parts_s, parts_w = [], []
    left_len = s_star + 1.0
    right_len = 1.0 - s_star
    if left_len > 1e-14:
        u, w = graded_offsets(round(left_len, 15), fine_order, bulk_order)
        parts_s.append(s_star - u)
        parts_w.append(w)
    if right_len > 1e-14:
        u, w = graded_offsets(round(right_len, 15), fine_order, bulk_order)
        parts_s.append(s_star + u)
        parts_w.append(w)
    return np.concatenate(parts_s), np.concatenate(parts_w)
