from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import legendre

from fthms.bie.quadrature import chebyshev_transform
from fthms.errors import TransformError
from fthms.ftransform.grid import FrequencyGrid, GradedCell, inner_cell_rule

_GAUSS_EXTRA = 32


@lru_cache(maxsize=None)
def _gauss_vander(order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, w = legendre.leggauss(order + _GAUSS_EXTRA)
    return x, w, cheb.chebvander(x, order - 1)


def chebyshev_moments(order: int, beta: float) -> np.ndarray:
    """M_k = ∫_{−1}^{1} T_k(ξ) e^{iβξ} dξ for k < order.

    Gauss–Legendre for |β| < order; above that the upward recurrence
    M_{k+1} = (B_{k+1} − (k+1)[2M_k + (B_{k−1} − iβM_{k−1})/(k−1)])/(iβ),
    B_k = e^{iβ} − (−1)^k e^{−iβ}, is stable.
    """
    if beta == 0.0:
        k = np.arange(order)
        even = k % 2 == 0
        out = np.zeros(order, dtype=complex)
        out[even] = 2.0 / (1.0 - k[even] ** 2)
        return out
    if beta < 0.0:
        return np.conj(chebyshev_moments(order, -beta))
    if beta < order:
        x, w, vander = _gauss_vander(order)
        return (w * np.exp(1j * beta * x)) @ vander
    ib = 1j * beta
    plus, minus = np.exp(ib), np.exp(-ib)

    def boundary(k: int) -> complex:
        return plus - (-1) ** k * minus

    out = np.zeros(max(order, 3), dtype=complex)
    out[0] = 2.0 * np.sin(beta) / beta
    out[1] = (boundary(1) - out[0]) / ib
    out[2] = (boundary(2) - 4.0 * out[1]) / ib
    for k in range(2, order - 1):
        out[k + 1] = (
            boundary(k + 1) - (k + 1) * (2.0 * out[k] + (boundary(k - 1) - ib * out[k - 1]) / (k - 1))
        ) / ib
    return out[:order]


def filon_cell_weights(cell: GradedCell, order: int, t: float) -> np.ndarray:
    """Weights on the cell's Chebyshev nodes for ∫ G(ω) e^{−iωt} dω."""
    moments = chebyshev_moments(order, -cell.half * t)
    return cell.half * np.exp(-1j * cell.mid * t) * (moments @ chebyshev_transform(order))


def graded_weights(grid: FrequencyGrid, times: np.ndarray | float) -> np.ndarray:
    """Rows t, columns graded nodes: the FCC rule for ∫_0^{w_c} G e^{−iωt} dω."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros((len(times), len(grid.graded_nodes)), dtype=complex)
    order = grid.cc_order
    for c, cell in enumerate(grid.cells):
        cols = slice(c * order, (c + 1) * order)
        if cell.inner:
            nodes, weights = inner_cell_rule(cell, order)
            out[:, cols] = weights[None, :] * np.exp(-1j * np.outer(times, nodes))
            continue
        for i, t in enumerate(times):
            out[i, cols] = filon_cell_weights(cell, order, float(t))
    return out


def fcc_graded_integral(values: np.ndarray, grid: FrequencyGrid, t: np.ndarray | float) -> np.ndarray:
    """I_0^{w_c}[G](t) from G sampled on the graded nodes."""
    values = np.asarray(values)
    if values.shape[0] != len(grid.graded_nodes):
        raise TransformError(
            f"Graded rule expects {len(grid.graded_nodes)} samples, got {values.shape[0]}"
        )
    result = graded_weights(grid, t) @ values
    return result[0] if np.ndim(t) == 0 else result
