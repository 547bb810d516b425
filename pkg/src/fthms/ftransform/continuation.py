"""Fourier continuation of equispaced band samples (FC-Gram).

The samples on [a, b] are first refined ``REFINEMENT`` times with 25-point Lagrange
stencils. The refined sequence is then closed into a periodic one: at each end the
last ``matching_points`` values are projected onto Gram polynomials of degree
``GRAM_DEGREE``, those polynomials are carried into a gap of ``GAP_POINTS`` nodes and
blended into each other with an erfc step. The trigonometric interpolant of the
periodic sequence matches every sample and is integrated against e^{−iωt} term by term.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre
from scipy.linalg import qr, solve_triangular
from scipy.special import comb, erfc

from fthms.errors import TransformError

MATCHING_POINTS = 25
GRAM_DEGREE = 16
REFINEMENT = 4
GAP_POINTS = 52
BLEND_SIGMAS = 8.0  # half gap in blend standard deviations
TIME_CHUNK = 256


def refinement_matrix(count: int, matching_points: int = MATCHING_POINTS, factor: int = REFINEMENT) -> np.ndarray:
    """Values at (count − 1)·factor + 1 nodes from count equispaced samples.

    Original nodes are copied; every new node uses the matching_points-point stencil
    centred on its interval, shifted inwards near the ends.
    """
    fine = (count - 1) * factor + 1
    matrix = np.zeros((fine, count))
    positions = np.arange(fine) / factor
    exact = np.arange(0, fine, factor)
    matrix[exact, np.arange(count)] = 1.0

    rows = np.setdiff1d(np.arange(fine), exact)
    x = positions[rows]
    first = np.clip(np.floor(x).astype(int) - matching_points // 2 + 1, 0, count - matching_points)
    offsets = np.arange(matching_points)
    nodes = first[:, None] + offsets[None, :]
    weights = (-1.0) ** offsets * comb(matching_points - 1, offsets)
    terms = weights[None, :] / (x[:, None] - nodes)
    terms /= terms.sum(axis=1, keepdims=True)
    block = matrix[rows]
    np.put_along_axis(block, nodes, terms, axis=1)
    matrix[rows] = block
    return matrix


def gram_extension(matching_points: int, degree: int, steps: np.ndarray) -> np.ndarray:
    """Least-squares Gram polynomial through matching_points unit-spaced values, read `steps` nodes past the last one."""
    if degree >= matching_points:
        raise TransformError(f"Gram degree {degree} needs more than {matching_points} matching points")
    span = matching_points - 1
    z = 2.0 * np.arange(matching_points) / span - 1.0
    q, r = qr(legendre.legvander(z, degree), mode="economic")
    outside = 1.0 + 2.0 * np.asarray(steps, dtype=float) / span
    return legendre.legvander(outside, degree) @ solve_triangular(r, q.T)


def gap_blend(gap: int) -> np.ndarray:
    """Weight of the right-end continuation across the gap; the left end takes one minus it."""
    sigma = gap / (2.0 * BLEND_SIGMAS)
    j = np.arange(gap)
    return 0.5 * erfc((j - 0.5 * (gap - 1)) / (np.sqrt(2.0) * sigma))


def periodic_extension(fine: int, matching_points: int = MATCHING_POINTS) -> np.ndarray:
    """(fine + gap) × fine map from refined samples to one period of the closed sequence; the period length is odd."""
    gap = GAP_POINTS + (fine + GAP_POINTS + 1) % 2
    blend = gap_blend(gap)
    steps = np.arange(1, gap + 1)
    degree = min(GRAM_DEGREE, matching_points - 2)
    right = gram_extension(matching_points, degree, steps)
    # the left end read backwards is the same stencil mirrored
    left = gram_extension(matching_points, degree, gap + 1 - steps)[:, ::-1]
    matrix = np.zeros((fine + gap, fine))
    matrix[:fine] = np.eye(fine)
    matrix[fine:, fine - matching_points :] = blend[:, None] * right
    matrix[fine:, :matching_points] += (1.0 - blend)[:, None] * left
    return matrix


@lru_cache(maxsize=16)
def continuation_operator(count: int, matching_points: int = MATCHING_POINTS) -> np.ndarray:
    """Map from count samples to trigonometric coefficients, modes −K..K in order."""
    fine = (count - 1) * REFINEMENT + 1
    sequence = periodic_extension(fine, matching_points) @ refinement_matrix(count, matching_points)
    coefficients = np.fft.fftshift(np.fft.fft(sequence, axis=0), axes=0) / sequence.shape[0]
    coefficients.setflags(write=False)
    return coefficients


def continuation_period(start: float, end: float, count: int, mode_count: int) -> float:
    fine_step = (end - start) / ((count - 1) * REFINEMENT)
    return mode_count * fine_step


@dataclass(frozen=True, slots=True)
class FourierContinuation:
    """Trigonometric polynomial of period `period` that matches samples on [a, b]."""

    start: float
    end: float
    period: float
    coefficients: np.ndarray

    @property
    def length(self) -> float:
        return self.end - self.start

    @property
    def modes(self) -> np.ndarray:
        half = (len(self.coefficients) - 1) // 2
        return np.arange(-half, half + 1)

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phase = np.exp(2j * np.pi * np.multiply.outer((x - self.start) / self.period, self.modes))
        return phase @ self.coefficients

    def oscillatory_integral(self, t: np.ndarray | float) -> np.ndarray:
        """∫_a^b P(ω) e^{−iωt} dω, exact term by term."""
        return continuation_integrals(self.start, self.end, self.period, len(self.modes), t) @ self.coefficients


def continuation_integrals(
    start: float, end: float, period: float, mode_count: int, t: np.ndarray | float
) -> np.ndarray:
    """Rows t, columns k: ∫_a^b e^{2πik(ω−a)/Λ} e^{−iωt} dω."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    half = (mode_count - 1) // 2
    modes = np.arange(-half, half + 1)
    length = end - start
    beta = 2.0 * np.pi * modes[None, :] / period - t[:, None]
    return (
        np.exp(-1j * start * t)[:, None]
        * length
        * np.exp(0.5j * beta * length)
        * np.sinc(0.5 * beta * length / np.pi)
    )


def _check_samples(count: int, start: float, end: float, matching_points: int) -> None:
    if count < 2 * matching_points:
        raise TransformError(
            f"Fourier continuation needs at least {2 * matching_points} samples, got {count}"
        )
    if not end > start:
        raise TransformError(f"Continuation interval needs a < b, got [{start}, {end}]")


def fourier_continuation(
    samples: np.ndarray, start: float, end: float, matching_points: int = MATCHING_POINTS
) -> FourierContinuation:
    samples = np.asarray(samples)
    count = samples.shape[0]
    _check_samples(count, start, end, matching_points)
    operator = continuation_operator(count, matching_points)
    period = continuation_period(start, end, count, operator.shape[0])
    return FourierContinuation(start, end, period, operator @ samples)


def band_weights(
    start: float, end: float, count: int, t: np.ndarray | float, matching_points: int = MATCHING_POINTS
) -> np.ndarray:
    """Rows of ∫_a^b G e^{−iωt} dω acting directly on the equispaced samples of G."""
    _check_samples(count, start, end, matching_points)
    operator = continuation_operator(count, matching_points)
    period = continuation_period(start, end, count, operator.shape[0])
    t = np.atleast_1d(np.asarray(t, dtype=float))
    weights = np.empty((len(t), count), dtype=complex)
    for first in range(0, len(t), TIME_CHUNK):
        chunk = slice(first, first + TIME_CHUNK)
        weights[chunk] = continuation_integrals(start, end, period, operator.shape[0], t[chunk]) @ operator
    return weights
