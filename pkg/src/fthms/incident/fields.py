from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple

import numpy as np

from fthms.errors import ParameterDomainError, TransformError, UnsupportedVariantError
from fthms.ftransform.grid import FrequencyGrid
from fthms.ftransform.inverse import InverseTransform
from fthms.special.bessel import hankel1

POINT_SOURCE = "point-source"
GAUSSIAN_PLANE = "gaussian-plane"
PULSE_PLANE = "pulse-plane"
MULTI_PULSE = "multi-pulse"
VARIANTS = (POINT_SOURCE, GAUSSIAN_PLANE, PULSE_PLANE, MULTI_PULSE)

_DEFAULT_WIDTH = {POINT_SOURCE: 2.0, GAUSSIAN_PLANE: math.sqrt(2.0)}
_DEFAULT_DELAY = {POINT_SOURCE: 4.0, GAUSSIAN_PLANE: 6.0}
POINT_SOURCE_AMPLITUDE = 2.5j

# Named transform bands for the Gaussian-modulated variants.
BAND_PRESETS = {15.0: (5.0, 25.0), 50.0: (40.0, 60.0)}


@dataclass(slots=True)
class IncidentFieldSpec:
    variant: str
    amplitude: float = 1.0
    source: Tuple[float, float] = (0.0, 0.0)  # z0, point source only
    omega0: float = 15.0
    sigma: float | None = None
    tau0: float | None = None
    direction_angle: float = 0.0  # θ^inc
    t_lag: float = 2.0
    pulses: int = 5
    spacing: float = 10.0
    band: Tuple[float, float] | None = None  # [lo, hi] for transform-based time evaluation
    band_count: int = 501
    direction: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise UnsupportedVariantError(f"Unknown incident variant '{self.variant}', expected one of {VARIANTS}")
        if self.sigma is None:
            self.sigma = _DEFAULT_WIDTH.get(self.variant, 1.0)
        if self.tau0 is None:
            self.tau0 = _DEFAULT_DELAY.get(self.variant, 0.0)
        if self.sigma <= 0.0:
            raise ParameterDomainError(f"Gaussian width σ must be positive, got {self.sigma}")
        if self.pulses < 1 or self.spacing <= 0.0:
            raise ParameterDomainError("Multi-pulse field needs a positive pulse count and spacing")
        if self.band is None and self.variant in (POINT_SOURCE, GAUSSIAN_PLANE):
            self.band = BAND_PRESETS.get(float(self.omega0))
        self.direction = np.array([math.cos(self.direction_angle), math.sin(self.direction_angle)])

    @property
    def has_frequency_form(self) -> bool:
        return self.variant in (POINT_SOURCE, GAUSSIAN_PLANE)

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0


def _points(x: np.ndarray) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


def _envelope(spec: IncidentFieldSpec, omega: float) -> complex:
    return math.exp(-((omega - spec.omega0) ** 2) / spec.sigma**2) * complex(math.cos(omega * spec.tau0), math.sin(omega * spec.tau0))


def eval_freq(spec: IncidentFieldSpec, x: np.ndarray, omega: float) -> np.ndarray:
    """U^i(x, ω) for the Gaussian-modulated variants; negative ω returns the conjugate of U^i(x, |ω|)."""
    if not spec.has_frequency_form:
        raise UnsupportedVariantError(f"Incident variant '{spec.variant}' has no frequency-domain form")
    if omega == 0.0:
        raise ParameterDomainError("ω = 0 is excluded")
    pts = _points(x)
    if omega < 0.0:
        return np.conj(eval_freq(spec, pts, -omega))
    if spec.is_zero:
        return np.zeros(len(pts), dtype=complex)
    factor = spec.amplitude * _envelope(spec, omega)
    if spec.variant == GAUSSIAN_PLANE:
        return factor * np.exp(1j * omega * (pts @ spec.direction))
    r = np.linalg.norm(pts - np.asarray(spec.source, dtype=float), axis=-1)
    if np.any(r == 0.0):
        raise ParameterDomainError("Point-source field is singular at its source z0")
    return POINT_SOURCE_AMPLITUDE * factor * hankel1(0, omega * r)


def pulse_profile(ell: np.ndarray) -> np.ndarray:
    """−sin(4ℓ) e^{−1.6(ℓ − 3)²}."""
    ell = np.asarray(ell, dtype=float)
    return -np.sin(4.0 * ell) * np.exp(-1.6 * (ell - 3.0) ** 2)


def plane_phase(spec: IncidentFieldSpec, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """ℓ(x, t) = t − t_lag − x·d^inc, times along axis 0 and points along axis 1."""
    return np.subtract.outer(np.atleast_1d(np.asarray(t, dtype=float)), spec.t_lag + _points(x) @ spec.direction)


def gaussian_plane_time_exact(spec: IncidentFieldSpec, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Closed-form time signal of the Gaussian plane wave: (σ/√π) e^{−σ²ℓ′²/4} cos(ω0 ℓ′)."""
    if spec.variant != GAUSSIAN_PLANE:
        raise UnsupportedVariantError("Exact time form is available for the Gaussian plane wave only")
    shifted = np.subtract.outer(np.atleast_1d(np.asarray(t, dtype=float)), spec.tau0 + _points(x) @ spec.direction)
    envelope = (spec.sigma / math.sqrt(math.pi)) * np.exp(-0.25 * spec.sigma**2 * shifted**2)
    return spec.amplitude * envelope * np.cos(spec.omega0 * shifted)


@lru_cache(maxsize=16)
def band_grid(lo: float, hi: float, count: int) -> FrequencyGrid:
    return FrequencyGrid(cutoff=lo, bandwidth=hi, count=count, low_frequency=False)


def eval_time(spec: IncidentFieldSpec, x: np.ndarray, t: np.ndarray | float) -> np.ndarray:
    """u^i(x, t), times along axis 0 and points along axis 1."""
    pts = _points(x)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if spec.is_zero:
        return np.zeros((len(times), len(pts)))
    if spec.variant == PULSE_PLANE:
        return spec.amplitude * pulse_profile(plane_phase(spec, pts, times))
    if spec.variant == MULTI_PULSE:
        total = np.zeros((len(times), len(pts)))
        for j in range(spec.pulses):
            total += pulse_profile(plane_phase(spec, pts, times - spec.spacing * j))
        return spec.amplitude * total
    if spec.band is None:
        raise TransformError(f"No transform band configured for '{spec.variant}' at ω0 = {spec.omega0}")
    grid = band_grid(float(spec.band[0]), float(spec.band[1]), int(spec.band_count))
    spectrum = np.stack([eval_freq(spec, pts, float(w)) for w in grid.nodes])
    return InverseTransform(grid, times).apply(spectrum)


def boundary_trace(
    spec: IncidentFieldSpec,
    points: np.ndarray,
    times: np.ndarray | None = None,
    omegas: np.ndarray | None = None,
) -> np.ndarray:
    """u^i samples at boundary nodes, in time (times × nodes) or frequency (ω × nodes)."""
    if (times is None) == (omegas is None):
        raise ParameterDomainError("boundary_trace needs exactly one of times or omegas")
    pts = _points(points)
    if times is not None:
        return eval_time(spec, pts, times)
    return np.stack([eval_freq(spec, pts, float(w)) for w in np.atleast_1d(omegas)])
