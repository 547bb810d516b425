from __future__ import annotations

import math
from typing import Any, Callable, Dict, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.interpolate import CubicSpline

from fthms.errors import ParameterDomainError
from fthms.geometry.curves import ParametricCurve

TWO_PI = 2.0 * math.pi

# Multiplier cut-off for smoothed Fourier curves.
_SMOOTHING_FLOOR = 1e-17

H_SHAPE_VERTICES = (
    (-1.5, -1.5), (-0.5, -1.5), (-0.5, -0.5), (0.5, -0.5), (0.5, -1.5), (1.5, -1.5),
    (1.5, 1.5), (0.5, 1.5), (0.5, 0.5), (-0.5, 0.5), (-0.5, 1.5), (-1.5, 1.5),
)

# Starts at the bottom centre so restricting away from θ=0 opens the base.
ROCKET_VERTICES = (
    (0.0, -1.5), (0.5, -1.5), (1.0, -2.0), (1.0, -1.0), (0.5, -0.5), (0.5, 2.0),
    (0.0, 3.0), (-0.5, 2.0), (-0.5, -0.5), (-1.0, -1.0), (-1.0, -2.0), (-0.5, -1.5),
)


def circle(radius: float = 1.0) -> ParametricCurve:
    if radius <= 0.0:
        raise ParameterDomainError(f"Circle radius must be positive, got {radius}")
    return ellipse(radius, radius, name="circle")


def ellipse(semi_x: float = 1.0, semi_y: float = 0.5, name: str = "ellipse") -> ParametricCurve:
    if semi_x <= 0.0 or semi_y <= 0.0:
        raise ParameterDomainError(f"Ellipse semi-axes must be positive, got ({semi_x}, {semi_y})")

    def position(t: np.ndarray) -> np.ndarray:
        return np.stack([semi_x * np.cos(t), semi_y * np.sin(t)], axis=-1)

    def first(t: np.ndarray) -> np.ndarray:
        return np.stack([-semi_x * np.sin(t), semi_y * np.cos(t)], axis=-1)

    def second(t: np.ndarray) -> np.ndarray:
        return np.stack([-semi_x * np.cos(t), -semi_y * np.sin(t)], axis=-1)

    return ParametricCurve(name, "closed", position, first, second, (0.0, TWO_PI))


def kite() -> ParametricCurve:
    def position(t: np.ndarray) -> np.ndarray:
        return np.stack([np.cos(t) + 0.65 * np.cos(2 * t) - 0.65, 1.5 * np.sin(t)], axis=-1)

    def first(t: np.ndarray) -> np.ndarray:
        return np.stack([-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t)], axis=-1)

    def second(t: np.ndarray) -> np.ndarray:
        return np.stack([-np.cos(t) - 2.6 * np.cos(2 * t), -1.5 * np.sin(t)], axis=-1)

    return ParametricCurve("kite", "closed", position, first, second, (0.0, TWO_PI))


def segment(
    start: Sequence[float] = (-1.0, 0.0),
    end: Sequence[float] = (1.0, 0.0),
) -> ParametricCurve:
    """Straight arc on θ ∈ [−1, 1]."""
    p0 = np.asarray(start, dtype=float)
    half = 0.5 * (np.asarray(end, dtype=float) - p0)
    if not np.any(half):
        raise ParameterDomainError("Segment endpoints coincide")
    mid = p0 + half

    def position(t: np.ndarray) -> np.ndarray:
        return mid + np.asarray(t, dtype=float)[..., None] * half

    def first(t: np.ndarray) -> np.ndarray:
        return np.broadcast_to(half, np.shape(t) + (2,)).copy()

    def second(t: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(t) + (2,))

    return ParametricCurve("segment", "open", position, first, second, (-1.0, 1.0))


def circular_arc(radius: float = 1.0, start: float = 0.0, end: float = math.pi) -> ParametricCurve:
    return circle(radius).restrict(start, end, name="circular_arc")


def circular_cavity(
    radius: float = 1.0,
    start: float = 0.02 * math.pi,
    end: float = 1.98 * math.pi,
) -> ParametricCurve:
    return circle(radius).restrict(start, end, name="circular_cavity")


def fourier_curve(coefficients: np.ndarray, modes: np.ndarray, name: str) -> ParametricCurve:
    """Closed curve z(θ) = Σ c_k e^{ikθ} with z = x + iy."""
    coeffs = np.asarray(coefficients, dtype=complex)
    k = np.asarray(modes, dtype=float)

    def _series(t: np.ndarray, factor: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        z = np.exp(1j * t[..., None] * k) @ (factor * coeffs)
        return np.stack([z.real, z.imag], axis=-1)

    def position(t: np.ndarray) -> np.ndarray:
        return _series(t, np.ones_like(k))

    def first(t: np.ndarray) -> np.ndarray:
        return _series(t, 1j * k)

    def second(t: np.ndarray) -> np.ndarray:
        return _series(t, -(k * k))

    return ParametricCurve(name, "closed", position, first, second, (0.0, TWO_PI))


def smoothed_polygon(
    vertices: Sequence[Sequence[float]],
    smoothing: float = 0.08,
    name: str = "polygon",
    resolution: int = 4096,
) -> ParametricCurve:
    """Polygon with rounded corners: arc-length sampling filtered by a Gaussian in Fourier space.

    ``smoothing`` is the Gaussian width in length units; vertices must be counter-clockwise.
    """
    if smoothing <= 0.0:
        raise ParameterDomainError(f"Polygon smoothing must be positive, got {smoothing}")
    verts = np.asarray(vertices, dtype=float)
    closed = np.vstack([verts, verts[:1]])
    edges = np.diff(closed, axis=0)
    lengths = np.linalg.norm(edges, axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
    perimeter = float(cumulative[-1])
    s = np.linspace(0.0, perimeter, resolution, endpoint=False)
    x = np.interp(s, cumulative, closed[:, 0])
    y = np.interp(s, cumulative, closed[:, 1])
    spectrum = np.fft.fft(x + 1j * y) / resolution
    modes = np.fft.fftfreq(resolution, d=1.0 / resolution)
    width = TWO_PI * smoothing / perimeter
    multiplier = np.exp(-0.5 * (modes * width) ** 2)
    keep = multiplier > _SMOOTHING_FLOOR
    return fourier_curve(spectrum[keep] * multiplier[keep], modes[keep], name)


def rounded_h(smoothing: float = 0.08) -> ParametricCurve:
    return smoothed_polygon(H_SHAPE_VERTICES, smoothing=smoothing, name="rounded_h")


def rocket(smoothing: float = 0.06) -> ParametricCurve:
    return smoothed_polygon(ROCKET_VERTICES, smoothing=smoothing, name="rocket")


def rocket_cavity(smoothing: float = 0.06, gap: float = 0.12) -> ParametricCurve:
    if not 0.0 < gap < math.pi:
        raise ParameterDomainError(f"Rocket cavity gap must lie in (0, π), got {gap}")
    return rocket(smoothing).restrict(gap, TWO_PI - gap, name="rocket_cavity")


def trig_points(points: Sequence[Sequence[float]]) -> ParametricCurve:
    """Periodic trigonometric interpolant through a counter-clockwise closed point list."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 5:
        raise ParameterDomainError(f"Trigonometric interpolation needs at least 5 points, got {n}")
    spectrum = np.fft.fft(pts[:, 0] + 1j * pts[:, 1]) / n
    modes = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        # Split the Nyquist mode evenly so the interpolant stays real-symmetric.
        nyquist = n // 2
        spectrum = np.concatenate([spectrum, [0.5 * spectrum[nyquist]]])
        spectrum[nyquist] *= 0.5
        modes = np.concatenate([modes, [float(nyquist)]])
    return fourier_curve(spectrum, modes, "trig_points")


def chebyshev_points(points: Sequence[Sequence[float]], degree: int | None = None) -> ParametricCurve:
    """Chebyshev fit of an ordered open point list, parameterized by normalized chord length."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 3:
        raise ParameterDomainError(f"Chebyshev arc needs at least 3 points, got {n}")
    chords = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    s = 2.0 * chords / chords[-1] - 1.0
    deg = min(n - 1, 48) if degree is None else degree
    fits = [Chebyshev.fit(s, pts[:, axis], deg, domain=[-1.0, 1.0]) for axis in (0, 1)]
    firsts = [fit.deriv() for fit in fits]
    seconds = [fit.deriv(2) for fit in fits]

    def position(t: np.ndarray) -> np.ndarray:
        return np.stack([fits[0](t), fits[1](t)], axis=-1)

    def first(t: np.ndarray) -> np.ndarray:
        return np.stack([firsts[0](t), firsts[1](t)], axis=-1)

    def second(t: np.ndarray) -> np.ndarray:
        return np.stack([seconds[0](t), seconds[1](t)], axis=-1)

    return ParametricCurve("chebyshev_points", "open", position, first, second, (-1.0, 1.0))


def spline_points(points: Sequence[Sequence[float]], closed: bool = True) -> ParametricCurve:
    """Cubic spline through points; periodic on [0, 2π) when closed, chord-parameterized on [−1, 1] otherwise."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 4:
        raise ParameterDomainError(f"Spline curve needs at least 4 points, got {len(pts)}")
    if closed:
        knots = np.linspace(0.0, TWO_PI, len(pts) + 1)
        spline = CubicSpline(knots, np.vstack([pts, pts[:1]]), bc_type="periodic", axis=0)
        interval = (0.0, TWO_PI)
    else:
        chords = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        spline = CubicSpline(2.0 * chords / chords[-1] - 1.0, pts, axis=0)
        interval = (-1.0, 1.0)
    d1, d2 = spline.derivative(1), spline.derivative(2)
    if closed:
        # Periodic extension for parameters past the seam.
        def wrap(t: np.ndarray) -> np.ndarray:
            return np.mod(np.asarray(t, dtype=float), TWO_PI)
    else:
        def wrap(t: np.ndarray) -> np.ndarray:
            return np.asarray(t, dtype=float)

    return ParametricCurve(
        "spline_points",
        "closed" if closed else "open",
        lambda t: spline(wrap(t)),
        lambda t: d1(wrap(t)),
        lambda t: d2(wrap(t)),
        interval,
    )


CURVE_BUILDERS: Dict[str, Callable[..., ParametricCurve]] = {
    "circle": circle,
    "ellipse": ellipse,
    "kite": kite,
    "segment": segment,
    "circular_arc": circular_arc,
    "circular_cavity": circular_cavity,
    "rounded_h": rounded_h,
    "rocket": rocket,
    "rocket_cavity": rocket_cavity,
    "trig_points": trig_points,
    "chebyshev_points": chebyshev_points,
    "spline_points": spline_points,
}


def build_curve(name: str, params: Dict[str, Any] | None = None) -> ParametricCurve:
    params = dict(params or {})
    builder = CURVE_BUILDERS.get(name)
    if builder is None:
        raise ParameterDomainError(
            f"Unknown curve '{name}'. Available: {', '.join(sorted(CURVE_BUILDERS))}"
        )
    center = tuple(params.pop("center", (0.0, 0.0)))
    scale = float(params.pop("scale", 1.0))
    rotation = float(params.pop("rotation", 0.0))
    try:
        curve = builder(**params)
    except TypeError as exc:
        raise ParameterDomainError(f"Bad parameters for curve '{name}': {exc}") from exc
    if center == (0.0, 0.0) and scale == 1.0 and rotation == 0.0:
        return curve
    return curve.transformed(center=center, scale=scale, rotation=rotation)
