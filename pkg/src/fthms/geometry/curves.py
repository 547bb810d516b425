from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from fthms.errors import ParameterDomainError

CurveMap = Callable[[np.ndarray], np.ndarray]

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True, slots=True)
class CurveSample:
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    speed: np.ndarray


@dataclass(frozen=True, slots=True)
class ParametricCurve:
    """Smooth closed curve or open arc x(θ) with first and second derivatives.

    Maps take an array of parameters and return an array with a trailing axis of
    length 2. Closed curves are periodic over ``interval``; parameters outside it
    are still accepted by the raw maps so patches may straddle the seam.
    """

    name: str
    kind: str  # closed | open
    position: CurveMap
    first_derivative: CurveMap
    second_derivative: CurveMap
    interval: tuple[float, float]

    @property
    def closed(self) -> bool:
        return self.kind == "closed"

    @property
    def length(self) -> float:
        return float(self.interval[1] - self.interval[0])

    def speed(self, theta: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.first_derivative(np.asarray(theta, dtype=float)), axis=-1)

    def normal(self, theta: np.ndarray) -> np.ndarray:
        d1 = self.first_derivative(np.asarray(theta, dtype=float))
        speed = np.linalg.norm(d1, axis=-1, keepdims=True)
        # (x2', -x1') is outward for counter-clockwise curves.
        return np.stack([d1[..., 1], -d1[..., 0]], axis=-1) / speed

    def evaluate(self, theta: np.ndarray) -> CurveSample:
        theta = np.asarray(theta, dtype=float)
        d1 = self.first_derivative(theta)
        speed = np.linalg.norm(d1, axis=-1)
        tangent = d1 / speed[..., None]
        normal = np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)
        return CurveSample(point=self.position(theta), tangent=tangent, normal=normal, speed=speed)

    def curvature_numerator(self, theta: np.ndarray) -> np.ndarray:
        """x2'·x1'' − x1'·x2'', the signed term of the double-layer diagonal."""
        d1 = self.first_derivative(np.asarray(theta, dtype=float))
        d2 = self.second_derivative(np.asarray(theta, dtype=float))
        return d1[..., 1] * d2[..., 0] - d1[..., 0] * d2[..., 1]

    def wrap(self, theta: np.ndarray) -> np.ndarray:
        lo, hi = self.interval
        if not self.closed:
            return np.asarray(theta, dtype=float)
        return lo + np.mod(np.asarray(theta, dtype=float) - lo, hi - lo)

    def restrict(self, start: float, end: float, name: str | None = None) -> "ParametricCurve":
        if end <= start:
            raise ParameterDomainError(f"Arc restriction needs start < end, got [{start}, {end}]")
        if not self.closed:
            lo, hi = self.interval
            if start < lo - _DOMAIN_SLACK or end > hi + _DOMAIN_SLACK:
                raise ParameterDomainError(
                    f"Arc restriction [{start}, {end}] leaves parent interval [{lo}, {hi}]"
                )
        elif end - start >= self.length:
            raise ParameterDomainError("Arc restriction must leave a gap on a closed curve")
        return ParametricCurve(
            name=name or f"{self.name}[{start:.4g},{end:.4g}]",
            kind="open",
            position=self.position,
            first_derivative=self.first_derivative,
            second_derivative=self.second_derivative,
            interval=(float(start), float(end)),
        )

    def transformed(
        self,
        center: tuple[float, float] = (0.0, 0.0),
        scale: float = 1.0,
        rotation: float = 0.0,
    ) -> "ParametricCurve":
        if scale <= 0.0:
            raise ParameterDomainError(f"Curve scale must be positive, got {scale}")
        cos_r, sin_r = np.cos(rotation), np.sin(rotation)
        rot = scale * np.array([[cos_r, -sin_r], [sin_r, cos_r]])
        shift = np.asarray(center, dtype=float)
        pos, d1, d2 = self.position, self.first_derivative, self.second_derivative

        def position(theta: np.ndarray) -> np.ndarray:
            return pos(theta) @ rot.T + shift

        def first(theta: np.ndarray) -> np.ndarray:
            return d1(theta) @ rot.T

        def second(theta: np.ndarray) -> np.ndarray:
            return d2(theta) @ rot.T

        return ParametricCurve(
            name=self.name,
            kind=self.kind,
            position=position,
            first_derivative=first,
            second_derivative=second,
            interval=self.interval,
        )

    def sample(self, count: int, start: float | None = None, end: float | None = None) -> np.ndarray:
        lo = self.interval[0] if start is None else start
        hi = self.interval[1] if end is None else end
        return np.linspace(lo, hi, count)


def eval_curve(curve: ParametricCurve, theta: float | np.ndarray) -> CurveSample:
    values = np.asarray(theta, dtype=float)
    lo, hi = curve.interval
    if np.any(values < lo - _DOMAIN_SLACK) or np.any(values > hi + _DOMAIN_SLACK):
        raise ParameterDomainError(
            f"Parameter outside [{lo}, {hi}] for curve '{curve.name}': "
            f"min={float(values.min()):.6g} max={float(values.max()):.6g}"
        )
    return curve.evaluate(values)


def point_in_curve(curve: ParametricCurve, points: np.ndarray, samples: int = 4096) -> np.ndarray:
    """Winding-number test against a dense polygonal sampling of a closed curve."""
    if not curve.closed:
        raise ParameterDomainError(f"Curve '{curve.name}' is open; interior is undefined")
    theta = np.linspace(curve.interval[0], curve.interval[1], samples, endpoint=False)
    poly = curve.position(theta)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rel = poly[None, :, :] - pts[:, None, :]
    angles = np.arctan2(rel[..., 1], rel[..., 0])
    turns = np.diff(np.concatenate([angles, angles[:, :1]], axis=1), axis=1)
    turns = (turns + np.pi) % (2.0 * np.pi) - np.pi
    winding = np.abs(turns.sum(axis=1)) / (2.0 * np.pi)
    return winding > 0.5


def distance_to_curve(curve: ParametricCurve, points: np.ndarray, samples: int = 4096) -> np.ndarray:
    theta = np.linspace(curve.interval[0], curve.interval[1], samples, endpoint=not curve.closed)
    poly = curve.position(theta)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    distance, _ = cKDTree(poly).query(pts)
    return distance
