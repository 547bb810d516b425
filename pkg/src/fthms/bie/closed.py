from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fthms.bie.linsolve import SolverSettings, linear_solve
from fthms.bie.models import DensitySolution, FrequencyDomainProblem
from fthms.errors import ParameterDomainError
from fthms.geometry.curves import ParametricCurve
from fthms.special.kernels import log_split, wavenumber


def cfie_coupling(kappa: float) -> float:
    """η = sign(κ)·max(1, |κ|); odd in κ so the ±ω systems stay conjugate."""
    return math.copysign(max(1.0, abs(kappa)), kappa)


def kress_weights(half_count: int) -> np.ndarray:
    """R_j(t_i) for the 2n-point trapezoid nodes, as a circulant matrix."""
    n = half_count
    d = np.arange(2 * n)
    m = np.arange(1, n)
    series = np.cos(np.outer(d, m) * math.pi / n) @ (1.0 / m)
    row = -(2.0 * math.pi / n) * series - (math.pi / n**2) * np.cos(d * math.pi)
    index = (d[:, None] - d[None, :]) % (2 * n)
    return row[index]


@dataclass(slots=True)
class ClosedCurveDiscretization:
    """Spectral Nyström discretization of a smooth closed curve on 2n equispaced nodes."""

    curve: ParametricCurve
    half_count: int
    kind: str = field(default="closed", init=False)
    params: np.ndarray = field(init=False)
    points: np.ndarray = field(init=False)
    normals: np.ndarray = field(init=False)
    speeds: np.ndarray = field(init=False)
    _r: np.ndarray = field(init=False, repr=False)
    _log: np.ndarray = field(init=False, repr=False)
    _diag: np.ndarray = field(init=False, repr=False)
    _projection: np.ndarray = field(init=False, repr=False)
    _curvature: np.ndarray = field(init=False, repr=False)
    _kress: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.curve.closed:
            raise ParameterDomainError(f"Curve '{self.curve.name}' is open; use the open-arc discretization")
        if abs(self.curve.length - 2.0 * math.pi) > 1e-12:
            raise ParameterDomainError("Closed-curve Nyström expects a 2π-periodic parameterization")
        if self.half_count < 2:
            raise ParameterDomainError(f"Closed-curve node count must be at least 4, got {2 * self.half_count}")
        n = self.half_count
        self.params = self.curve.interval[0] + math.pi * np.arange(2 * n) / n
        sample = self.curve.evaluate(self.params)
        self.points, self.normals, self.speeds = sample.point, sample.normal, sample.speed
        diff = self.points[:, None, :] - self.points[None, :, :]
        self._r = np.linalg.norm(diff, axis=-1)
        self._diag = np.eye(2 * n, dtype=bool)
        gap = self.params[:, None] - self.params[None, :]
        self._log = np.where(self._diag, 0.0, np.log(4.0 * np.sin(0.5 * np.where(self._diag, 1.0, gap)) ** 2))
        self._projection = np.sum(diff * self.normals[None, :, :], axis=-1)
        self._curvature = np.broadcast_to(self.curve.curvature_numerator(self.params)[:, None], self._r.shape)
        self._kress = kress_weights(n)

    @property
    def size(self) -> int:
        return 2 * self.half_count

    @property
    def trapezoid_weight(self) -> float:
        return math.pi / self.half_count

    def single_layer(self, kappa: float) -> np.ndarray:
        speed_rows = np.broadcast_to(self.speeds[:, None], self._r.shape)
        split = log_split("V", kappa, self._r, self._log, self._diag, speed_rows)
        return (self._kress * split.m1 + self.trapezoid_weight * split.m2) * self.speeds[None, :]

    def double_layer(self, kappa: float) -> np.ndarray:
        speed_rows = np.broadcast_to(self.speeds[:, None], self._r.shape)
        split = log_split(
            "K", kappa, self._r, self._log, self._diag, speed_rows, self._projection, self._curvature
        )
        return (self._kress * split.m1 + self.trapezoid_weight * split.m2) * self.speeds[None, :]

    def cfie(self, kappa: float, eta: float | None = None) -> np.ndarray:
        eta = cfie_coupling(kappa) if eta is None else eta
        return 0.5 * np.eye(self.size) + self.double_layer(kappa) - 1j * eta * self.single_layer(kappa)

    def physical_density(self, values: np.ndarray, weighted: bool = False) -> np.ndarray:
        return np.asarray(values)


def assemble_cfie(disc: ClosedCurveDiscretization, omega: float, c: float, eta: float | None = None) -> np.ndarray:
    return disc.cfie(wavenumber(omega, c), eta)


def solve_cfie(problem: FrequencyDomainProblem, settings: SolverSettings | None = None) -> DensitySolution:
    disc = problem.discretization
    kappa = wavenumber(problem.omega, problem.c)
    eta = cfie_coupling(kappa) if problem.eta is None else problem.eta
    rhs = np.asarray(problem.rhs, dtype=complex)
    if not np.any(rhs):
        return DensitySolution(problem.omega, np.zeros(disc.size, dtype=complex), False, disc, 0, eta)
    result = linear_solve(disc.cfie(kappa, eta), rhs, settings)
    return DensitySolution(problem.omega, result.solution, False, disc, result.iterations, eta)
