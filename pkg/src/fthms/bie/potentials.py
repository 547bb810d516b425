from __future__ import annotations

from typing import Protocol

import numpy as np

from fthms.bie.closed import ClosedCurveDiscretization, cfie_coupling
from fthms.bie.models import DensitySolution
from fthms.bie.open_arc import ArcPotential, OpenArcDiscretization
from fthms.errors import ParameterDomainError, SingularEvaluationError
from fthms.geometry.curves import distance_to_curve
from fthms.special.kernels import dphi_factor, phi_of_distance, wavenumber

# Targets closer than this to the curve must use the boundary-trace path.
ON_CURVE_TOL = 1e-9

POTENTIAL_KINDS = ("S", "D", "combined")


class TransferOperator(Protocol):
    def matrix(self, kappa: float) -> np.ndarray: ...


class ClosedPotential:
    """Trapezoid potential from a closed curve's nodes to fixed off-curve targets."""

    def __init__(self, disc: ClosedCurveDiscretization, targets: np.ndarray, kind: str = "combined") -> None:
        if kind not in POTENTIAL_KINDS:
            raise ParameterDomainError(f"Unknown potential kind '{kind}', expected one of {POTENTIAL_KINDS}")
        self.disc = disc
        self.kind = kind
        self.targets = np.atleast_2d(np.asarray(targets, dtype=float))
        if len(self.targets) and np.any(distance_to_curve(disc.curve, self.targets) < ON_CURVE_TOL):
            raise SingularEvaluationError(
                f"Target on curve '{disc.curve.name}'; use the boundary-trace (CFIE) path instead"
            )
        diff = self.targets[:, None, :] - disc.points[None, :, :]
        self._r = np.linalg.norm(diff, axis=-1)
        self._projection = np.sum(diff * disc.normals[None, :, :], axis=-1)
        self._weight = disc.trapezoid_weight * disc.speeds[None, :]

    def matrix(self, kappa: float, eta: float | None = None) -> np.ndarray:
        single = phi_of_distance(kappa, self._r) * self._weight
        if self.kind == "S":
            return single
        double = dphi_factor(kappa, self._r) * self._projection * self._weight
        if self.kind == "D":
            return double
        eta = cfie_coupling(kappa) if eta is None else eta
        return double - 1j * eta * single


def transfer_operator(disc, targets: np.ndarray, kind: str | None = None, target_params=None) -> TransferOperator:
    """Reusable source-to-target operator; geometry is computed once per (disc, targets)."""
    if isinstance(disc, ClosedCurveDiscretization):
        return ClosedPotential(disc, targets, kind or "combined")
    if isinstance(disc, OpenArcDiscretization):
        if kind not in (None, "S"):
            raise ParameterDomainError("Open arcs carry single-layer densities only")
        return ArcPotential(disc, targets, target_params=target_params)
    raise ParameterDomainError(f"Unsupported discretization {type(disc).__name__}")


def eval_potential(kind: str, source: DensitySolution, targets: np.ndarray, c: float = 1.0) -> np.ndarray:
    """U(x, ω) at off-boundary targets from a solved density.

    Closed curves accept S, D and the combined D − iηS (η taken from the solve); open arcs accept S.
    """
    if kind not in POTENTIAL_KINDS:
        raise ParameterDomainError(f"Unknown potential kind '{kind}', expected one of {POTENTIAL_KINDS}")
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    values = np.asarray(source.values)
    if not np.any(values):
        return np.zeros(len(targets), dtype=complex)
    kappa = wavenumber(source.omega, c)
    operator = transfer_operator(source.discretization, targets, kind)
    if isinstance(operator, ClosedPotential):
        eta = source.eta if source.eta else None
        return operator.matrix(kappa, eta) @ values
    return operator.matrix(kappa) @ values
