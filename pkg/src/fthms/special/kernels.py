from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from fthms.errors import ParameterDomainError, SingularEvaluationError

EULER_GAMMA = float(np.euler_gamma)


def wavenumber(omega: float, c: float) -> float:
    if omega == 0.0:
        raise ParameterDomainError("ω = 0 is excluded from every frequency grid")
    if c <= 0.0:
        raise ParameterDomainError(f"Wave speed must be positive, got {c}")
    return omega / c


def phi_of_distance(kappa: float, r: np.ndarray) -> np.ndarray:
    """(i/4) H0(|κ| r), conjugated for κ < 0. ``r`` must be positive."""
    z = abs(kappa) * np.asarray(r, dtype=float)
    value = 0.25j * (sp.j0(z) + 1j * sp.y0(z))
    return value if kappa > 0 else np.conj(value)


def dphi_factor(kappa: float, r: np.ndarray) -> np.ndarray:
    """(iκ/4) H1(|κ| r)/r, so that ∂_{ν_y}Φ = factor · (x − y)·ν_y."""
    k = abs(kappa)
    z = k * np.asarray(r, dtype=float)
    value = 0.25j * k * (sp.j1(z) + 1j * sp.y1(z)) / np.asarray(r, dtype=float)
    return value if kappa > 0 else np.conj(value)


def kernel_phi(omega: float, c: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    kappa = wavenumber(omega, c)
    r = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), axis=-1)
    if np.any(r == 0.0):
        raise SingularEvaluationError("Φ_ω(x, y) is singular at x = y")
    return phi_of_distance(kappa, r)


def kernel_normal_derivative(
    omega: float, c: float, x: np.ndarray, y: np.ndarray, normal_y: np.ndarray
) -> np.ndarray:
    kappa = wavenumber(omega, c)
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(diff, axis=-1)
    if np.any(r == 0.0):
        raise SingularEvaluationError("∂_ν Φ_ω(x, y) is singular at x = y")
    projection = np.sum(diff * np.asarray(normal_y, dtype=float), axis=-1)
    return dphi_factor(kappa, r) * projection


@dataclass(frozen=True, slots=True)
class KernelSplit:
    """Kernel = M1·ln(4 sin²((θ−τ)/2)) + M2 on a closed parameterization."""

    m1: np.ndarray
    m2: np.ndarray

    def reassemble(self, theta: np.ndarray, tau: np.ndarray) -> np.ndarray:
        return self.m1 * periodic_log(theta, tau) + self.m2


def periodic_log(theta: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return np.log(4.0 * np.sin(0.5 * (np.asarray(theta) - np.asarray(tau))) ** 2)


def log_split(
    operator: str,
    kappa: float,
    r: np.ndarray,
    log_term: np.ndarray,
    diag: np.ndarray,
    speed: np.ndarray,
    projection: np.ndarray | None = None,
    curvature: np.ndarray | None = None,
) -> KernelSplit:
    """Split from precomputed geometry: r, ln(4 sin²((θ−τ)/2)), diagonal mask, target speed.

    For K, ``projection`` is (x − y)·ν_y and ``curvature`` the target's x2'x1'' − x1'x2''.
    """
    k = abs(kappa)
    safe_r = np.where(diag, 1.0, r)
    if operator == "V":
        m1 = -sp.j0(k * r) / (4.0 * math.pi) + 0j
        m2 = phi_of_distance(k, safe_r) - m1 * log_term
        m2_diag = 0.25j - (np.log(0.5 * k * speed) + EULER_GAMMA) / (2.0 * math.pi)
        m2 = np.where(diag, m2_diag, m2)
    elif operator == "K":
        if projection is None or curvature is None:
            raise ParameterDomainError("K split needs the normal projection and curvature terms")
        m1 = -k * projection * sp.j1(k * safe_r) / (4.0 * math.pi * safe_r) + 0j
        m2 = dphi_factor(k, safe_r) * projection - m1 * log_term
        m1 = np.where(diag, 0.0j, m1)
        m2 = np.where(diag, curvature / (4.0 * math.pi * speed**3) + 0j, m2)
    else:
        raise ParameterDomainError(f"Unknown operator '{operator}', expected 'V' or 'K'")
    if kappa < 0:
        m1, m2 = np.conj(m1), np.conj(m2)
    return KernelSplit(m1=m1, m2=m2)


def split_kernel(operator: str, kappa: float, curve, theta: np.ndarray, tau: np.ndarray) -> KernelSplit:
    """Log split of the V or K kernel at parameter pairs (θ target, τ source), without the source speed."""
    theta, tau = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(tau, dtype=float))
    diff = curve.position(theta) - curve.position(tau)
    r = np.linalg.norm(diff, axis=-1)
    gap = np.mod(theta - tau + math.pi, 2.0 * math.pi) - math.pi
    diag = np.abs(gap) < 1e-14
    log_term = np.where(diag, 0.0, np.log(4.0 * np.sin(0.5 * np.where(diag, 1.0, gap)) ** 2))
    projection = np.sum(diff * curve.normal(tau), axis=-1) if operator == "K" else None
    curvature = curve.curvature_numerator(theta) if operator == "K" else None
    return log_split(operator, kappa, r, log_term, diag, curve.speed(theta), projection, curvature)
