from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse.linalg import gmres

from fthms.errors import ParameterDomainError, SolverConvergenceError

DIRECT_LIMIT = 2000


@dataclass(frozen=True, slots=True)
class SolverSettings:
    method: str = "direct"  # direct | iterative | auto
    tol: float = 1e-6
    restart: int = 50
    cap: int = 1000

    def resolve(self, size: int) -> str:
        if self.method == "auto":
            return "direct" if size < DIRECT_LIMIT else "iterative"
        return self.method


@dataclass(slots=True)
class SolveResult:
    solution: np.ndarray
    iterations: int
    residual: float


def linear_solve(matrix: np.ndarray, rhs: np.ndarray, settings: SolverSettings | None = None) -> SolveResult:
    settings = settings or SolverSettings()
    matrix = np.asarray(matrix)
    rhs = np.asarray(rhs)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ParameterDomainError(f"linear_solve needs a square matrix, got shape {matrix.shape}")
    method = settings.resolve(matrix.shape[0])
    if method == "direct":
        solution = lu_solve(lu_factor(matrix), rhs)
        return SolveResult(solution, 0, _relative_residual(matrix, solution, rhs))
    if method == "iterative":
        return _gmres(matrix, rhs, settings)
    raise ParameterDomainError(f"Unknown solver method '{settings.method}'")


def _gmres(matrix: np.ndarray, rhs: np.ndarray, settings: SolverSettings) -> SolveResult:
    norm_rhs = float(np.linalg.norm(rhs))
    if norm_rhs == 0.0:
        return SolveResult(np.zeros_like(rhs, dtype=complex), 0, 0.0)
    count = 0

    def callback(_residual: float) -> None:
        nonlocal count
        count += 1

    restart = min(settings.restart, matrix.shape[0])
    solution, info = gmres(
        matrix,
        rhs,
        rtol=settings.tol,
        atol=0.0,
        restart=restart,
        maxiter=max(1, math.ceil(settings.cap / restart)),
        callback=callback,
        callback_type="pr_norm",
    )
    residual = _relative_residual(matrix, solution, rhs)
    if info != 0 or residual > settings.tol * 10.0:
        raise SolverConvergenceError(
            f"GMRES did not reach tol={settings.tol:g} within cap={settings.cap} "
            f"(iterations={count}, residual={residual:.3e})",
            iterations=count,
            residual=residual,
            best_iterate=solution,
        )
    return SolveResult(solution, count, residual)


def _relative_residual(matrix: np.ndarray, solution: np.ndarray, rhs: np.ndarray) -> float:
    norm_rhs = float(np.linalg.norm(rhs))
    if norm_rhs == 0.0:
        return float(np.linalg.norm(matrix @ solution))
    return float(np.linalg.norm(matrix @ solution - rhs)) / norm_rhs


def condition_estimate(matrix: np.ndarray) -> float:
    return float(np.linalg.cond(np.asarray(matrix)))
