from __future__ import annotations

from typing import Any, Dict

import numpy as np


class FthmsError(RuntimeError):
    """Base class for every error raised by the solver."""


class ParameterDomainError(FthmsError, ValueError):
    pass


class SingularEvaluationError(FthmsError):
    pass


class DecompositionError(FthmsError):
    pass


class UnsupportedVariantError(FthmsError):
    pass


class TransformError(FthmsError):
    pass


class DependencyError(FthmsError):
    pass


class ConfigError(FthmsError, ValueError):
    def __init__(self, key: str, constraint: str) -> None:
        super().__init__(f"Invalid config key '{key}': {constraint}")
        self.key = key
        self.constraint = constraint


class ReferenceConflictError(FthmsError):
    pass


class SolverConvergenceError(FthmsError):
    """Iterative solve hit its cap; keeps the best iterate for diagnostics."""

    def __init__(
        self,
        message: str,
        iterations: int,
        residual: float,
        best_iterate: np.ndarray | None = None,
    ) -> None:
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.best_iterate = best_iterate
        self.context: Dict[str, Any] = {}

    def annotate(self, **context: Any) -> "SolverConvergenceError":
        self.context.update(context)
        return self

    def __str__(self) -> str:
        base = super().__str__()
        if not self.context:
            return base
        where = " ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{base} [{where}]"
