from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass(slots=True)
class DensitySolution:
    omega: float
    values: np.ndarray  # closed: Ψ at nodes | open: working unknown (ψ̃, or α when weighted)
    weighted: bool
    discretization: Any
    iterations: int = 0
    eta: float = 0.0  # CFIE coupling, closed curves only

    @property
    def kind(self) -> str:
        return self.discretization.kind

    def physical_density(self) -> np.ndarray:
        """Density per unit arc length at the nodes."""
        return self.discretization.physical_density(self.values, self.weighted)


@dataclass(slots=True)
class FrequencyDomainProblem:
    discretization: Any
    omega: float
    c: float
    rhs: np.ndarray
    eta: float | None = None

    @property
    def kappa(self) -> float:
        return self.omega / self.c
