from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from fthms.bie.linsolve import SolverSettings, linear_solve
from fthms.bie.open_arc import OpenArcDiscretization
from fthms.errors import ConfigError, SolverConvergenceError
from fthms.geometry.curves import ParametricCurve
from fthms.geometry.patches import build_patch_decomposition


@dataclass(slots=True)
class IterationRow:
    kappa: float
    full_iterations: int
    full_converged: bool
    patch_iterations: List[int] = field(default_factory=list)
    patch_converged: List[bool] = field(default_factory=list)

    @property
    def max_patch(self) -> int:
        return max(self.patch_iterations, default=0)

    def as_row(self) -> Dict[str, object]:
        row: Dict[str, object] = {
            "kappa": self.kappa,
            "full_arc": self.full_iterations,
            "full_converged": self.full_converged,
            "max_patch": self.max_patch,
        }
        for j, count in enumerate(self.patch_iterations):
            row[f"patch_{j}"] = count
        return row


def _count(matrix: np.ndarray, rhs: np.ndarray, settings: SolverSettings) -> tuple[int, bool]:
    try:
        return linear_solve(matrix, rhs, settings).iterations, True
    except SolverConvergenceError as exc:
        return exc.iterations, False


def iteration_study(
    curve: ParametricCurve,
    kappas: Sequence[float],
    patches: int = 6,
    overlap_fraction: float = 1.0 / 3.0,
    settings: SolverSettings | None = None,
    nodes_per_piece: int = 24,
    max_piece_length: float = 0.5,
    direction_angle: float = 0.0,
) -> List[IterationRow]:
    """GMRES counts for the whole open arc against each patch subproblem, one row per κ.

    Right-hand sides are the first-generation data −u^i on the full arc and −χ_j·u^i on patch j
    for a plane wave e^{iκ d·x}. Non-convergence is recorded in the row.
    """
    settings = settings or SolverSettings(method="iterative", tol=1e-6)
    if settings.method != "iterative":
        raise ConfigError("solver.method", "iteration study needs the iterative solver")
    direction = np.array([math.cos(direction_angle), math.sin(direction_angle)])
    full = OpenArcDiscretization.whole_arc(curve, nodes_per_piece, max_piece_length, weighted=True)
    decomp = build_patch_decomposition(curve, patches, overlap_fraction)
    pieces = [
        OpenArcDiscretization.from_patch(curve, decomp.patch(j), nodes_per_piece, max_piece_length)
        for j in range(decomp.count)
    ]
    chis = [decomp.chi(j, disc.params) for j, disc in enumerate(pieces)]
    rows: List[IterationRow] = []
    for kappa in kappas:
        kappa = float(kappa)
        rhs = -np.exp(1j * kappa * full.points @ direction)
        count, converged = _count(full.single_layer(kappa), rhs, settings)
        row = IterationRow(kappa, count, converged)
        for disc, chi in zip(pieces, chis):
            rhs = -chi * np.exp(1j * kappa * disc.points @ direction)
            count, converged = _count(disc.single_layer(kappa), rhs, settings)
            row.patch_iterations.append(count)
            row.patch_converged.append(converged)
        print(f"[ITER] kappa={kappa:g} full={row.full_iterations} max_patch={row.max_patch}", flush=True)
        rows.append(row)
    return rows
