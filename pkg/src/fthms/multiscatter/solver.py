from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from fthms.bie.linsolve import linear_solve
from fthms.errors import SolverConvergenceError
from fthms.ftransform.forward import SlowForwardTransform
from fthms.ftransform.inverse import InverseTransform, recenter_sum
from fthms.multiscatter.layout import PatchSystem
from fthms.multiscatter.models import RunPlan, SubSolution


class SubproblemSolver:
    """Solves one (j, m) subproblem: slow FT per window, BIE per ω, potentials, inverse FT.

    Frequency solves for all windows share one factorisation per ω.
    """

    def __init__(self, system: PatchSystem, plan: RunPlan) -> None:
        self.system = system
        self.plan = plan
        self.forward = SlowForwardTransform(plan.grid, plan.partition, plan.samples)
        self.inverse = InverseTransform(plan.grid, plan.samples.times)
        self.omegas = plan.grid.nodes
        self._factors: Dict[Tuple[int, int], tuple] = {}
        self._transfers: Dict[Tuple[int, int], np.ndarray] = {}
        self._systems: Dict[Tuple[int, int], np.ndarray] = {}

    def solve_subproblem(self, j: int, m: int, data: np.ndarray) -> SubSolution:
        patch = self.system.patches[j]
        data = np.asarray(data, dtype=float)
        windows: Dict[int, np.ndarray] = {}
        for q in range(1, self.plan.partition.count + 1):
            if np.any(self.forward.window_samples(data, q)):
                windows[q] = self.forward.apply(data, q)
        if not windows:
            return self._zero_solution(j, m)

        qs = sorted(windows)
        count = len(self.omegas)
        targets = len(self.system.targets(j))
        fields = {q: np.zeros((count, targets), dtype=complex) for q in qs}
        own = {q: np.zeros((count, patch.size), dtype=complex) for q in qs}
        densities = {q: np.zeros((count, patch.size), dtype=complex) for q in qs}
        iterations: List[int] = []
        for i, omega in enumerate(self.omegas):
            rhs = np.stack([windows[q][i] for q in qs], axis=1)
            if not np.any(rhs):
                continue
            kappa = float(omega) / self.plan.c
            try:
                matrix = self._system(j, i, kappa)
                solution, its = self._solve(j, i, matrix, rhs)
            except SolverConvergenceError as exc:
                raise exc.annotate(j=j, m=m, q=qs, omega=float(omega))
            iterations.append(its)
            values = self._transfer(j, i, kappa) @ solution
            # trace of the patch potential at its own nodes
            on_patch = matrix @ solution
            for column, q in enumerate(qs):
                fields[q][i] = values[:, column]
                own[q][i] = on_patch[:, column]
                densities[q][i] = solution[:, column]

        traces = recenter_sum({q: self.inverse.apply(fields[q]) for q in qs}, self.plan.partition, self.plan.samples)
        self_trace = recenter_sum(
            {q: self.inverse.apply(own[q]) for q in qs}, self.plan.partition, self.plan.samples
        )
        node_traces = {receiver: traces[:, rows] for receiver, rows in self.system.receivers(j)}
        observation = traces[:, self.system.observation_slice(j)]
        return SubSolution(j, m, node_traces, self_trace, observation, densities, iterations)

    def _system(self, j: int, i: int, kappa: float) -> np.ndarray:
        key = (j, i)
        matrix = self._systems.get(key)
        if matrix is None:
            matrix = self.system.system_matrix(j, kappa)
            if self.plan.cache_operators:
                self._systems[key] = matrix
        return matrix

    def _solve(self, j: int, i: int, matrix: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, int]:
        settings = self.plan.solver
        size = rhs.shape[0]
        if settings.resolve(size) == "direct":
            key = (j, i)
            factors = self._factors.get(key)
            if factors is None:
                factors = lu_factor(matrix)
                if self.plan.cache_operators:
                    self._factors[key] = factors
            return lu_solve(factors, rhs), 0
        columns, total = [], 0
        for column in range(rhs.shape[1]):
            result = linear_solve(matrix, rhs[:, column], settings)
            columns.append(result.solution)
            total = max(total, result.iterations)
        return np.stack(columns, axis=1), total

    def _transfer(self, j: int, i: int, kappa: float) -> np.ndarray:
        key = (j, i)
        matrix = self._transfers.get(key)
        if matrix is None:
            matrix = self.system.transfer_matrix(j, kappa)
            if self.plan.cache_operators:
                self._transfers[key] = matrix
        return matrix

    def _zero_solution(self, j: int, m: int) -> SubSolution:
        size = self.plan.samples.size
        node_traces = {r: np.zeros((size, self.system.patches[r].size)) for r, _ in self.system.receivers(j)}
        return SubSolution(
            j,
            m,
            node_traces,
            np.zeros((size, self.system.patches[j].size)),
            np.zeros((size, len(self.system.observation_points))),
            skipped=True,
        )

    def evaluate_points(self, densities: Dict[Tuple[int, int], np.ndarray], points: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Σ_j Σ_q F⁻¹(U_{j,q})(x, t − s_q) at arbitrary off-boundary points; times × points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.zeros((len(times), len(points)))
        if not len(points) or not len(times):
            return out
        inverses: Dict[int, InverseTransform] = {}
        for j in range(self.system.count):
            keys = sorted(q for (k, q) in densities if k == j)
            if not keys:
                continue
            operator = self.system.point_operator(j, points)
            spectra = {q: np.zeros((len(self.omegas), len(points)), dtype=complex) for q in keys}
            for i, omega in enumerate(self.omegas):
                columns = [densities[(j, q)][i] for q in keys]
                if not any(np.any(c) for c in columns):
                    continue
                matrix = operator.matrix(float(omega) / self.plan.c)
                for q, column in zip(keys, columns):
                    spectra[q][i] = matrix @ column
            for q in keys:
                if q not in inverses:
                    inverses[q] = InverseTransform(self.plan.grid, times - self.plan.partition.center(q))
                out += inverses[q].apply(spectra[q])
        return out
