from __future__ import annotations

import math
from pathlib import Path
from typing import Callable, Dict, Iterable, List

import numpy as np
from scipy import special as sp

from fthms.benchmarks.catalog import run_benchmark
from fthms.benchmarks.models import BenchmarkOutcome
from fthms.bie.closed import ClosedCurveDiscretization, solve_cfie
from fthms.bie.models import FrequencyDomainProblem
from fthms.bie.open_arc import OpenArcDiscretization, solve_open_arc
from fthms.bie.potentials import ClosedPotential
from fthms.bie.quadrature import chebyshev_nodes, cov_inverse, cov_theta, interpolation_matrix, tail_mass
from fthms.errors import ConfigError
from fthms.ftransform.grid import FrequencyGrid
from fthms.ftransform.inverse import InverseTransform
from fthms.ftransform.partition import TimeWindowPartition
from fthms.geometry.boundary import ScatteringBoundary
from fthms.geometry.catalog import build_curve, circle, kite
from fthms.geometry.patches import build_patch_decomposition
from fthms.harness.checks import CheckResult, check_partition
from fthms.special.kernels import phi_of_distance

EIGEN_TOL = 1e-10
CFIE_TOL = 1e-8
TRANSFORM_TOL = 1e-8
SMOOTH_TAIL = 1e-6
SINGULAR_TAIL = 1e-2

# reduced-resolution stand-ins for the benchmark-backed criteria
QUICK_BENCHMARKS = {
    "disc-interior-exact": "disc-interior-quick",
    "disc-long-time": "disc-windows-quick",
    "exterior-point-source": "exterior-point-source-quick",
    "cavity-iterations": "cavity-iterations-quick",
}


def eigenvalue_check(half_count: int = 64, orders: int = 8, kappas: Iterable[float] = (1.0, 2.0, 5.0)) -> CheckResult:
    """Unit-circle single layer against its Fourier symbols (iπ/2)J_n(κ)H_n(κ)."""
    disc = ClosedCurveDiscretization(circle(), half_count)
    theta = disc.params
    worst = 0.0
    for kappa in kappas:
        matrix = disc.single_layer(kappa)
        for n in range(orders + 1):
            mode = np.exp(1j * n * theta)
            symbol = 0.5j * math.pi * sp.jv(n, kappa) * sp.hankel1(n, kappa)
            worst = max(worst, float(np.max(np.abs(matrix @ mode - symbol * mode))))
    return CheckResult("single_layer_eigenvalues", worst < EIGEN_TOL, worst, EIGEN_TOL, f"nodes={disc.size} n<={orders}")


def cfie_check(half_count: int = 128, kappas: Iterable[float] = (3.0, 10.0), probes: int = 20) -> CheckResult:
    """Exterior Dirichlet data of an interior point source, reproduced by the combined-field potential."""
    angles = 2.0 * math.pi * np.arange(probes) / probes
    targets = 3.0 * np.column_stack([np.cos(angles), np.sin(angles)])
    cases = [(circle(), np.array([0.2, 0.1])), (kite(), np.array([0.1, 0.2]))]
    worst = 0.0
    for curve, source in cases:
        disc = ClosedCurveDiscretization(curve, half_count)
        potential = ClosedPotential(disc, targets, "combined")
        for kappa in kappas:
            rhs = phi_of_distance(kappa, np.linalg.norm(disc.points - source, axis=1))
            solution = solve_cfie(FrequencyDomainProblem(disc, kappa, 1.0, rhs))
            field = potential.matrix(kappa, solution.eta) @ solution.values
            exact = phi_of_distance(kappa, np.linalg.norm(targets - source, axis=1))
            worst = max(worst, float(np.max(np.abs(field - exact))))
    return CheckResult("cfie_point_source", worst < CFIE_TOL, worst, CFIE_TOL, f"nodes={2 * half_count} probes={probes}")


def _run_criteria(outcome: BenchmarkOutcome, label: str, names: Iterable[str]) -> List[CheckResult]:
    results = []
    for name in names:
        check = outcome.check(name)
        if check is None:
            results.append(CheckResult(f"{label}:{name}", False, math.nan, math.nan, "check missing"))
            continue
        results.append(CheckResult(f"{label}:{check.name}", check.passed, check.value, check.threshold, check.detail))
    return results


def _relabel(outcome: BenchmarkOutcome, label: str) -> List[CheckResult]:
    return _run_criteria(outcome, label, [check.name for check in outcome.checks])


def partition_check() -> CheckResult:
    boundary = ScatteringBoundary(
        [
            build_patch_decomposition(circle(), 3),
            build_patch_decomposition(build_curve("circular_cavity", {"center": [4.0, 0.0]}), 6),
        ]
    )
    return check_partition(boundary, TimeWindowPartition(10.0, 5))


def density_smoothness_check(nodes_per_piece: int = 48, kappa: float = 5.0) -> CheckResult:
    """Three-patch disc: ψ̃ resolves on Chebyshev nodes while the bare density Ψ does not."""
    curve = circle()
    decomp = build_patch_decomposition(curve, 3)
    disc = OpenArcDiscretization.from_patch(curve, decomp.patch(0), nodes_per_piece)
    chi = decomp.chi(0, disc.params)
    rhs = -chi * np.exp(1j * kappa * disc.points[:, 0])
    solution = solve_open_arc(FrequencyDomainProblem(disc, kappa, 1.0, rhs))
    n = nodes_per_piece
    s = chebyshev_nodes(n)
    smooth, singular = 0.0, 0.0
    for k, piece in enumerate(disc.pieces):
        values = solution.values[k * n : (k + 1) * n]
        smooth = max(smooth, tail_mass(values))
        # Ψ sampled on Chebyshev nodes of the piece parameter itself.
        s_of_theta = cov_inverse(s, piece.selector)
        _, dtheta = cov_theta(s_of_theta, piece.selector)
        psi = (interpolation_matrix(n, s_of_theta) @ values) / dtheta
        singular = max(singular, tail_mass(psi))
    passed = smooth < SMOOTH_TAIL and singular > SINGULAR_TAIL
    return CheckResult(
        "density_tail_mass",
        passed,
        smooth,
        SMOOTH_TAIL,
        f"transformed={smooth:.2e} untransformed={singular:.2e} (must exceed {SINGULAR_TAIL:.0e})",
    )


def transform_check(times: Iterable[float] = (1.0, 10.0, 1000.0)) -> CheckResult:
    """Inverse transform of two Gaussian spectra against their closed forms at fixed node count."""
    grid = FrequencyGrid(cutoff=1.0, bandwidth=25.0, count=501)
    t = np.asarray(list(times), dtype=float)
    omega = grid.nodes
    omega0, sigma, tau0 = 15.0, math.sqrt(2.0), 6.0
    pairs = [
        (np.exp(-(omega**2)), np.exp(-0.25 * t**2) / (2.0 * math.sqrt(math.pi))),
        (
            np.exp(-((omega - omega0) ** 2) / sigma**2) * np.exp(1j * omega * tau0),
            (sigma / math.sqrt(math.pi)) * np.exp(-0.25 * sigma**2 * (t - tau0) ** 2) * np.cos(omega0 * (t - tau0)),
        ),
    ]
    operators = [InverseTransform(grid, np.array([value])) for value in t]
    counts = {op.node_count for op in operators}
    worst = 0.0
    for spectrum, exact in pairs:
        values = np.array([op.apply(spectrum)[0] for op in operators])
        worst = max(worst, float(np.max(np.abs(values - exact))))
    passed = worst < TRANSFORM_TOL and len(counts) == 1
    return CheckResult("inverse_transform", passed, worst, TRANSFORM_TOL, f"node_counts={sorted(counts)}")


class AcceptanceSuite:
    """Criteria 1-11, each one callable; benchmark runs are shared between the criteria that read them.

    With ``quick`` set the benchmark-backed criteria read the low-band runs in ``QUICK_BENCHMARKS``.
    """

    def __init__(
        self, output_dir: Path | str = Path("runs") / "acceptance", workers: int = 1, quick: bool = False
    ) -> None:
        self.output_dir = Path(output_dir)
        self.workers = workers
        self.quick = quick
        self._outcomes: Dict[str, BenchmarkOutcome] = {}
        self.criteria: Dict[int, Callable[[], List[CheckResult]]] = {
            1: lambda: [eigenvalue_check()],
            2: lambda: [cfie_check()],
            3: lambda: _run_criteria(self.outcome("disc-interior-exact"), "3", ("error_decrease", "error_final")),
            4: lambda: _run_criteria(self.outcome("disc-long-time"), "4", ("error_final",)),
            5: lambda: _run_criteria(self.outcome("exterior-point-source"), "5", ("error_final",)),
            6: self._huygens,
            7: lambda: _run_criteria(self.outcome("disc-interior-exact"), "7", ("generation_causality",)),
            8: lambda: [partition_check()],
            9: lambda: [density_smoothness_check()],
            10: lambda: [transform_check()],
            11: lambda: _relabel(self.outcome("cavity-iterations"), "11"),
        }

    def outcome(self, name: str) -> BenchmarkOutcome:
        if self.quick:
            name = QUICK_BENCHMARKS.get(name, name)
        if name not in self._outcomes:
            self._outcomes[name] = run_benchmark(name, self.output_dir / name, self.workers)
        return self._outcomes[name]

    def _huygens(self) -> List[CheckResult]:
        names = ("disc-interior-exact", "disc-long-time", "exterior-point-source")
        return [check for name in names for check in _run_criteria(self.outcome(name), f"6:{name}", ("huygens_silence",))]

    def run(self, criteria: Iterable[int] | None = None) -> List[CheckResult]:
        selected = sorted(set(criteria)) if criteria is not None else sorted(self.criteria)
        unknown = [c for c in selected if c not in self.criteria]
        if unknown:
            raise ConfigError("check.only", f"unknown criteria {unknown}, expected 1-{len(self.criteria)}")
        results: List[CheckResult] = []
        for number in selected:
            print(f"[ACCEPT] criterion {number}", flush=True)
            for check in self.criteria[number]():
                print(check.line(), flush=True)
                results.append(check)
        return results


def run_acceptance(
    criteria: Iterable[int] | None = None,
    workers: int = 1,
    output_dir: Path | str | None = None,
    quick: bool = False,
) -> List[CheckResult]:
    suite = AcceptanceSuite(output_dir or Path("runs") / "acceptance", workers, quick)
    return suite.run(criteria)
