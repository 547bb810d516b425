from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Callable, Dict, List

import numpy as np

from fthms.app import SimulationApp
from fthms.benchmarks.models import BenchmarkOutcome, BenchmarkSpec
from fthms.config import parse_config
from fthms.errors import ConfigError
from fthms.geometry.catalog import circular_cavity
from fthms.geometry.patches import circle_overlap_fraction
from fthms.harness.checks import CheckResult, boundary_residual, run_checks
from fthms.harness.iterations import iteration_study
from fthms.harness.metrics import PROVENANCE_EXACT, error_report
from fthms.incident.fields import IncidentFieldSpec, eval_time, gaussian_plane_time_exact
from fthms.multiscatter.models import guarantee_time
from fthms.storage.persistence import RunPersistence

ExactField = Callable[[IncidentFieldSpec, np.ndarray, np.ndarray], np.ndarray]

ERROR_TOL = 1e-5
RESIDUAL_TOL = 1e-5
# separations the disc benchmarks are laid out for
DISC_DELTA_MIN = 0.35
DISC_TWO_DELTA_MIN = 0.42


def _disc(radius: float, patches: int, delta_min: float) -> Dict[str, Any]:
    params = {"radius": radius} if radius != 1.0 else {}
    return {
        "curve": "circle",
        "params": params,
        "patches": patches,
        "overlap_fraction": circle_overlap_fraction(radius, patches, delta_min),
    }


def _negated(field: ExactField) -> ExactField:
    def exact(spec: IncidentFieldSpec, points: np.ndarray, times: np.ndarray) -> np.ndarray:
        return -field(spec, points, times)

    return exact


def _document(name: str, out_dir: Path, workers: int, **sections: Any) -> Dict[str, Any]:
    document: Dict[str, Any] = {"name": name, "workers": workers, "output": {"directory": str(out_dir)}}
    document.update(sections)
    return document


def _run(
    document: Dict[str, Any],
    exact: ExactField | None = None,
    error_until: str = "guarantee",
    error_tol: float = ERROR_TOL,
    extra: Callable[[SimulationApp, Any, BenchmarkOutcome], None] | None = None,
) -> BenchmarkOutcome:
    """Runs one configured benchmark and appends the run-level checks plus any exact-solution checks.

    ``error_until`` is "guarantee" for [0, min(T(M), horizon)] or "horizon" for the whole reported range.
    """
    config = parse_config(document)
    app = SimulationApp(config)
    result = app.run()
    outcome = BenchmarkOutcome(config.name, config.output_dir, result=result)
    outcome.checks.extend(run_checks(result))
    if exact is not None:
        plan = app.plan
        rows = plan.samples.nonnegative()
        times = result.times[rows]
        horizon = plan.partition.horizon
        t_end = horizon
        if error_until == "guarantee":
            t_end = min(guarantee_time(plan.generations, app.boundary.delta_min, plan.c), horizon)
        reference = exact(app.incident, plan.observation_points, times)
        history = [u[rows] for u in result.accumulator.history]
        report = error_report(
            plan.observation_points, times, result.scattered()[rows], reference, (0.0, t_end), PROVENANCE_EXACT, history
        )
        outcome.errors = report
        app.artifacts.append(app.persistence.save_table_csv("error_vs_M", report.rows()))
        outcome.checks.append(
            CheckResult("error_final", report.error < error_tol, report.error, error_tol, f"t <= {t_end:.3g}")
        )
    if extra is not None:
        extra(app, result, outcome)
    for check in outcome.checks:
        print(check.line(), flush=True)
    app.finalize()
    outcome.artifacts = list(app.artifacts)
    return outcome


def _error_decrease(
    low: int, high: int, factor: float, residual_tol: float = RESIDUAL_TOL
) -> Callable[[SimulationApp, Any, BenchmarkOutcome], None]:
    def check(app: SimulationApp, result: Any, outcome: BenchmarkOutcome) -> None:
        curve = outcome.errors.per_generation if outcome.errors else {}
        if low not in curve or high not in curve:
            outcome.checks.append(CheckResult("error_decrease", False, math.nan, factor, "missing generations"))
            return
        ratio = curve[high] / curve[low] if curve[low] > 0.0 else 0.0
        outcome.checks.append(
            CheckResult("error_decrease", ratio < 1.0 / factor, ratio, 1.0 / factor, f"eps(M={high}) / eps(M={low})")
        )
        residual = boundary_residual(result)[-1]
        outcome.checks.append(CheckResult("boundary_residual", residual < residual_tol, residual, residual_tol))

    return check


def disc_interior_exact(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "disc-interior-exact",
        out_dir,
        workers,
        geometry={"mode": "interior", "components": [_disc(1.0, 3, DISC_DELTA_MIN)]},
        incident={"variant": "gaussian-plane", "omega0": 15.0, "band": [5.0, 25.0], "direction_angle": 0.0},
        frequency={"cutoff": 1.0, "bandwidth": 25.0, "count": 501},
        time={"half_width": 10.0, "windows": 2, "dt": 0.01},
        scattering={"generations": 8},
        observation={
            "points": [[0.5, 0.0]],
            "snapshot": {"x_range": [-1.0, 1.0], "y_range": [-1.0, 1.0], "nx": 17, "ny": 17, "times": [2.0, 4.0]},
        },
    )
    return _run(document, _negated(gaussian_plane_time_exact), extra=_error_decrease(2, 8, 10.0))


def disc_long_time(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "disc-long-time",
        out_dir,
        workers,
        geometry={"mode": "interior", "components": [_disc(1.0, 3, DISC_DELTA_MIN)]},
        incident={"variant": "multi-pulse", "pulses": 2, "spacing": 10.0, "t_lag": 2.0},
        frequency={"cutoff": 1.0, "bandwidth": 20.0, "count": 401},
        time={"half_width": 10.0, "windows": 3, "dt": 0.01},
        scattering={"generations": 12},
        observation={"points": [[0.5, 0.0], [0.0, 0.3]]},
    )
    return _run(document, _negated(eval_time), error_until="horizon")


def disc_radius_two(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "disc-radius-two",
        out_dir,
        workers,
        geometry={"mode": "interior", "components": [_disc(2.0, 6, DISC_TWO_DELTA_MIN)]},
        incident={"variant": "gaussian-plane", "omega0": 15.0, "band": [5.0, 25.0]},
        frequency={"cutoff": 1.0, "bandwidth": 25.0, "count": 501},
        time={"half_width": 10.0, "windows": 2, "dt": 0.01},
        scattering={"generations": 8},
        solver={"max_piece_length": 1.0},
        observation={"points": [[1.0, 0.0]]},
    )
    return _run(document, _negated(gaussian_plane_time_exact), error_tol=1e-4)


def exterior_point_source(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    circle = {"curve": "circle", "whole": True}
    document = _document(
        "exterior-point-source",
        out_dir,
        workers,
        geometry={
            "mode": "exterior-multi-obstacle",
            "components": [
                {**circle, "params": {"radius": 0.5}},
                {**circle, "params": {"radius": 0.5, "center": [2.0, 0.0]}},
                {"curve": "ellipse", "whole": True, "params": {"semi_x": 0.6, "semi_y": 0.3, "center": [0.0, 2.0]}},
            ],
        },
        incident={"variant": "point-source", "source": [0.0, 0.0], "omega0": 15.0, "band": [5.0, 25.0]},
        frequency={"cutoff": 1.0, "bandwidth": 25.0, "count": 501},
        time={"half_width": 10.0, "windows": 2, "dt": 0.01},
        scattering={"generations": 6},
        solver={"closed_nodes": 128},
        observation={"points": [[1.0, 1.0], [-1.5, -1.0]]},
    )
    return _run(document, _negated(eval_time))


QUICK_ERROR_TOL = 1e-3
# quiet at t = 0 on the unit disc and negligible outside [1, 24]
QUICK_PLANE = {"variant": "gaussian-plane", "omega0": 12.0, "sigma": 3.0, "tau0": 3.7, "band": [1.0, 24.0]}


def disc_interior_quick(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "disc-interior-quick",
        out_dir,
        workers,
        geometry={"mode": "interior", "components": [_disc(1.0, 3, DISC_DELTA_MIN)]},
        incident=dict(QUICK_PLANE),
        frequency={"cutoff": 1.0, "bandwidth": 24.0, "count": 321},
        time={"half_width": 8.0, "windows": 1, "dt": 0.05},
        scattering={"generations": 10},
        observation={"points": [[-0.9, 0.0], [0.0, 0.3]]},
    )
    return _run(
        document,
        _negated(gaussian_plane_time_exact),
        error_tol=QUICK_ERROR_TOL,
        extra=_error_decrease(1, 10, 10.0, QUICK_ERROR_TOL),
    )


def disc_windows_quick(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "disc-windows-quick",
        out_dir,
        workers,
        geometry={"mode": "interior", "components": [_disc(1.0, 3, DISC_DELTA_MIN)]},
        incident=dict(QUICK_PLANE),
        frequency={"cutoff": 1.0, "bandwidth": 24.0, "count": 161},
        time={"half_width": 1.5, "windows": 3, "dt": 0.05},
        scattering={"generations": 10},
        solver={"cache_operators": True},
        observation={"points": [[-0.9, 0.0], [0.0, 0.3]]},
    )
    return _run(document, _negated(gaussian_plane_time_exact), error_tol=QUICK_ERROR_TOL)


def exterior_point_source_quick(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    circle = {"curve": "circle", "whole": True}
    document = _document(
        "exterior-point-source-quick",
        out_dir,
        workers,
        geometry={
            "mode": "exterior-multi-obstacle",
            "components": [
                {**circle, "params": {"radius": 0.5}},
                {**circle, "params": {"radius": 0.5, "center": [3.0, 0.0]}},
            ],
        },
        incident={
            "variant": "point-source",
            "source": [0.0, 0.0],
            "omega0": 12.0,
            "sigma": 3.0,
            "tau0": 2.7,
            "band": [1.0, 24.0],
        },
        frequency={"cutoff": 1.0, "bandwidth": 24.0, "count": 321},
        time={"half_width": 8.0, "windows": 1, "dt": 0.05},
        scattering={"generations": 3},
        solver={"closed_nodes": 96},
        observation={"points": [[0.8, 0.6], [-0.7, -0.4]]},
    )
    return _run(document, _negated(eval_time), error_tol=QUICK_ERROR_TOL)


def h_shape_smoke(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "h-shape-smoke",
        out_dir,
        workers,
        geometry={"mode": "interior", "components": [{"curve": "rounded_h", "patches": 8}]},
        incident={"variant": "gaussian-plane", "omega0": 15.0, "band": [5.0, 25.0], "direction_angle": 0.3},
        frequency={"cutoff": 1.0, "bandwidth": 25.0, "count": 301},
        time={"half_width": 8.0, "windows": 2, "dt": 0.02},
        scattering={"generations": 3},
        solver={"max_piece_length": 0.6},
        observation={
            "points": [[0.0, 0.0], [-1.0, 1.0]],
            "snapshot": {"x_range": [-1.6, 1.6], "y_range": [-1.6, 1.6], "nx": 25, "ny": 25, "times": [2.0]},
        },
    )
    return _run(document)


def open_arcs_smoke(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "open-arcs-smoke",
        out_dir,
        workers,
        geometry={
            "mode": "exterior-open-arcs",
            "components": [
                {"curve": "segment", "whole": True, "params": {"start": [-1.5, -1.0], "end": [-0.5, -1.0]}},
                {"curve": "circular_arc", "whole": True, "params": {"radius": 0.6, "start": 0.3, "end": 2.8}},
                {"curve": "segment", "whole": True, "params": {"start": [0.8, -0.8], "end": [1.4, 0.4]}},
            ],
        },
        incident={"variant": "gaussian-plane", "omega0": 15.0, "band": [5.0, 25.0]},
        frequency={"cutoff": 1.0, "bandwidth": 25.0, "count": 301},
        time={"half_width": 8.0, "windows": 2, "dt": 0.02},
        scattering={"generations": 3},
        solver={"max_piece_length": 0.5},
        observation={"points": [[0.0, -0.2], [2.0, 1.5]]},
    )
    return _run(document)


def nine_obstacles_smoke(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    components = [
        {"curve": "circle", "whole": True, "params": {"radius": 0.3, "center": [1.2 * i, 1.2 * j]}}
        for j in (-1, 0, 1)
        for i in (-1, 0, 1)
    ]
    document = _document(
        "nine-obstacles-smoke",
        out_dir,
        workers,
        geometry={"mode": "exterior-multi-obstacle", "components": components},
        incident={"variant": "gaussian-plane", "omega0": 15.0, "band": [5.0, 25.0]},
        frequency={"cutoff": 1.0, "bandwidth": 25.0, "count": 301},
        time={"half_width": 8.0, "windows": 2, "dt": 0.02},
        scattering={"generations": 3},
        solver={"closed_nodes": 64},
        observation={"points": [[0.6, 0.6], [2.5, 0.0]]},
    )
    return _run(document)


def rocket_cavity_smoke(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    document = _document(
        "rocket-cavity-smoke",
        out_dir,
        workers,
        geometry={"mode": "open-cavity", "components": [{"curve": "rocket_cavity", "patches": 6}]},
        incident={"variant": "pulse-plane", "direction_angle": 0.5 * math.pi, "t_lag": 3.0},
        frequency={"cutoff": 1.0, "bandwidth": 20.0, "count": 301},
        time={"half_width": 8.0, "windows": 2, "dt": 0.02},
        scattering={"generations": 3},
        solver={"max_piece_length": 0.6},
        observation={"points": [[0.0, 0.5], [2.5, 0.0]]},
    )
    return _run(document)


CAVITY_KAPPAS = (5.0, 7.5, 10.0, 12.5, 15.0)
QUICK_CAVITY_KAPPAS = (5.0, 7.5)


def _iterations(name: str, out_dir: Path, kappas: tuple[float, ...]) -> BenchmarkOutcome:
    persistence = RunPersistence(out_dir)
    rows = iteration_study(circular_cavity(), kappas, patches=6)
    outcome = BenchmarkOutcome(name, Path(out_dir))
    outcome.artifacts.append(persistence.save_table_csv("iteration_counts", [row.as_row() for row in rows]))
    for row in rows:
        passed = row.full_converged and all(row.patch_converged) and row.max_patch < row.full_iterations
        outcome.checks.append(
            CheckResult(
                f"iterations_kappa_{row.kappa:g}",
                passed,
                float(row.max_patch),
                float(row.full_iterations),
                "max patch count against full arc count",
            )
        )
    for check in outcome.checks:
        print(check.line(), flush=True)
    outcome.artifacts.append(persistence.write_manifest())
    return outcome


def cavity_iterations(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    return _iterations("cavity-iterations", out_dir, CAVITY_KAPPAS)


def cavity_iterations_quick(out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    return _iterations("cavity-iterations-quick", out_dir, QUICK_CAVITY_KAPPAS)


BENCHMARKS: Dict[str, BenchmarkSpec] = {
    spec.name: spec
    for spec in (
        BenchmarkSpec("disc-interior-exact", "Unit disc, 3 patches, Gaussian plane wave; error vs M against -u^i", disc_interior_exact),
        BenchmarkSpec("disc-long-time", "Unit disc, two-pulse incidence over three windows, M=12", disc_long_time),
        BenchmarkSpec("disc-radius-two", "Disc of radius 2 with 6 patches; error against -u^i", disc_radius_two),
        BenchmarkSpec("exterior-point-source", "Three obstacles, point source inside one; error against -u^i", exterior_point_source),
        BenchmarkSpec("h-shape-smoke", "Rounded H-shaped interior with 8 patches", h_shape_smoke, smoke=True),
        BenchmarkSpec("open-arcs-smoke", "Three open arcs in free space", open_arcs_smoke, smoke=True),
        BenchmarkSpec("nine-obstacles-smoke", "Nine small discs solved as whole CFIE components", nine_obstacles_smoke, smoke=True),
        BenchmarkSpec("rocket-cavity-smoke", "Open rocket-like cavity with 6 patches, pulse incidence", rocket_cavity_smoke, smoke=True),
        BenchmarkSpec("cavity-iterations", "GMRES counts: full circular cavity against 6 patches", cavity_iterations),
        BenchmarkSpec("disc-interior-quick", "Unit disc at low band, M=10; error vs M against -u^i", disc_interior_quick),
        BenchmarkSpec("disc-windows-quick", "Unit disc at low band over three short windows", disc_windows_quick),
        BenchmarkSpec("exterior-point-source-quick", "Two discs, point source inside one; error against -u^i", exterior_point_source_quick),
        BenchmarkSpec("cavity-iterations-quick", "GMRES counts for the circular cavity at two wavenumbers", cavity_iterations_quick),
    )
}


def list_benchmarks() -> List[BenchmarkSpec]:
    return list(BENCHMARKS.values())


def run_benchmark(name: str, out_dir: Path, workers: int = 1) -> BenchmarkOutcome:
    spec = BENCHMARKS.get(name)
    if spec is None:
        raise ConfigError("bench", f"unknown benchmark '{name}', expected one of {', '.join(BENCHMARKS)}")
    print(f"[BENCH] {spec.name}: {spec.description}", flush=True)
    return spec.execute(Path(out_dir), workers)
