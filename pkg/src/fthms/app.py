from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np

from fthms.bie.linsolve import SolverSettings
from fthms.config import RunConfig, build_incident, write_config_echo
from fthms.core.event_bus import EventBus
from fthms.errors import ConfigError, FthmsError
from fthms.ftransform.grid import FrequencyGrid, build_time_samples
from fthms.ftransform.partition import TimeWindowPartition
from fthms.geometry.boundary import ScatteringBoundary
from fthms.geometry.catalog import build_curve
from fthms.geometry.patches import PatchDecomposition, build_patch_decomposition
from fthms.incident.fields import IncidentFieldSpec
from fthms.multiscatter.models import DiscretizationSettings, RunPlan
from fthms.multiscatter.runner import MultipleScatteringRunner, RunResult, attach_console
from fthms.storage.persistence import RunPersistence
from fthms.storage.snapshots import SnapshotGrid

CLOSED_MODES = ("interior", "exterior-multi-obstacle")


@dataclass
class SimulationApp:
    """One configured run: builds geometry, incident field and plan, runs the solver, writes artifacts."""

    config: RunConfig
    persist: bool = True
    console: bool = True
    artifacts: List[Path] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.event_bus = EventBus()
        if self.console:
            attach_console(self.event_bus)
        self.boundary = self._build_boundary()
        self.incident = self._build_incident()
        self.snapshot_grid, self.snapshot_mask = self._build_snapshot_grid()
        self.plan = self._build_plan()
        self.persistence = RunPersistence(self.config.output_dir) if self.persist else None

    def run(self) -> RunResult:
        clock = time.perf_counter()
        if self.persistence is not None:
            self.artifacts.append(write_config_echo(self.config, self.config.output_dir))
        runner = MultipleScatteringRunner(self.plan, self.boundary, self.incident, self.event_bus)
        result = runner.run()
        if self.persistence is not None:
            persist_clock = time.perf_counter()
            self._persist(result)
            result.report.timings["persistence"] = time.perf_counter() - persist_clock
            self.artifacts.append(self.persistence.save_report(result.report.to_text()))
        print(f"[RUN] '{self.config.name}' finished in {time.perf_counter() - clock:.1f}s", flush=True)
        return result

    def finalize(self) -> Path | None:
        """Writes the manifest; call after every artifact of the run has been written."""
        if self.persistence is None:
            return None
        manifest = self.persistence.write_manifest()
        print(f"[PERSIST] manifest saved: {manifest}", flush=True)
        return manifest

    def _build_boundary(self) -> ScatteringBoundary:
        geometry = self.config.geometry
        decomps: List[PatchDecomposition] = []
        for i, component in enumerate(geometry.components):
            key = f"geometry.components[{i}]"
            try:
                curve = build_curve(component.curve, component.params)
            except FthmsError as exc:
                raise ConfigError(f"{key}.params", str(exc)) from exc
            if geometry.mode in CLOSED_MODES and not curve.closed:
                raise ConfigError(f"{key}.curve", f"mode '{geometry.mode}' needs closed curves, '{curve.name}' is open")
            if geometry.mode not in CLOSED_MODES and curve.closed:
                raise ConfigError(f"{key}.curve", f"mode '{geometry.mode}' needs open arcs, '{curve.name}' is closed")
            try:
                decomps.append(
                    build_patch_decomposition(
                        curve,
                        component.patches,
                        component.overlap_fraction,
                        self.config.decomposition.c0,
                        self.config.decomposition.c1,
                        component.start,
                    )
                )
            except FthmsError as exc:
                raise ConfigError(key, str(exc)) from exc
        boundary = ScatteringBoundary(decomps)
        print(
            f"[GEOM] components={len(decomps)} patches={boundary.count} delta_min={boundary.delta_min:.4g}",
            flush=True,
        )
        return boundary

    def _build_incident(self) -> IncidentFieldSpec:
        return build_incident(self.config.incident)

    def _build_snapshot_grid(self) -> tuple[SnapshotGrid | None, np.ndarray]:
        snapshot = self.config.observation.snapshot
        if snapshot is None or not snapshot.times:
            return None, np.zeros(0, dtype=bool)
        grid = SnapshotGrid(snapshot.x_range, snapshot.y_range, snapshot.nx, snapshot.ny)
        points = grid.points()
        valid = self.boundary.distance(points) > self.config.observation.near_field_threshold
        inside = self.boundary.contains_point(points)
        if self.config.geometry.mode == "interior":
            valid &= inside
        elif self.config.geometry.mode == "exterior-multi-obstacle":
            valid &= ~inside
        return grid, valid

    def _build_plan(self) -> RunPlan:
        cfg = self.config
        partition = TimeWindowPartition(cfg.time.half_width, cfg.time.windows)
        grid = FrequencyGrid(
            cutoff=cfg.frequency.cutoff,
            bandwidth=cfg.frequency.bandwidth,
            count=cfg.frequency.count,
            grading_count=cfg.frequency.grading_count,
            grading_power=cfg.frequency.grading_power,
            cc_order=cfg.frequency.cc_order,
            low_frequency=cfg.frequency.low_frequency,
            matching_points=cfg.frequency.matching_points,
        )
        samples = build_time_samples(partition, cfg.time.dt, cfg.time.n_steps)
        snapshot_points = np.zeros((0, 2))
        snapshot_times = np.zeros(0)
        if self.snapshot_grid is not None:
            snapshot_points = self.snapshot_grid.points()[self.snapshot_mask]
            snapshot_times = np.asarray(cfg.observation.snapshot.times, dtype=float)
        solver = cfg.solver
        return RunPlan(
            mode=cfg.geometry.mode,
            generations=cfg.scattering.generations,
            partition=partition,
            grid=grid,
            samples=samples,
            prune_tol=cfg.scattering.prune_tol,
            c=cfg.scattering.c,
            observation_points=np.asarray(cfg.observation.points, dtype=float).reshape(-1, 2),
            snapshot_points=snapshot_points,
            snapshot_times=snapshot_times,
            solver=SolverSettings(solver.method, solver.tol, solver.restart, solver.cap),
            discretization=DiscretizationSettings(
                nodes_per_piece=solver.nodes_per_piece,
                max_piece_length=solver.max_piece_length if solver.max_piece_length is not None else math.inf,
                closed_half_count=solver.closed_nodes // 2,
                near_factor=solver.near_factor,
            ),
            workers=cfg.workers,
            cache_operators=solver.cache_operators,
            near_field_threshold=cfg.observation.near_field_threshold,
        )

    def _persist(self, result: RunResult) -> None:
        persistence = self.persistence
        rows = self.plan.samples.nonnegative()
        times = result.times[rows]
        points = self.plan.observation_points
        scattered = result.scattered()[rows]
        self.artifacts.append(persistence.save_traces_csv("observation_scattered", times, points, scattered))
        if self.config.output.parquet:
            self.artifacts.append(persistence.save_traces_parquet("observation_scattered", times, points, scattered))
        history = [
            {"M": m, "point": p, "max_abs": float(np.max(np.abs(u[rows][:, p]), initial=0.0))}
            for m, u in enumerate(result.accumulator.history, start=1)
            for p in range(len(points))
        ]
        self.artifacts.append(persistence.save_table_csv("generation_history", history))
        stats = [
            {
                "M": s.generation,
                "data_max": s.data_max,
                "field_max": s.field_max,
                "boundary_residual": s.boundary_residual,
                "causality": s.causality,
                "huygens": s.huygens,
                "iterations": s.iterations,
                "seconds": s.seconds,
            }
            for s in result.report.stats
        ]
        self.artifacts.append(persistence.save_table_csv("generation_stats", stats))
        if self.snapshot_grid is not None and result.snapshots is not None:
            full = np.full((len(self.plan.snapshot_times), len(self.snapshot_mask)), np.nan)
            full[:, self.snapshot_mask] = result.snapshots
            self.artifacts.extend(
                persistence.save_snapshots(
                    self.snapshot_grid, self.plan.snapshot_times, full, self.config.output.snapshot_formats
                )
            )
        print(f"[PERSIST] {len(self.artifacts)} artifacts in {persistence.output_dir}", flush=True)
