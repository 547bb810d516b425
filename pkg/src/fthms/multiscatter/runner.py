from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from fthms.core import events
from fthms.core.event_bus import EventBus
from fthms.core.events import Event
from fthms.errors import ParameterDomainError
from fthms.geometry.boundary import ScatteringBoundary
from fthms.incident.fields import IncidentFieldSpec, eval_time
from fthms.multiscatter.layout import PatchSystem
from fthms.multiscatter.models import (
    GenerationData,
    GenerationStats,
    RunPlan,
    RunReport,
    SolutionAccumulator,
    SubSolution,
    guarantee_time,
)
from fthms.multiscatter.recursion import init_first_generation, next_generation_data, prune_converged
from fthms.multiscatter.solver import SubproblemSolver


@dataclass(slots=True)
class RunResult:
    plan: RunPlan
    system: PatchSystem
    accumulator: SolutionAccumulator
    report: RunReport
    incident_nodes: Dict[int, np.ndarray]
    incident_observation: np.ndarray
    generations: List[GenerationData] = field(default_factory=list)
    snapshots: np.ndarray | None = None  # snapshot times × snapshot points

    @property
    def times(self) -> np.ndarray:
        return self.plan.samples.times

    def rows_until(self, t_end: float) -> np.ndarray:
        """Time rows with t ≤ min(t_end, horizon)."""
        limit = min(t_end, self.plan.partition.horizon)
        return self.times <= limit + 1e-12

    def scattered(self, generation: int | None = None) -> np.ndarray:
        """u_m at the observation points (times × points); the last generation by default."""
        if generation is None:
            return self.accumulator.observation
        return self.accumulator.history[generation - 1]


class MultipleScatteringRunner:
    """Nested generation / patch / window / frequency loops of the multiple-scattering solver."""

    def __init__(
        self,
        plan: RunPlan,
        boundary: ScatteringBoundary,
        incident: IncidentFieldSpec,
        bus: EventBus | None = None,
    ) -> None:
        self.plan = plan
        self.boundary = boundary
        self.incident = incident
        self.bus = bus or EventBus()
        self._last_subs: Dict[int, SubSolution] = {}
        self._validate_points(plan.observation_points, "observation")
        self._validate_points(plan.snapshot_points, "snapshot")

    def _validate_points(self, points: np.ndarray, label: str) -> None:
        if not len(points):
            return
        distance = self.boundary.distance(points)
        if np.any(distance <= self.plan.near_field_threshold):
            worst = int(np.argmin(distance))
            raise ParameterDomainError(
                f"{label} point {points[worst].tolist()} lies within {self.plan.near_field_threshold:g} of the "
                "boundary; near-boundary evaluation is not supported, move it further inside the domain"
            )
        inside = self.boundary.contains_point(points)
        if self.plan.mode == "interior" and not np.all(inside):
            raise ParameterDomainError(f"Interior runs need every {label} point inside the boundary")
        if self.plan.mode == "exterior-multi-obstacle" and np.any(inside):
            raise ParameterDomainError(f"Exterior runs need every {label} point outside the obstacles")

    def run(self) -> RunResult:
        plan = self.plan
        clock = time.perf_counter()
        system = PatchSystem(self.boundary, plan.discretization, plan.observation_points)
        timings = {"geometry": time.perf_counter() - clock}

        clock = time.perf_counter()
        solver = SubproblemSolver(system, plan)
        times = plan.samples.times
        incident_nodes = {p.index: eval_time(self.incident, p.points, times) for p in system.patches}
        incident_obs = eval_time(self.incident, plan.observation_points, times)
        timings["transforms"] = time.perf_counter() - clock

        t_guarantee = guarantee_time(plan.generations, self.boundary.delta_min, plan.c)
        incident_max = max((float(np.max(np.abs(u))) for u in incident_nodes.values()), default=0.0)
        report = RunReport(
            plan.mode, plan.generations, self.boundary.delta_min, t_guarantee, plan.partition.horizon, incident_max
        )
        accumulator = SolutionAccumulator(
            observation=np.zeros((plan.samples.size, len(plan.observation_points))),
            boundary={p.index: np.zeros((plan.samples.size, p.size)) for p in system.patches},
        )
        result = RunResult(plan, system, accumulator, report, incident_nodes, incident_obs)
        self.bus.emit(
            events.RUN_STARTED,
            mode=plan.mode,
            patches=system.count,
            delta_min=self.boundary.delta_min,
            guarantee_time=t_guarantee,
            frequencies=plan.grid.size,
            time_steps=plan.samples.size,
        )

        trailing = slice(plan.samples.index_of(plan.partition.last_center - plan.partition.half_width), None)
        generation = init_first_generation(system, incident_nodes)
        clock = time.perf_counter()
        for m in range(1, plan.generations + 1):
            result.generations.append(generation)
            stats = self._run_generation(solver, system, generation, result, trailing)
            report.stats.append(stats)
            if m == plan.generations:
                break
            generation = next_generation_data(system, m, self._last_subs, accumulator.pruned)
            if all(generation.is_zero(j) for j in generation.data):
                print(f"[GEN] generation {m + 1} data vanish identically; recursion stops")
                break
        timings["generations"] = time.perf_counter() - clock

        if len(plan.snapshot_points) and len(plan.snapshot_times):
            clock = time.perf_counter()
            result.snapshots = solver.evaluate_points(
                accumulator.densities, plan.snapshot_points, plan.snapshot_times
            )
            timings["snapshots"] = time.perf_counter() - clock
        report.timings = timings
        self.bus.emit(events.RUN_COMPLETED, report=report)
        return result

    def _run_generation(
        self,
        solver: SubproblemSolver,
        system: PatchSystem,
        generation: GenerationData,
        result: RunResult,
        trailing: slice,
    ) -> GenerationStats:
        plan = self.plan
        m = generation.generation
        self.bus.emit(events.GENERATION_STARTED, generation=m, data_max=generation.max_magnitude())
        clock = time.perf_counter()
        patches = sorted(generation.data)
        workers = max(1, min(plan.workers, len(patches)))
        if workers == 1:
            solved = [solver.solve_subproblem(j, m, generation.data[j]) for j in patches]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                solved = list(pool.map(lambda j: solver.solve_subproblem(j, m, generation.data[j]), patches))
        subs = {sub.patch: sub for sub in solved}
        accumulator = result.accumulator
        for j in patches:
            accumulator.add(subs[j])
            self.bus.emit(
                events.SUBPROBLEM_SOLVED,
                patch=j,
                generation=m,
                skipped=subs[j].skipped,
                iterations=max(subs[j].iterations, default=0),
            )
        accumulator.close_generation()
        self._last_subs = subs

        for j, gen, magnitude in prune_converged(accumulator, solved, plan.prune_tol, trailing):
            result.report.pruned.append((j, gen, magnitude))
            self.bus.emit(events.TERM_PRUNED, patch=j, generation=gen, magnitude=magnitude)

        scale = result.report.incident_max or 1.0
        delta = self.boundary.delta_min
        stats = GenerationStats(
            generation=m,
            data_max=generation.max_magnitude(),
            field_max=max((s.max_magnitude() for s in solved), default=0.0),
            boundary_residual=self._boundary_residual(result, guarantee_time(m, delta, plan.c)),
            causality=self._causality(result, generation, guarantee_time(m - 1, delta, plan.c)) / scale,
            huygens=self._huygens(result, solved, guarantee_time(m, delta, plan.c)) / scale,
            iterations=max((max(s.iterations, default=0) for s in solved), default=0),
            seconds=time.perf_counter() - clock,
        )
        self.bus.emit(events.GENERATION_COMPLETED, stats=stats)
        return stats

    def _boundary_residual(self, result: RunResult, t_end: float) -> float:
        rows = result.rows_until(t_end) & (result.times >= 0.0)
        worst = 0.0
        for j, total in result.accumulator.boundary.items():
            residual = total[rows] + result.incident_nodes[j][rows]
            if residual.size:
                worst = max(worst, float(np.max(np.abs(residual))))
        return worst

    def _causality(self, result: RunResult, generation: GenerationData, t_end: float) -> float:
        rows = result.rows_until(t_end)
        return max((float(np.max(np.abs(g[rows]), initial=0.0)) for g in generation.data.values()), default=0.0)

    def _huygens(self, result: RunResult, solved: List[SubSolution], t_end: float) -> float:
        rows = result.rows_until(t_end)
        worst = 0.0
        for sub in solved:
            for receiver, trace in sub.node_traces.items():
                off = ~result.system.overlap_nodes(receiver, sub.patch)
                if np.any(off):
                    worst = max(worst, float(np.max(np.abs(trace[rows][:, off]), initial=0.0)))
        return worst


def attach_console(bus: EventBus) -> None:
    """Tagged progress lines for a run."""

    def on_started(event: Event) -> None:
        p = event.payload
        print(
            f"[GEOM] mode={p['mode']} patches={p['patches']} delta_min={p['delta_min']:.4g} "
            f"T(M)={p['guarantee_time']:.4g} frequencies={p['frequencies']} steps={p['time_steps']}",
            flush=True,
        )

    def on_generation(event: Event) -> None:
        print(f"[GEN] m={event.payload['generation']} data_max={event.payload['data_max']:.3e}", flush=True)

    def on_solved(event: Event) -> None:
        p = event.payload
        state = "skipped" if p["skipped"] else f"iterations={p['iterations']}"
        print(f"[SOLVE] patch={p['patch']} m={p['generation']} {state}", flush=True)

    def on_pruned(event: Event) -> None:
        p = event.payload
        print(f"[PRUNE] v[{p['patch']},{p['generation']}] max={p['magnitude']:.3e}", flush=True)

    def on_completed(event: Event) -> None:
        s = event.payload["stats"]
        print(
            f"[GEN] m={s.generation} residual={s.boundary_residual:.3e} causality={s.causality:.3e} "
            f"huygens={s.huygens:.3e} in {s.seconds:.1f}s",
            flush=True,
        )

    def on_finished(event: Event) -> None:
        report = event.payload["report"]
        print(
            f"[DONE] generations={len(report.stats)} T(M)={report.guarantee_time:.4g} pruned={len(report.pruned)}",
            flush=True,
        )

    handlers = {
        events.RUN_STARTED: on_started,
        events.GENERATION_STARTED: on_generation,
        events.SUBPROBLEM_SOLVED: on_solved,
        events.TERM_PRUNED: on_pruned,
        events.GENERATION_COMPLETED: on_completed,
        events.RUN_COMPLETED: on_finished,
    }
    bus.subscribe_many(list(events.RUN_EVENTS), lambda event: handlers[event.name](event))


def run(
    plan: RunPlan,
    boundary: ScatteringBoundary,
    incident: IncidentFieldSpec,
    bus: EventBus | None = None,
) -> RunResult:
    return MultipleScatteringRunner(plan, boundary, incident, bus).run()
