from __future__ import annotations

import math

import numpy as np
import pytest

from fthms.core import events
from fthms.core.event_bus import EventBus
from fthms.errors import DependencyError, ParameterDomainError
from fthms.ftransform import FrequencyGrid, TimeWindowPartition, build_time_samples
from fthms.geometry.boundary import ScatteringBoundary
from fthms.incident.fields import GAUSSIAN_PLANE, IncidentFieldSpec
from fthms.multiscatter.layout import PatchSystem
from fthms.multiscatter.models import (
    DiscretizationSettings,
    RunPlan,
    SolutionAccumulator,
    SubSolution,
    guarantee_time,
)
from fthms.multiscatter.recursion import build_vtilde, init_first_generation, next_generation_data, prune_converged
from fthms.multiscatter.runner import MultipleScatteringRunner
from fthms.multiscatter.solver import SubproblemSolver

STEPS = 5


@pytest.fixture(scope="module")
def system(three_patch_disc):
    boundary = ScatteringBoundary([three_patch_disc])
    return PatchSystem(boundary, DiscretizationSettings(nodes_per_piece=8), np.array([[0.0, 0.0]]))


def _plan(mode="interior", **overrides):
    partition = TimeWindowPartition(8.0, 2)
    values = dict(
        mode=mode,
        generations=3,
        partition=partition,
        grid=FrequencyGrid(),
        samples=build_time_samples(partition, dt=0.1),
        observation_points=np.array([[0.0, 0.0]]),
    )
    values.update(overrides)
    return RunPlan(**values)


def _sub(system, k, m, value):
    traces = {r: np.full((STEPS, system.patches[r].size), value) for r, _ in system.receivers(k)}
    size = system.patches[k].size
    return SubSolution(k, m, traces, np.zeros((STEPS, size)), np.full((STEPS, 1), value))


def test_guarantee_time():
    assert guarantee_time(3, 0.5, 2.0) == pytest.approx(0.75)
    assert guarantee_time(4, math.inf) == math.inf
    with pytest.raises(ParameterDomainError):
        guarantee_time(1, 1.0, 0.0)


def test_run_plan_validation():
    with pytest.raises(ParameterDomainError):
        _plan(mode="transmission")
    with pytest.raises(ParameterDomainError):
        _plan(generations=0)
    with pytest.raises(ParameterDomainError):
        _plan(prune_tol=-1.0)
    assert _plan(observation_points=[0.1, 0.2]).observation_points.shape == (1, 2)


def test_first_generation_is_windowed_incident(system):
    incident = {p.index: np.ones((STEPS, p.size)) for p in system.patches}
    first = init_first_generation(system, incident)
    assert first.generation == 1
    for patch in system.patches:
        np.testing.assert_allclose(first.data[patch.index], -np.broadcast_to(patch.chi, (STEPS, patch.size)))


def test_masked_sum_drops_neighbor_overlaps(system):
    j = 0
    traces = {k: np.ones((STEPS, system.patches[j].size)) for k in (1, 2)}
    total = build_vtilde(system, j, traces)
    expected = sum((~system.overlap_nodes(j, k)).astype(float) for k in (1, 2))
    np.testing.assert_allclose(total, np.broadcast_to(expected, total.shape))
    with pytest.raises(DependencyError):
        build_vtilde(system, j, {1: traces[1]})


def test_next_generation_skips_pruned_terms(system):
    subs = {k: _sub(system, k, 1, 1.0) for k in range(system.count)}
    full = next_generation_data(system, 1, subs)
    pruned = next_generation_data(system, 1, subs, pruned={(0, 1), (1, 1), (2, 1)})
    assert full.generation == 2
    assert any(not full.is_zero(j) for j in full.data)
    assert all(pruned.is_zero(j) for j in pruned.data)


def test_prune_converged_uses_trailing_rows(system):
    accumulator = SolutionAccumulator(np.zeros((STEPS, 1)), {})
    quiet = _sub(system, 0, 2, 1e-12)
    loud = _sub(system, 1, 2, 1.0)
    dropped = prune_converged(accumulator, [quiet, loud], 1e-8, slice(2, None))
    assert [(j, m) for j, m, _ in dropped] == [(0, 2)]
    assert accumulator.pruned == {(0, 2)}
    assert accumulator.term_magnitudes[(1, 2)] == 1.0
    assert prune_converged(SolutionAccumulator(np.zeros((STEPS, 1)), {}), [quiet], 0.0, slice(None)) == []


def test_receivers_cover_every_other_patch(system):
    assert [r for r, _ in system.receivers(0)] == [1, 2]
    assert len(system.targets(0)) == system.patches[1].size + system.patches[2].size + 1
    assert system.observation_slice(0).stop == len(system.targets(0))


def test_runner_rejects_points_near_or_outside_the_boundary(three_patch_disc):
    boundary = ScatteringBoundary([three_patch_disc])
    incident = IncidentFieldSpec(GAUSSIAN_PLANE)
    with pytest.raises(ParameterDomainError):
        MultipleScatteringRunner(_plan(observation_points=np.array([[0.999, 0.0]])), boundary, incident)
    with pytest.raises(ParameterDomainError):
        MultipleScatteringRunner(_plan(observation_points=np.array([[2.0, 0.0]])), boundary, incident)


def test_silent_incident_stops_after_one_generation(three_patch_disc):
    boundary = ScatteringBoundary([three_patch_disc])
    plan = _plan(discretization=DiscretizationSettings(nodes_per_piece=8))
    bus = EventBus()
    seen = []
    bus.subscribe_many(
        [events.RUN_STARTED, events.SUBPROBLEM_SOLVED, events.GENERATION_COMPLETED, events.RUN_COMPLETED],
        lambda event: seen.append(event),
    )
    result = MultipleScatteringRunner(plan, boundary, IncidentFieldSpec(GAUSSIAN_PLANE, amplitude=0.0), bus).run()
    assert len(result.report.stats) == 1
    assert all(e.payload["skipped"] for e in seen if e.name == events.SUBPROBLEM_SOLVED)
    assert [e.name for e in seen][0] == events.RUN_STARTED
    assert seen[-1].name == events.RUN_COMPLETED
    assert not np.any(result.scattered())
    assert "pruned terms: 0" in result.report.to_text()


def _subsolution(system, k, scale):
    rng = np.random.default_rng(7 + k)
    size = system.patches[k].size
    traces = {r: scale * rng.standard_normal((STEPS, system.patches[r].size)) for r, _ in system.receivers(k)}
    spectra = {1: scale * rng.standard_normal((4, size)) + 0j}
    return SubSolution(k, 1, traces, scale * rng.standard_normal((STEPS, size)), scale * np.ones((STEPS, 1)), spectra)


def _empty_accumulator(system):
    return SolutionAccumulator(np.zeros((STEPS, 1)), {p.index: np.zeros((STEPS, p.size)) for p in system.patches})


def test_accumulator_is_linear_in_its_terms(system):
    first, second = _subsolution(system, 0, 1.0), _subsolution(system, 0, -0.5)
    separate = _empty_accumulator(system)
    separate.add(first)
    separate.add(second)
    combined = _empty_accumulator(system)
    combined.add(
        SubSolution(
            0,
            1,
            {r: first.node_traces[r] + second.node_traces[r] for r in first.node_traces},
            first.self_trace + second.self_trace,
            first.observation + second.observation,
            {1: first.spectra[1] + second.spectra[1]},
        )
    )
    np.testing.assert_allclose(separate.observation, combined.observation)
    for index in separate.boundary:
        np.testing.assert_allclose(separate.boundary[index], combined.boundary[index])
    np.testing.assert_allclose(separate.densities[(0, 1)], combined.densities[(0, 1)])
    np.testing.assert_allclose(separate.boundary[0], first.self_trace + second.self_trace)


def test_self_trace_follows_the_solved_densities(system, monkeypatch):
    plan = _plan()
    solver = SubproblemSolver(system, plan)
    t = plan.samples.times
    patch = system.patches[0]
    data = np.outer(np.exp(-((t - 4.0) ** 2)) * np.cos(5.0 * (t - 4.0)), patch.chi)
    inside = (t >= 0.0) & (t <= plan.partition.horizon)
    scale = float(np.max(np.abs(data)))

    solved = solver.solve_subproblem(0, 1, data)
    assert np.max(np.abs(solved.self_trace[inside] - data[inside])) < 1e-4 * scale

    solve = solver._solve
    monkeypatch.setattr(solver, "_solve", lambda j, i, matrix, rhs: (1.01 * solve(j, i, matrix, rhs)[0], 0))
    perturbed = solver.solve_subproblem(0, 1, data)
    np.testing.assert_allclose(perturbed.self_trace, 1.01 * solved.self_trace, rtol=1e-9, atol=1e-12 * scale)
    assert np.max(np.abs(perturbed.self_trace[inside] - data[inside])) > 5e-3 * scale
