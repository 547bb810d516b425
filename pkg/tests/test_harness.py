from __future__ import annotations

import math

import numpy as np
import pytest

from fthms.bie.linsolve import SolverSettings
from fthms.config import parse_config
from fthms.errors import ConfigError, ParameterDomainError
from fthms.ftransform import TimeWindowPartition
from fthms.geometry.boundary import ScatteringBoundary
from fthms.geometry.catalog import circular_cavity
from fthms.harness.checks import CheckResult, check_partition, window_sum_error
from fthms.harness.huygens import chordal_distance, data_onset, huygens_check
from fthms.harness.iterations import iteration_study
from fthms.harness.metrics import align_traces, error_metric, error_report
from fthms.harness.reference import compare_to_reference, reference_key, refine_config
from fthms.storage.reference_store import ReferenceStore


def test_error_metric_restricts_to_the_time_range():
    times = np.linspace(0.0, 10.0, 11)
    numeric = np.zeros((11, 2))
    reference = np.zeros((11, 2))
    reference[9, 1] = 0.5
    assert error_metric(numeric, reference, times, (0.0, 8.0)) == 0.0
    assert error_metric(numeric, reference, times, (0.0, 10.0)) == 0.5
    with pytest.raises(ParameterDomainError):
        error_metric(numeric, reference[:, :1], times, (0.0, 1.0))
    with pytest.raises(ParameterDomainError):
        error_metric(numeric, reference, times, (20.0, 30.0))


def test_error_report_tracks_generations():
    times = np.linspace(0.0, 1.0, 5)
    points = np.array([[0.0, 0.0], [0.2, 0.0]])
    reference = np.ones((5, 2))
    history = [np.zeros((5, 2)), np.full((5, 2), 0.9), np.ones((5, 2))]
    report = error_report(points, times, history[-1], reference, (0.0, 1.0), "exact-formula", history)
    assert report.error == 0.0
    assert report.per_point == [0.0, 0.0]
    assert [row["M"] for row in report.rows()] == [1, 2, 3]
    assert report.per_generation[1] == pytest.approx(1.0)
    assert report.per_generation[2] == pytest.approx(0.1)


def test_align_traces_copies_subsamples_and_interpolates():
    ref_times = np.linspace(0.0, 2.0, 41)
    ref = np.column_stack([ref_times**2, np.sin(ref_times)])
    assert align_traces(ref_times, ref_times, ref) is ref
    coarse = ref_times[::4]
    np.testing.assert_array_equal(align_traces(coarse, ref_times, ref), ref[::4])
    shifted = np.array([0.33, 1.01])
    np.testing.assert_allclose(align_traces(shifted, ref_times, ref)[:, 0], shifted**2, atol=1e-12)
    with pytest.raises(ParameterDomainError):
        align_traces(np.array([3.0]), ref_times, ref)


def test_data_onset_and_distance():
    times = np.linspace(0.0, 5.0, 51)
    data = np.where(times >= 2.0, 1.0, 0.0)
    assert data_onset(times, data) == pytest.approx(2.0)
    assert data_onset(times, np.zeros(51)) == math.inf
    support = np.array([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(chordal_distance(np.array([[3.0, 0.0]]), support), [2.0])
    assert chordal_distance(np.zeros((1, 2)), np.zeros((0, 2)))[0] == math.inf


def test_huygens_check_flags_early_arrivals():
    times = np.linspace(0.0, 10.0, 101)
    probes = np.array([[3.0, 0.0], [5.0, 0.0]])
    support = np.array([[1.0, 0.0]])
    field = np.zeros((101, 2))
    field[times >= 4.5, 0] = 1.0  # arrives after t0 + 2
    field[times >= 3.0, 1] = 1.0  # arrives before t0 + 4
    checks = huygens_check(times, field, probes, support, t0=2.5, workers=2)
    assert [c.passed for c in checks] == [True, False]
    assert checks[0].arrival == pytest.approx(4.5)
    assert checks[0].margin == math.inf
    with pytest.raises(ParameterDomainError):
        huygens_check(times, field, probes, support, t0=0.0, c=0.0)


def test_check_result_line():
    assert CheckResult("pou", True, 1e-15, 1e-14).line() == "[CHECK] PASS pou: value=1.000e-15 threshold=1.000e-14"
    failed = CheckResult("huygens_silence", False, 2e-3, 1e-6, "probes=3").line()
    assert failed.startswith("[CHECK] FAIL huygens_silence") and failed.endswith("(probes=3)")


def test_partition_check_on_an_open_cavity():
    from fthms.geometry.patches import build_patch_decomposition

    boundary = ScatteringBoundary([build_patch_decomposition(circular_cavity(), 6)])
    result = check_partition(boundary, TimeWindowPartition(10.0, 5))
    assert result.passed, result.line()
    assert window_sum_error(TimeWindowPartition(4.0, 3)) < 1e-14


def test_iteration_study_needs_the_iterative_solver():
    with pytest.raises(ConfigError):
        iteration_study(circular_cavity(), [5.0], settings=SolverSettings(method="direct"))


def test_iteration_study_records_each_patch():
    rows = iteration_study(circular_cavity(), [3.0], patches=4, nodes_per_piece=12, max_piece_length=math.inf)
    assert len(rows) == 1
    row = rows[0]
    assert len(row.patch_iterations) == 4
    assert row.full_converged and all(row.patch_converged)
    assert row.as_row()["max_patch"] == row.max_patch


def test_refined_config_and_reference_key():
    config = parse_config({"time": {"dt": 0.02}, "frequency": {"count": 201}})
    fine = refine_config(config, 2)
    assert fine.frequency.count == 401
    assert fine.time.dt == pytest.approx(0.01)
    assert fine.solver.nodes_per_piece == 2 * config.solver.nodes_per_piece
    key = reference_key(config, 2)
    assert key["refinement"] == 2 and key["base"]["count"] == 201
    assert reference_key(config, 3) != key
    with pytest.raises(ConfigError):
        refine_config(config, 1)


def test_compare_to_reference_uses_stored_trace(tmp_path):
    store = ReferenceStore(tmp_path)
    times = np.linspace(0.0, 4.0, 9)
    values = np.column_stack([np.cos(times)])
    store.put({"case": 1}, "observation", times, values, provenance="refined-run x2")
    reference = store.get({"case": 1}, "observation")
    report = compare_to_reference(times, values + 1e-3, np.zeros((1, 2)), reference, t_end=4.0)
    assert report.error == pytest.approx(1e-3)
    assert report.provenance.startswith("reference:")
