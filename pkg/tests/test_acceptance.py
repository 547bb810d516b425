from __future__ import annotations

import pytest

from fthms.benchmarks.catalog import QUICK_ERROR_TOL, list_benchmarks, run_benchmark
from fthms.errors import ConfigError
from fthms.harness.acceptance import QUICK_BENCHMARKS, AcceptanceSuite, partition_check


def test_fast_criteria_pass(tmp_path, capsys):
    results = AcceptanceSuite(tmp_path).run([1, 2, 8, 10])
    assert [r.name for r in results] == ["single_layer_eigenvalues", "cfie_point_source", "partition_of_unity", "inverse_transform"]
    failed = [r.line() for r in results if not r.passed]
    assert not failed, failed
    assert "[ACCEPT] criterion 10" in capsys.readouterr().out


def test_quick_criteria_pass(tmp_path):
    suite = AcceptanceSuite(tmp_path, quick=True)
    results = suite.run([3, 4, 5, 6, 7, 9, 11])
    failed = [r.line() for r in results if not r.passed]
    assert not failed, failed
    written = {path.name for path in tmp_path.iterdir()}
    assert set(QUICK_BENCHMARKS.values()) <= written
    assert not written & set(QUICK_BENCHMARKS)

    errors = suite.outcome("disc-interior-exact").errors
    assert errors.per_generation[10] < QUICK_ERROR_TOL
    assert errors.per_generation[10] < 0.1 * errors.per_generation[1]


def test_partition_check_covers_disc_and_cavity():
    assert partition_check().passed


def test_unknown_criterion(tmp_path):
    with pytest.raises(ConfigError) as info:
        AcceptanceSuite(tmp_path).run([12])
    assert info.value.key == "check.only"


def test_catalog_flags_smoke_runs():
    specs = {spec.name: spec for spec in list_benchmarks()}
    assert {"h-shape-smoke", "open-arcs-smoke", "nine-obstacles-smoke", "rocket-cavity-smoke"} == {
        name for name, spec in specs.items() if spec.smoke
    }
    assert "cavity-iterations" in specs
    assert set(QUICK_BENCHMARKS.values()) <= set(specs)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["h-shape-smoke", "open-arcs-smoke", "nine-obstacles-smoke", "rocket-cavity-smoke"])
def test_smoke_benchmarks(name, tmp_path):
    outcome = run_benchmark(name, tmp_path / name)
    assert outcome.passed, [check.line() for check in outcome.checks if not check.passed]


@pytest.mark.slow
def test_full_acceptance(tmp_path):
    results = AcceptanceSuite(tmp_path, workers=2).run()
    failed = [r.line() for r in results if not r.passed]
    assert not failed, failed
