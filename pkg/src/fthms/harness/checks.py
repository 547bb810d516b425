from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from fthms.ftransform.partition import TimeWindowPartition
from fthms.geometry.boundary import ScatteringBoundary
from fthms.harness.huygens import DEFAULT_TOL, observation_silence
from fthms.multiscatter.runner import RunResult

POU_TOL = 1e-14
POU_SAMPLES = 4001


@dataclass(slots=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        text = f"[CHECK] {state} {self.name}: value={self.value:.3e} threshold={self.threshold:.3e}"
        return f"{text} ({self.detail})" if self.detail else text


def boundary_residual(result: RunResult) -> List[float]:
    """max |u_m + u^i| over boundary nodes for 0 ≤ t ≤ min(T(m), horizon), one entry per generation."""
    return [s.boundary_residual for s in result.report.stats]


def generation_causality(result: RunResult) -> List[float]:
    """max |g_{j,m}| for t ≤ T(m − 1) relative to max |u^i|, one entry per generation."""
    return [s.causality for s in result.report.stats]


def check_huygens(result: RunResult, tol: float = DEFAULT_TOL) -> CheckResult:
    probes = observation_silence(result, tol)
    # Probe thresholds are tol·max|u^i|; report the probe maxima on the same relative scale.
    worst_probe = max((tol * p.max_before / p.threshold for p in probes if p.threshold > 0.0), default=0.0)
    worst_patch = max((s.huygens for s in result.report.stats), default=0.0)
    value = max(worst_probe, worst_patch)
    return CheckResult(
        "huygens_silence",
        value <= tol,
        value,
        tol,
        f"probes={len(probes)} probe_max={worst_probe:.2e} off_patch_max={worst_patch:.2e}",
    )


def check_causality(result: RunResult, tol: float = DEFAULT_TOL) -> CheckResult:
    values = generation_causality(result)
    value = max(values, default=0.0)
    return CheckResult("generation_causality", value <= tol, value, tol, f"generations={len(values)}")


def partition_of_unity_error(boundary: ScatteringBoundary, samples: int = POU_SAMPLES) -> float:
    worst = 0.0
    for decomp in boundary.components:
        lo, hi = decomp.curve.interval
        theta = np.linspace(lo, hi, samples, endpoint=not decomp.curve.closed)
        total = sum(decomp.chi(j, theta) for j in range(decomp.count))
        worst = max(worst, float(np.max(np.abs(total - 1.0))))
    return worst


def window_sum_error(partition: TimeWindowPartition, samples: int = POU_SAMPLES) -> float:
    t = np.linspace(0.0, partition.horizon, samples)
    return float(np.max(np.abs(partition.total(t) - 1.0)))


def check_partition(boundary: ScatteringBoundary, partition: TimeWindowPartition, tol: float = POU_TOL) -> CheckResult:
    pou = partition_of_unity_error(boundary)
    windows = window_sum_error(partition)
    value = max(pou, windows)
    return CheckResult("partition_of_unity", value <= tol, value, tol, f"chi={pou:.1e} windows={windows:.1e}")


def run_checks(result: RunResult, tol: float = DEFAULT_TOL) -> List[CheckResult]:
    """Checks every run must pass: silence before arrival, generation causality, both partitions of unity."""
    return [
        check_huygens(result, tol),
        check_causality(result, tol),
        check_partition(result.system.boundary, result.plan.partition),
    ]
