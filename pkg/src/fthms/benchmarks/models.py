from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional

from fthms.harness.checks import CheckResult
from fthms.harness.metrics import ErrorReport
from fthms.multiscatter.runner import RunResult


@dataclass(slots=True)
class BenchmarkOutcome:
    name: str
    output_dir: Path
    checks: List[CheckResult] = field(default_factory=list)
    artifacts: List[Path] = field(default_factory=list)
    result: Optional[RunResult] = None
    errors: Optional[ErrorReport] = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> Optional[CheckResult]:
        return next((c for c in self.checks if c.name == name), None)


@dataclass(frozen=True, slots=True)
class BenchmarkSpec:
    name: str
    description: str
    execute: Callable[[Path, int], BenchmarkOutcome]  # (output dir, workers)
    smoke: bool = False  # smoke runs assert the run-level checks only
