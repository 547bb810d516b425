from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict

RUN_STARTED = "run_started"
GENERATION_STARTED = "generation_started"
SUBPROBLEM_SOLVED = "subproblem_solved"
TERM_PRUNED = "term_pruned"
GENERATION_COMPLETED = "generation_completed"
RUN_COMPLETED = "run_completed"


@dataclass(slots=True)
class Event:
    name: str
    payload: Dict[str, Any] = field(default_factory=dict)

RUN_EVENTS = (
    RUN_STARTED,
    GENERATION_STARTED,
    SUBPROBLEM_SOLVED,
    TERM_PRUNED,
    GENERATION_COMPLETED,
    RUN_COMPLETED,
)
