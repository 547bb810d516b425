from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Any, Dict

import numpy as np

from fthms.app import SimulationApp
from fthms.config import RunConfig
from fthms.errors import ConfigError
from fthms.harness.metrics import ErrorReport, align_traces, error_report
from fthms.storage.reference_store import ReferenceStore, ReferenceTrace

TRACE_NAME = "observation"


def reference_key(config: RunConfig, refinement: int) -> Dict[str, Any]:
    """The part of a config a reference depends on: geometry, incidence, windows, probes, refinement."""
    document = config.to_document()
    return {
        "geometry": document["geometry"],
        "decomposition": document["decomposition"],
        "incident": document["incident"],
        "time": {"half_width": document["time"]["half_width"], "windows": document["time"]["windows"]},
        "scattering": document["scattering"],
        "frequency": {"cutoff": document["frequency"]["cutoff"], "bandwidth": document["frequency"]["bandwidth"]},
        "points": document["observation"]["points"],
        "base": {
            "nodes_per_piece": document["solver"]["nodes_per_piece"],
            "closed_nodes": document["solver"]["closed_nodes"],
            "count": document["frequency"]["count"],
            "dt": document["time"]["dt"],
            "n_steps": document["time"]["n_steps"],
        },
        "refinement": refinement,
    }


def refine_config(config: RunConfig, refinement: int) -> RunConfig:
    """Nodes per piece, closed nodes and frequency count scaled up; the time step scaled down."""
    if refinement < 2:
        raise ConfigError("reference.refinement", f"must be at least 2, got {refinement}")
    frequency = replace(config.frequency, count=refinement * (config.frequency.count - 1) + 1)
    solver = replace(
        config.solver,
        nodes_per_piece=refinement * config.solver.nodes_per_piece,
        closed_nodes=refinement * config.solver.closed_nodes,
    )
    if config.time.n_steps is not None:
        timing = replace(config.time, n_steps=refinement * config.time.n_steps)
    else:
        timing = replace(config.time, dt=config.time.dt / refinement)
    observation = replace(config.observation, snapshot=None)
    return replace(config, frequency=frequency, solver=solver, time=timing, observation=observation)


def make_reference(config: RunConfig, store: ReferenceStore, refinement: int = 2) -> ReferenceTrace:
    """Fine-discretization observation traces, computed once per key and then read back from the store."""
    key = reference_key(config, refinement)
    cached = store.get(key, TRACE_NAME)
    if cached is not None:
        print(f"[REF] reuse {cached.config_hash[:12]} ({cached.provenance})", flush=True)
        return cached
    fine = refine_config(config, refinement)
    app = SimulationApp(fine, persist=False)
    result = app.run()
    rows = app.plan.samples.nonnegative()
    times = result.times[rows]
    grid = app.plan.grid
    store.put(
        key,
        TRACE_NAME,
        times,
        result.scattered()[rows],
        provenance=f"refined-run x{refinement}",
        metadata={"dt": app.plan.samples.dt, "frequencies": grid.size, "generations": config.scattering.generations},
    )
    print(f"[REF] stored reference for '{config.name}' at refinement {refinement}", flush=True)
    return store.get(key, TRACE_NAME)


def compare_to_reference(
    times: np.ndarray,
    numeric: np.ndarray,
    points: np.ndarray,
    reference: ReferenceTrace,
    t_end: float,
) -> ErrorReport:
    aligned = align_traces(times, reference.times, reference.values)
    return error_report(points, times, numeric, aligned, (0.0, t_end), f"reference:{reference.config_hash}")


def default_store(root: Path | str = Path("data") / "references") -> ReferenceStore:
    return ReferenceStore(root)
