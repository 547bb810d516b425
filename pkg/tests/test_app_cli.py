from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from fthms.app import SimulationApp
from fthms.config import parse_config
from fthms.core import events
from fthms.core.event_bus import EventBus
from fthms.errors import ConfigError
from fthms.main import main
from fthms.multiscatter.runner import attach_console


def _silent_document(out_dir):
    return {
        "name": "silent",
        "geometry": {"mode": "interior", "components": [{"curve": "circle", "patches": 3}]},
        "incident": {"variant": "gaussian-plane", "amplitude": 0.0},
        "time": {"half_width": 8.0, "windows": 2, "dt": 0.1},
        "scattering": {"generations": 2},
        "solver": {"nodes_per_piece": 8},
        "observation": {
            "points": [[0.0, 0.0], [0.3, 0.1]],
            "snapshot": {"x_range": [-0.5, 0.5], "y_range": [-0.5, 0.5], "nx": 3, "ny": 3, "times": [1.0]},
        },
        "output": {"directory": str(out_dir)},
    }


def test_event_bus_dispatch_order():
    bus = EventBus()
    seen = []
    bus.subscribe("a", lambda e: seen.append(("first", e.payload["x"])))
    bus.subscribe_many(["a", "b"], lambda e: seen.append((e.name, e.payload.get("x"))))
    bus.emit("a", x=1)
    bus.emit("b")
    bus.emit("unheard", x=3)
    assert seen == [("first", 1), ("a", 1), ("b", None)]
    counts = bus.subscriber_count()
    assert (counts["a"], counts["b"]) == (2, 1)


def test_app_writes_every_artifact(tmp_path):
    config = parse_config(_silent_document(tmp_path / "run"))
    app = SimulationApp(config)
    result = app.run()
    manifest = app.finalize()
    out = tmp_path / "run"
    for name in (
        "resolved_config.json",
        "observation_scattered.csv",
        "observation_scattered.parquet",
        "generation_history.csv",
        "generation_stats.csv",
        "run_report.txt",
    ):
        assert (out / name).is_file(), name
    assert len(list((out / "snapshots").glob("*.pgm"))) == 1
    assert not np.any(result.scattered())
    with manifest.open(newline="", encoding="utf-8") as fp:
        paths = {row["path"] for row in csv.DictReader(fp)}
    assert "run_report.txt" in paths and "manifest.csv" not in paths


def test_app_rejects_open_arcs_in_interior_mode(tmp_path):
    document = _silent_document(tmp_path)
    document["geometry"]["components"] = [{"curve": "segment", "patches": 2}]
    with pytest.raises(ConfigError) as info:
        SimulationApp(parse_config(document), persist=False)
    assert info.value.key == "geometry.components[0].curve"


def test_cli_run_writes_log(tmp_path, capsys):
    config_path = tmp_path / "silent.json"
    config_path.write_text(json.dumps(_silent_document(tmp_path / "from-file")), encoding="utf-8")
    out = tmp_path / "cli"
    assert main(["--out", str(out), "run", str(config_path)]) == 0
    console = capsys.readouterr().out
    assert "[BOOT] command=run" in console
    assert "[DONE] generations=1" in console
    assert "[BOOT] command=run" in (out / "runtime.log").read_text(encoding="utf-8")
    assert (out / "manifest.csv").is_file()


def test_cli_lists_benchmarks(capsys):
    assert main(["list-benches"]) == 0
    listing = capsys.readouterr().out
    assert "disc-interior-exact" in listing
    assert "[smoke]" in listing


def test_cli_check_accepts_quick(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "check", "--quick", "--only", "8"]) == 0
    console = capsys.readouterr().out
    assert "quick=True" in console
    assert "[ACCEPT] 1/1 passed" in console


@pytest.mark.parametrize(
    "argv",
    [
        ["--seed-free", "list-benches"],
        ["--workers", "0", "list-benches"],
        ["bench", "no-such-bench"],
        ["check", "--only", "99"],
        ["run", "missing.json"],
    ],
)
def test_cli_errors_exit_with_two(argv, tmp_path, capsys):
    assert main(["--out", str(tmp_path)] + argv) == 2
    assert "[ERROR] Invalid config key" in capsys.readouterr().err


def test_console_listens_to_every_run_event():
    bus = EventBus()
    attach_console(bus)
    assert bus.subscriber_count() == {name: 1 for name in events.RUN_EVENTS}
