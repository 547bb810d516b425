from __future__ import annotations

import json
import math

import pytest

from fthms.config import RunConfig, apply_environment, build_incident, load_config, parse_config
from fthms.errors import ConfigError


def test_empty_document_resolves_defaults():
    config = parse_config({})
    assert config.geometry.mode == "interior"
    assert config.frequency.count == 501
    assert config.time.dt == 0.01
    assert config.incident.sigma == pytest.approx(math.sqrt(2.0))
    assert config.incident.band == (5.0, 25.0)
    assert config.workers == 1


def test_document_round_trip_is_stable():
    config = parse_config(
        {
            "name": "cavity",
            "geometry": {
                "mode": "open-cavity",
                "components": [{"curve": "circular_cavity", "params": {"radius": 1.0}, "patches": 6}],
            },
            "incident": {"variant": "pulse-plane", "t_lag": 3.0},
            "time": {"half_width": 8.0, "windows": 2, "n_steps": 400},
            "observation": {"points": [[0.0, 0.0]], "snapshot": {"nx": 5, "ny": 4, "times": [1.0, 2.5]}},
        }
    )
    assert config.time.dt is None and config.time.n_steps == 400
    assert parse_config(config.to_document()) == config


@pytest.mark.parametrize(
    "document, key",
    [
        ({"geometry": {"foo": 1}}, "geometry.foo"),
        ({"speed": 2}, "speed"),
        ({"time": {"dt": 0.1, "n_steps": 10}}, "time.n_steps"),
        ({"frequency": {"cutoff": 30.0}}, "frequency.bandwidth"),
        ({"decomposition": {"c0": 0.6, "c1": 0.7}}, "decomposition"),
        ({"geometry": {"components": [{"curve": "triangle"}]}}, "geometry.components[0].curve"),
        ({"geometry": {"components": [{}, {}]}}, "geometry.components"),
        ({"solver": {"closed_nodes": 31}}, "solver.closed_nodes"),
        ({"incident": {"variant": "spherical"}}, "incident.variant"),
        ({"incident": {"sigma": -1.0}}, "incident.sigma"),
        ({"workers": 0}, "workers"),
        ({"scattering": {"generations": 2.5}}, "scattering.generations"),
        ({"observation": {"points": [[0.0]]}}, "observation.points[0]"),
    ],
)
def test_invalid_documents_name_the_key(document, key):
    with pytest.raises(ConfigError) as info:
        parse_config(document)
    assert info.value.key == key
    assert str(info.value).startswith(f"Invalid config key '{key}'")


def test_echo_is_written(tmp_path):
    parse_config({"name": "echo"}, echo_dir=tmp_path)
    echoed = json.loads((tmp_path / "resolved_config.json").read_text(encoding="utf-8"))
    assert echoed["name"] == "echo"
    assert echoed["time"]["half_width"] == 10.0


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(broken)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"workers": 3}), encoding="utf-8")
    assert load_config(good).workers == 3


def test_environment_overrides():
    config = apply_environment(RunConfig(), {"FTHMS_WORKERS": "4", "FTHMS_OUTPUT_DIR": "/tmp/elsewhere"})
    assert config.workers == 4
    assert config.output.directory == "/tmp/elsewhere"
    assert apply_environment(RunConfig(), {}).workers == 1
    with pytest.raises(ConfigError):
        apply_environment(RunConfig(), {"FTHMS_WORKERS": "many"})
    with pytest.raises(ConfigError):
        apply_environment(RunConfig(), {"FTHMS_WORKERS": "0"})


def test_build_incident_carries_every_field():
    config = parse_config({"incident": {"variant": "multi-pulse", "pulses": 3, "spacing": 7.5}}).incident
    spec = build_incident(config)
    assert (spec.variant, spec.pulses, spec.spacing) == ("multi-pulse", 3, 7.5)
