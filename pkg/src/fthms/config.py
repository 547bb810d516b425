from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from fthms.errors import ConfigError, FthmsError
from fthms.geometry.catalog import CURVE_BUILDERS
from fthms.incident.fields import VARIANTS, IncidentFieldSpec
from fthms.multiscatter.models import MODES
from fthms.storage.persistence import RunPersistence

SOLVER_METHODS = ("direct", "iterative", "auto")
SNAPSHOT_FORMATS = ("csv", "pgm")
DEFAULT_OUTPUT_DIR = Path("runs") / "latest"


@dataclass(slots=True)
class ComponentConfig:
    curve: str = "circle"
    params: Dict[str, Any] = field(default_factory=dict)
    patches: int = 3
    overlap_fraction: float = 1.0 / 3.0
    start: Optional[float] = None  # closed curves: parameter where patch 0 begins
    whole: bool = False


@dataclass(slots=True)
class GeometryConfig:
    mode: str = "interior"  # interior | exterior-multi-obstacle | exterior-open-arcs | open-cavity
    components: List[ComponentConfig] = field(default_factory=lambda: [ComponentConfig()])


@dataclass(slots=True)
class DecompositionConfig:
    c0: float = 1.0 / 3.0
    c1: float = 2.0 / 3.0


@dataclass(slots=True)
class IncidentConfig:
    variant: str = "gaussian-plane"
    amplitude: float = 1.0
    source: Tuple[float, float] = (0.0, 0.0)
    omega0: float = 15.0
    sigma: Optional[float] = None
    tau0: Optional[float] = None
    direction_angle: float = 0.0
    t_lag: float = 2.0
    pulses: int = 5
    spacing: float = 10.0
    band: Optional[Tuple[float, float]] = None
    band_count: int = 501


@dataclass(slots=True)
class FrequencyConfig:
    cutoff: float = 1.0  # w_c
    bandwidth: float = 25.0  # W
    count: int = 501  # J
    grading_count: int = 8  # P
    grading_power: int = 3  # p
    cc_order: int = 16
    low_frequency: bool = True
    matching_points: int = 25


@dataclass(slots=True)
class TimeConfig:
    half_width: float = 10.0  # H
    windows: int = 1  # Q
    dt: Optional[float] = 0.01
    n_steps: Optional[int] = None


@dataclass(slots=True)
class ScatteringConfig:
    generations: int = 8  # M
    prune_tol: float = 0.0
    c: float = 1.0


@dataclass(slots=True)
class SolverConfig:
    method: str = "direct"  # direct | iterative | auto
    tol: float = 1e-6
    restart: int = 50
    cap: int = 1000
    nodes_per_piece: int = 24
    max_piece_length: Optional[float] = None  # None: one piece per CoV segment
    closed_nodes: int = 128
    cache_operators: bool = False
    near_factor: float = 1.0


@dataclass(slots=True)
class SnapshotConfig:
    x_range: Tuple[float, float] = (-1.0, 1.0)
    y_range: Tuple[float, float] = (-1.0, 1.0)
    nx: int = 41
    ny: int = 41
    times: Tuple[float, ...] = ()


@dataclass(slots=True)
class ObservationConfig:
    points: Tuple[Tuple[float, float], ...] = ((0.5, 0.0),)
    near_field_threshold: float = 1e-2
    snapshot: Optional[SnapshotConfig] = None


@dataclass(slots=True)
class OutputConfig:
    directory: str = str(DEFAULT_OUTPUT_DIR)
    snapshot_formats: Tuple[str, ...] = SNAPSHOT_FORMATS
    parquet: bool = True


@dataclass(slots=True)
class RunConfig:
    name: str = "run"
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    decomposition: DecompositionConfig = field(default_factory=DecompositionConfig)
    incident: IncidentConfig = field(default_factory=IncidentConfig)
    frequency: FrequencyConfig = field(default_factory=FrequencyConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    scattering: ScatteringConfig = field(default_factory=ScatteringConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    observation: ObservationConfig = field(default_factory=ObservationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    workers: int = 1

    @property
    def output_dir(self) -> Path:
        return Path(self.output.directory)

    def to_document(self) -> Dict[str, Any]:
        return _jsonable(asdict(self))


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return None
    return value


class _Section:
    """Reads one mapping of the document; every consumed key is tracked so leftovers can be rejected."""

    def __init__(self, document: Any, prefix: str) -> None:
        if document is None:
            document = {}
        if not isinstance(document, Mapping):
            raise ConfigError(prefix, "must be an object")
        self.document = document
        self.prefix = prefix
        self.seen: set[str] = set()

    def key(self, name: str) -> str:
        return f"{self.prefix}.{name}" if self.prefix else name

    def raw(self, name: str, default: Any) -> Any:
        self.seen.add(name)
        return self.document.get(name, default)

    def has(self, name: str) -> bool:
        return name in self.document and self.document[name] is not None

    def finish(self) -> None:
        unknown = sorted(set(self.document) - self.seen)
        if unknown:
            raise ConfigError(self.key(unknown[0]), "unknown key")


def _f(
    section: _Section,
    name: str,
    default: Optional[float],
    positive: bool = False,
    minimum: Optional[float] = None,
    optional: bool = False,
) -> Optional[float]:
    value = section.raw(name, default)
    if value is None:
        if optional:
            return None
        raise ConfigError(section.key(name), "is required")
    if isinstance(value, bool):
        raise ConfigError(section.key(name), f"must be a number, got {value!r}")
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(section.key(name), f"must be a number, got {value!r}") from None
    if math.isnan(value):
        raise ConfigError(section.key(name), "must not be NaN")
    if positive and not value > 0.0:
        raise ConfigError(section.key(name), f"must be positive, got {value}")
    if minimum is not None and value < minimum:
        raise ConfigError(section.key(name), f"must be at least {minimum}, got {value}")
    return value


def _i(section: _Section, name: str, default: Optional[int], minimum: Optional[int] = None, optional: bool = False) -> Optional[int]:
    value = section.raw(name, default)
    if value is None:
        if optional:
            return None
        raise ConfigError(section.key(name), "is required")
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ConfigError(section.key(name), f"must be an integer, got {value!r}")
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigError(section.key(name), f"must be an integer, got {value!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(section.key(name), f"must be at least {minimum}, got {value}")
    return value


def _b(section: _Section, name: str, default: bool) -> bool:
    value = section.raw(name, default)
    if not isinstance(value, bool):
        raise ConfigError(section.key(name), f"must be true or false, got {value!r}")
    return value


def _s(section: _Section, name: str, default: str, choices: Tuple[str, ...] | None = None) -> str:
    value = section.raw(name, default)
    if not isinstance(value, str):
        raise ConfigError(section.key(name), f"must be a string, got {value!r}")
    value = value.strip()
    if choices is not None and value not in choices:
        raise ConfigError(section.key(name), f"must be one of {', '.join(choices)}, got '{value}'")
    return value


def _pair(section: _Section, name: str, default: Optional[Tuple[float, float]], optional: bool = False) -> Optional[Tuple[float, float]]:
    value = section.raw(name, default)
    if value is None:
        if optional:
            return None
        raise ConfigError(section.key(name), "is required")
    try:
        a, b = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(section.key(name), f"must be a pair of numbers, got {value!r}") from None
    return (a, b)


def _parse_component(document: Any, key: str) -> ComponentConfig:
    section = _Section(document, key)
    defaults = ComponentConfig()
    curve = _s(section, "curve", defaults.curve)
    if curve not in CURVE_BUILDERS:
        raise ConfigError(section.key("curve"), f"unknown curve '{curve}', expected one of {', '.join(sorted(CURVE_BUILDERS))}")
    params = section.raw("params", {})
    if not isinstance(params, Mapping):
        raise ConfigError(section.key("params"), "must be an object")
    whole = _b(section, "whole", defaults.whole)
    patches = _i(section, "patches", defaults.patches, minimum=1)
    overlap = _f(section, "overlap_fraction", defaults.overlap_fraction, positive=True)
    if not overlap < 0.5:
        raise ConfigError(section.key("overlap_fraction"), f"must lie in (0, 1/2), got {overlap}")
    start = _f(section, "start", None, optional=True)
    section.finish()
    return ComponentConfig(curve, dict(params), 1 if whole else patches, overlap, start, whole)


def _parse_geometry(document: Any) -> GeometryConfig:
    section = _Section(document, "geometry")
    mode = _s(section, "mode", "interior", MODES)
    raw = section.raw("components", None)
    if raw is None:
        components = [ComponentConfig()]
    elif isinstance(raw, list) and raw:
        components = [_parse_component(item, f"geometry.components[{i}]") for i, item in enumerate(raw)]
    else:
        raise ConfigError("geometry.components", "must be a non-empty list")
    section.finish()
    if mode == "interior" and len(components) != 1:
        raise ConfigError("geometry.components", "interior runs take exactly one closed component")
    return GeometryConfig(mode, components)


def _parse_decomposition(document: Any) -> DecompositionConfig:
    section = _Section(document, "decomposition")
    c0 = _f(section, "c0", 1.0 / 3.0, positive=True)
    c1 = _f(section, "c1", 2.0 / 3.0, positive=True)
    section.finish()
    if not c0 < 0.5 < c1 < 1.0:
        raise ConfigError("decomposition", f"needs 0 < c0 < 1/2 < c1 < 1, got ({c0}, {c1})")
    return DecompositionConfig(c0, c1)


def _parse_incident(document: Any) -> IncidentConfig:
    section = _Section(document, "incident")
    d = IncidentConfig()
    config = IncidentConfig(
        variant=_s(section, "variant", d.variant, VARIANTS),
        amplitude=_f(section, "amplitude", d.amplitude),
        source=_pair(section, "source", d.source),
        omega0=_f(section, "omega0", d.omega0, positive=True),
        sigma=_f(section, "sigma", None, positive=True, optional=True),
        tau0=_f(section, "tau0", None, optional=True),
        direction_angle=_f(section, "direction_angle", d.direction_angle),
        t_lag=_f(section, "t_lag", d.t_lag, positive=True),
        pulses=_i(section, "pulses", d.pulses, minimum=1),
        spacing=_f(section, "spacing", d.spacing, positive=True),
        band=_pair(section, "band", None, optional=True),
        band_count=_i(section, "band_count", d.band_count, minimum=3),
    )
    section.finish()
    if config.band is not None and not 0.0 < config.band[0] < config.band[1]:
        raise ConfigError("incident.band", f"needs 0 < lo < hi, got {config.band}")
    # Fill in the variant defaults so the echo shows the values actually used.
    spec = build_incident(config)
    config.sigma, config.tau0 = spec.sigma, spec.tau0
    config.band = tuple(float(v) for v in spec.band) if spec.band is not None else None
    return config


def _parse_frequency(document: Any) -> FrequencyConfig:
    section = _Section(document, "frequency")
    d = FrequencyConfig()
    config = FrequencyConfig(
        cutoff=_f(section, "cutoff", d.cutoff, positive=True),
        bandwidth=_f(section, "bandwidth", d.bandwidth, positive=True),
        count=_i(section, "count", d.count, minimum=3),
        grading_count=_i(section, "grading_count", d.grading_count, minimum=1),
        grading_power=_i(section, "grading_power", d.grading_power, minimum=1),
        cc_order=_i(section, "cc_order", d.cc_order, minimum=2),
        low_frequency=_b(section, "low_frequency", d.low_frequency),
        matching_points=_i(section, "matching_points", d.matching_points, minimum=2),
    )
    section.finish()
    if not config.bandwidth > config.cutoff:
        raise ConfigError("frequency.bandwidth", f"must exceed cutoff {config.cutoff}, got {config.bandwidth}")
    if config.count < 2 * config.matching_points:
        raise ConfigError("frequency.count", f"needs at least {2 * config.matching_points} nodes, got {config.count}")
    return config


def _parse_time(document: Any) -> TimeConfig:
    section = _Section(document, "time")
    half_width = _f(section, "half_width", 10.0, positive=True)
    windows = _i(section, "windows", 1, minimum=1)
    given_dt = section.has("dt")
    dt = _f(section, "dt", None, positive=True, optional=True)
    n_steps = _i(section, "n_steps", None, minimum=1, optional=True)
    section.finish()
    if given_dt and n_steps is not None:
        raise ConfigError("time.n_steps", "give either time.dt or time.n_steps, not both")
    if dt is None and n_steps is None:
        dt = 0.01
    return TimeConfig(half_width, windows, dt, n_steps)


def _parse_scattering(document: Any) -> ScatteringConfig:
    section = _Section(document, "scattering")
    config = ScatteringConfig(
        generations=_i(section, "generations", 8, minimum=1),
        prune_tol=_f(section, "prune_tol", 0.0, minimum=0.0),
        c=_f(section, "c", 1.0, positive=True),
    )
    section.finish()
    return config


def _parse_solver(document: Any) -> SolverConfig:
    section = _Section(document, "solver")
    d = SolverConfig()
    config = SolverConfig(
        method=_s(section, "method", d.method, SOLVER_METHODS),
        tol=_f(section, "tol", d.tol, positive=True),
        restart=_i(section, "restart", d.restart, minimum=1),
        cap=_i(section, "cap", d.cap, minimum=1),
        nodes_per_piece=_i(section, "nodes_per_piece", d.nodes_per_piece, minimum=4),
        max_piece_length=_f(section, "max_piece_length", None, positive=True, optional=True),
        closed_nodes=_i(section, "closed_nodes", d.closed_nodes, minimum=4),
        cache_operators=_b(section, "cache_operators", d.cache_operators),
        near_factor=_f(section, "near_factor", d.near_factor, positive=True),
    )
    section.finish()
    if config.closed_nodes % 2:
        raise ConfigError("solver.closed_nodes", f"must be even, got {config.closed_nodes}")
    return config


def _parse_snapshot(document: Any) -> Optional[SnapshotConfig]:
    if document is None:
        return None
    section = _Section(document, "observation.snapshot")
    d = SnapshotConfig()
    times = section.raw("times", [])
    if not isinstance(times, list):
        raise ConfigError("observation.snapshot.times", "must be a list of times")
    try:
        resolved_times = tuple(float(t) for t in times)
    except (TypeError, ValueError):
        raise ConfigError("observation.snapshot.times", "must hold numbers") from None
    if any(t < 0.0 for t in resolved_times):
        raise ConfigError("observation.snapshot.times", "must be non-negative")
    config = SnapshotConfig(
        x_range=_pair(section, "x_range", d.x_range),
        y_range=_pair(section, "y_range", d.y_range),
        nx=_i(section, "nx", d.nx, minimum=1),
        ny=_i(section, "ny", d.ny, minimum=1),
        times=resolved_times,
    )
    section.finish()
    return config


def _parse_observation(document: Any) -> ObservationConfig:
    section = _Section(document, "observation")
    raw = section.raw("points", [[0.5, 0.0]])
    if not isinstance(raw, list):
        raise ConfigError("observation.points", "must be a list of [x, y] pairs")
    points = []
    for i, item in enumerate(raw):
        try:
            x, y = (float(v) for v in item)
        except (TypeError, ValueError):
            raise ConfigError(f"observation.points[{i}]", f"must be an [x, y] pair, got {item!r}") from None
        points.append((x, y))
    config = ObservationConfig(
        points=tuple(points),
        near_field_threshold=_f(section, "near_field_threshold", 1e-2, positive=True),
        snapshot=_parse_snapshot(section.raw("snapshot", None)),
    )
    section.finish()
    return config


def _parse_output(document: Any) -> OutputConfig:
    section = _Section(document, "output")
    formats = section.raw("snapshot_formats", list(SNAPSHOT_FORMATS))
    if not isinstance(formats, list) or any(f not in SNAPSHOT_FORMATS for f in formats):
        raise ConfigError("output.snapshot_formats", f"must be a list drawn from {', '.join(SNAPSHOT_FORMATS)}")
    config = OutputConfig(
        directory=_s(section, "directory", str(DEFAULT_OUTPUT_DIR)),
        snapshot_formats=tuple(formats),
        parquet=_b(section, "parquet", True),
    )
    section.finish()
    if not config.directory:
        raise ConfigError("output.directory", "must not be empty")
    return config


def parse_config(document: Mapping[str, Any], echo_dir: Path | str | None = None) -> RunConfig:
    """Validated RunConfig from a JSON-compatible mapping; writes the resolved echo when asked."""
    root = _Section(document, "")
    config = RunConfig(
        name=_s(root, "name", "run"),
        geometry=_parse_geometry(root.raw("geometry", None)),
        decomposition=_parse_decomposition(root.raw("decomposition", None)),
        incident=_parse_incident(root.raw("incident", None)),
        frequency=_parse_frequency(root.raw("frequency", None)),
        time=_parse_time(root.raw("time", None)),
        scattering=_parse_scattering(root.raw("scattering", None)),
        solver=_parse_solver(root.raw("solver", None)),
        observation=_parse_observation(root.raw("observation", None)),
        output=_parse_output(root.raw("output", None)),
        workers=_i(root, "workers", 1, minimum=1),
    )
    root.finish()
    if echo_dir is not None:
        write_config_echo(config, echo_dir)
    return config


def write_config_echo(config: RunConfig, directory: Path | str) -> Path:
    return RunPersistence(Path(directory)).save_config_echo(config.to_document())


def load_config(path: Path | str) -> RunConfig:
    file_path = Path(path)
    try:
        document = json.loads(file_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(str(file_path), f"cannot be read: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(file_path), f"is not valid JSON: {exc}") from exc
    return parse_config(document)


def apply_environment(config: RunConfig, environ: Mapping[str, str] | None = None) -> RunConfig:
    """FTHMS_WORKERS and FTHMS_OUTPUT_DIR override the file values."""
    environ = os.environ if environ is None else environ
    workers = environ.get("FTHMS_WORKERS", "").strip()
    if workers:
        try:
            count = int(workers)
        except ValueError:
            raise ConfigError("FTHMS_WORKERS", f"must be an integer, got '{workers}'") from None
        if count < 1:
            raise ConfigError("FTHMS_WORKERS", f"must be at least 1, got {count}")
        config = replace(config, workers=count)
    directory = environ.get("FTHMS_OUTPUT_DIR", "").strip()
    if directory:
        config = replace(config, output=replace(config.output, directory=directory))
    return config


def build_incident(config: IncidentConfig) -> IncidentFieldSpec:
    try:
        return IncidentFieldSpec(
            variant=config.variant,
            amplitude=config.amplitude,
            source=tuple(config.source),
            omega0=config.omega0,
            sigma=config.sigma,
            tau0=config.tau0,
            direction_angle=config.direction_angle,
            t_lag=config.t_lag,
            pulses=config.pulses,
            spacing=config.spacing,
            band=tuple(config.band) if config.band is not None else None,
            band_count=config.band_count,
        )
    except FthmsError as exc:
        raise ConfigError("incident", str(exc)) from exc
