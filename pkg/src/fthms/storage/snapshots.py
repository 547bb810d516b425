from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from fthms.errors import ParameterDomainError

PGM_MAX = 65535
PGM_MID = 32768


@dataclass(frozen=True, slots=True)
class SnapshotGrid:
    """Rectangular evaluation grid; point k sits at row k // nx, column k % nx (y ascending)."""

    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise ParameterDomainError(f"Snapshot grid needs positive sizes, got {self.nx}×{self.ny}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.ny, self.nx)

    def points(self) -> np.ndarray:
        x = np.linspace(self.x_range[0], self.x_range[1], self.nx)
        y = np.linspace(self.y_range[0], self.y_range[1], self.ny)
        xx, yy = np.meshgrid(x, y)
        return np.column_stack([xx.ravel(), yy.ravel()])


def snapshot_stem(t: float) -> str:
    return f"t{t:010.4f}".replace(".", "p")


def write_snapshot_csv(path: Path, points: np.ndarray, t: float, values: np.ndarray) -> Path:
    values = np.asarray(values)
    real = np.real(values).astype(float)
    imag = np.imag(values).astype(float) if np.iscomplexobj(values) else np.zeros_like(real)
    with Path(path).open("w", newline="", encoding="utf-8") as fp:
        writer = csv.DictWriter(fp, fieldnames=["x", "y", "t", "re", "im"])
        writer.writeheader()
        for (x, y), re, im in zip(np.asarray(points, dtype=float), real, imag):
            writer.writerow({"x": f"{x:.16e}", "y": f"{y:.16e}", "t": f"{t:.16e}", "re": f"{re:.16e}", "im": f"{im:.16e}"})
    return Path(path)


def read_snapshot_csv(path: Path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    with Path(path).open("r", newline="", encoding="utf-8") as fp:
        rows = list(csv.DictReader(fp))
    points = np.array([[float(r["x"]), float(r["y"])] for r in rows]).reshape(-1, 2)
    times = np.array([float(r["t"]) for r in rows])
    values = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    return points, times, values


def write_snapshot_pgm(path: Path, grid: SnapshotGrid, t: float, values: np.ndarray) -> Tuple[Path, Path]:
    """16-bit binary PGM of the real part (top row = largest y) plus a JSON sidecar with the range.

    Non-finite samples (masked points) map to 0; a constant field maps to mid-gray.
    """
    real = np.real(np.asarray(values)).astype(float).reshape(grid.shape)
    finite = np.isfinite(real)
    lo = float(real[finite].min()) if finite.any() else 0.0
    hi = float(real[finite].max()) if finite.any() else 0.0
    if hi > lo:
        scaled = np.rint((real - lo) / (hi - lo) * PGM_MAX)
    else:
        scaled = np.full(real.shape, float(PGM_MID))
    pixels = np.where(finite, scaled, 0.0).astype(">u2")[::-1]
    path = Path(path)
    with path.open("wb") as fp:
        fp.write(f"P5\n{grid.nx} {grid.ny}\n{PGM_MAX}\n".encode("ascii"))
        fp.write(pixels.tobytes())
    sidecar = path.with_suffix(".json")
    sidecar.write_text(
        json.dumps(
            {"t": t, "min": lo, "max": hi, "width": grid.nx, "height": grid.ny, "masked": int((~finite).sum())},
            indent=2,
        ),
        encoding="utf-8",
    )
    return path, sidecar


def read_pgm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    width, height = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=">u2").reshape(height, width)
