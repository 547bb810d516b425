from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping

import numpy as np
import pyarrow as pa
import pyarrow.parquet as pq

from fthms.storage.snapshots import SnapshotGrid, snapshot_stem, write_snapshot_csv, write_snapshot_pgm

MANIFEST_NAME = "manifest.csv"
CONFIG_ECHO_NAME = "resolved_config.json"


class RunPersistence:
    """Artifacts of one run: traces, snapshots, error tables, report, config echo and manifest."""

    def __init__(self, output_dir: Path) -> None:
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def save_config_echo(self, document: Mapping[str, Any]) -> Path:
        file_path = self.output_dir / CONFIG_ECHO_NAME
        file_path.write_text(json.dumps(document, indent=2, sort_keys=True), encoding="utf-8")
        return file_path

    def _trace_rows(self, times: np.ndarray, points: np.ndarray, values: np.ndarray) -> List[Dict[str, float]]:
        rows = []
        for p, (x, y) in enumerate(np.asarray(points, dtype=float)):
            for t, value in zip(times, values[:, p]):
                rows.append({"point": p, "x": float(x), "y": float(y), "t": float(t), "u": float(value)})
        return rows

    def save_traces_csv(self, name: str, times: np.ndarray, points: np.ndarray, values: np.ndarray) -> Path:
        rows = self._trace_rows(times, points, np.asarray(values))
        file_path = self.output_dir / f"{name}.csv"
        if not rows:
            file_path.write_text("", encoding="utf-8")
            return file_path
        with file_path.open("w", newline="", encoding="utf-8") as fp:
            writer = csv.DictWriter(fp, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        return file_path

    def save_traces_parquet(self, name: str, times: np.ndarray, points: np.ndarray, values: np.ndarray) -> Path:
        rows = self._trace_rows(times, points, np.asarray(values))
        file_path = self.output_dir / f"{name}.parquet"
        table = pa.Table.from_pylist(rows) if rows else pa.Table.from_pylist([{"point": 0}]).slice(0, 0)
        pq.write_table(table, file_path)
        return file_path

    def save_table_csv(self, name: str, rows: Iterable[Mapping[str, Any]]) -> Path:
        rows = [dict(row) for row in rows]
        file_path = self.output_dir / f"{name}.csv"
        if not rows:
            file_path.write_text("", encoding="utf-8")
            return file_path
        with file_path.open("w", newline="", encoding="utf-8") as fp:
            writer = csv.DictWriter(fp, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        return file_path

    def save_report(self, text: str, name: str = "run_report.txt") -> Path:
        file_path = self.output_dir / name
        file_path.write_text(text, encoding="utf-8")
        return file_path

    def save_snapshots(
        self,
        grid: SnapshotGrid,
        times: np.ndarray,
        values: np.ndarray,
        formats: Iterable[str] = ("csv", "pgm"),
    ) -> List[Path]:
        """``values`` holds one row per snapshot time over every grid point (NaN where masked)."""
        folder = self.output_dir / "snapshots"
        folder.mkdir(parents=True, exist_ok=True)
        points = grid.points()
        written = []
        for t, row in zip(np.atleast_1d(times), np.atleast_2d(values)):
            stem = snapshot_stem(float(t))
            if "csv" in formats:
                written.append(write_snapshot_csv(folder / f"{stem}.csv", points, float(t), row))
            if "pgm" in formats:
                written.extend(write_snapshot_pgm(folder / f"{stem}.pgm", grid, float(t), row))
        return written

    def write_manifest(self) -> Path:
        manifest = self.output_dir / MANIFEST_NAME
        rows = []
        # The runtime log keeps growing after the manifest is written.
        files = (p for p in self.output_dir.rglob("*") if p.is_file() and p != manifest and p.suffix != ".log")
        for file_path in sorted(files):
            digest = hashlib.sha256(file_path.read_bytes()).hexdigest()
            rows.append({"path": file_path.relative_to(self.output_dir).as_posix(), "sha256": digest})
        with manifest.open("w", newline="", encoding="utf-8") as fp:
            writer = csv.DictWriter(fp, fieldnames=["path", "sha256"])
            writer.writeheader()
            writer.writerows(rows)
        return manifest
