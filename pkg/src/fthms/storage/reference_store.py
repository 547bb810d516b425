from __future__ import annotations

import hashlib
import json
import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping

import numpy as np
import pyarrow as pa
import pyarrow.parquet as pq

from fthms.errors import ReferenceConflictError


def canonical_json(document: Mapping[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


def config_hash(document: Mapping[str, Any]) -> str:
    return hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()


@dataclass(slots=True)
class ReferenceTrace:
    config_hash: str
    name: str
    provenance: str
    times: np.ndarray
    values: np.ndarray  # times × points, complex
    metadata: Dict[str, str]


class ReferenceStore:
    """Content-addressed reference traces: sqlite index plus one parquet file per trace."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.db_path = self.root / "references.sqlite"
        self._ensure_schema()

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(str(self.db_path))
        conn.row_factory = sqlite3.Row
        return conn

    def _ensure_schema(self) -> None:
        with self._connect() as conn:
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS references_index (
                    config_hash TEXT NOT NULL,
                    name TEXT NOT NULL,
                    config_json TEXT NOT NULL,
                    provenance TEXT NOT NULL,
                    path TEXT NOT NULL,
                    created_at_utc TEXT NOT NULL DEFAULT (strftime('%Y-%m-%dT%H:%M:%SZ', 'now')),
                    PRIMARY KEY (config_hash, name)
                )
                """
            )

    def _check_conflict(self, conn: sqlite3.Connection, digest: str, canonical: str) -> None:
        row = conn.execute(
            "SELECT config_json FROM references_index WHERE config_hash = ? LIMIT 1", (digest,)
        ).fetchone()
        if row is not None and row["config_json"] != canonical:
            raise ReferenceConflictError(f"Reference hash {digest[:12]} already stores a different configuration")

    def put(
        self,
        config: Mapping[str, Any],
        name: str,
        times: np.ndarray,
        values: np.ndarray,
        provenance: str,
        metadata: Mapping[str, Any] | None = None,
    ) -> Path:
        canonical = canonical_json(config)
        digest = config_hash(config)
        values = np.asarray(values, dtype=complex).reshape(len(times), -1)
        file_path = self.root / f"{digest}_{name}.parquet"
        columns: Dict[str, Any] = {"t": pa.array(np.asarray(times, dtype="<f8"))}
        for p in range(values.shape[1]):
            columns[f"re_{p}"] = pa.array(values[:, p].real.astype("<f8"))
            columns[f"im_{p}"] = pa.array(values[:, p].imag.astype("<f8"))
        schema_meta = {"config_hash": digest, "name": name, "provenance": provenance}
        schema_meta.update({str(k): json.dumps(v) for k, v in (metadata or {}).items()})
        table = pa.table(columns).replace_schema_metadata(schema_meta)
        with self._connect() as conn:
            self._check_conflict(conn, digest, canonical)
            pq.write_table(table, file_path)
            conn.execute(
                """
                INSERT INTO references_index (config_hash, name, config_json, provenance, path)
                VALUES (?, ?, ?, ?, ?)
                ON CONFLICT(config_hash, name) DO UPDATE SET
                    provenance = excluded.provenance,
                    path = excluded.path,
                    created_at_utc = (strftime('%Y-%m-%dT%H:%M:%SZ', 'now'))
                """,
                (digest, name, canonical, provenance, file_path.name),
            )
            conn.commit()
        return file_path

    def get(self, config: Mapping[str, Any], name: str) -> ReferenceTrace | None:
        digest = config_hash(config)
        with self._connect() as conn:
            self._check_conflict(conn, digest, canonical_json(config))
            row = conn.execute(
                "SELECT provenance, path FROM references_index WHERE config_hash = ? AND name = ?",
                (digest, name),
            ).fetchone()
        if row is None:
            return None
        table = pq.read_table(self.root / row["path"])
        count = (table.num_columns - 1) // 2
        values = np.column_stack(
            [table.column(f"re_{p}").to_numpy() + 1j * table.column(f"im_{p}").to_numpy() for p in range(count)]
        ) if count else np.zeros((table.num_rows, 0), dtype=complex)
        meta = {k.decode(): v.decode() for k, v in (table.schema.metadata or {}).items()}
        return ReferenceTrace(digest, name, row["provenance"], table.column("t").to_numpy(), values, meta)

    def list_names(self, config: Mapping[str, Any]) -> List[str]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT name FROM references_index WHERE config_hash = ? ORDER BY name", (config_hash(config),)
            ).fetchall()
        return [row["name"] for row in rows]
