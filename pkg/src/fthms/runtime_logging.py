from __future__ import annotations

import datetime as dt
import os
import sys
from pathlib import Path
from typing import TextIO

_LOG_HANDLES: dict[Path, TextIO] = {}
_ORIGINAL_STREAMS: tuple[TextIO, TextIO] | None = None


class _StreamTee:
    def __init__(self, original: TextIO, file_handle: TextIO) -> None:
        self._original = original
        self._file = file_handle

    def write(self, data: str) -> int:
        self._original.write(data)
        try:
            self._file.write(data)
        except ValueError:
            # Closed during interpreter shutdown.
            pass
        return len(data)

    def flush(self) -> None:
        try:
            self._original.flush()
        except Exception:
            pass
        try:
            self._file.flush()
        except ValueError:
            pass

    def isatty(self) -> bool:
        return bool(getattr(self._original, "isatty", lambda: False)())

    @property
    def encoding(self) -> str | None:
        return getattr(self._original, "encoding", None)


def resolve_log_path(output_dir: Path) -> Path:
    raw = os.getenv("FTHMS_LOG_FILE", "").strip()
    return Path(raw) if raw else output_dir / "runtime.log"


def configure_runtime_log(log_file: Path) -> Path:
    global _ORIGINAL_STREAMS
    log_path = log_file.expanduser().resolve()
    if log_path in _LOG_HANDLES:
        return log_path
    log_path.parent.mkdir(parents=True, exist_ok=True)
    handle = log_path.open("a", encoding="utf-8", buffering=1)
    handle.write(
        f"\n========== FTH-MS run started {dt.datetime.now().isoformat(timespec='seconds')} "
        f"pid={os.getpid()} ==========\n"
    )
    _LOG_HANDLES[log_path] = handle

    if _ORIGINAL_STREAMS is None:
        _ORIGINAL_STREAMS = (sys.stdout, sys.stderr)
    sys.stdout = _StreamTee(_ORIGINAL_STREAMS[0], handle)  # type: ignore[assignment]
    sys.stderr = _StreamTee(_ORIGINAL_STREAMS[1], handle)  # type: ignore[assignment]
    return log_path


def close_runtime_log() -> None:
    global _ORIGINAL_STREAMS
    if _ORIGINAL_STREAMS is not None:
        sys.stdout, sys.stderr = _ORIGINAL_STREAMS  # type: ignore[assignment]
        _ORIGINAL_STREAMS = None
    for handle in _LOG_HANDLES.values():
        try:
            handle.close()
        except ValueError:
            pass
    _LOG_HANDLES.clear()
