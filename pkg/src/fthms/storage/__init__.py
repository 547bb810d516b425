"""Run outputs and cached reference traces."""

from fthms.storage.persistence import RunPersistence
from fthms.storage.reference_store import ReferenceStore

__all__ = ["ReferenceStore", "RunPersistence"]
