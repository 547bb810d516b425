from __future__ import annotations

import sys
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from fthms.ftransform.grid import FrequencyGrid  # noqa: E402
from fthms.geometry.catalog import circle  # noqa: E402
from fthms.geometry.patches import build_patch_decomposition  # noqa: E402


@pytest.fixture(scope="session")
def unit_circle():
    return circle()


@pytest.fixture(scope="session")
def three_patch_disc(unit_circle):
    return build_patch_decomposition(unit_circle, 3)


@pytest.fixture(scope="session")
def small_grid():
    return FrequencyGrid(cutoff=1.0, bandwidth=25.0, count=501)


@pytest.fixture(autouse=True)
def _restore_streams():
    yield
    from fthms.runtime_logging import close_runtime_log

    close_runtime_log()
