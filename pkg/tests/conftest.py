import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from adsvol.surface import FNCoordinates, build_holonomy, standard_topology  # noqa: E402


@pytest.fixture(scope="session")
def symmetric_rep():
    return build_holonomy(standard_topology(2), FNCoordinates((1.0, 1.0, 1.0), (0.0, 0.0, 0.0)))


@pytest.fixture(scope="session")
def twisted_rep():
    return build_holonomy(standard_topology(2), FNCoordinates((0.7, 1.3, 0.9), (0.4, -1.1, 0.6)))
