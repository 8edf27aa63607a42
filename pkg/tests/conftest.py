"""Root conftest for all tests - imports shared fixtures."""
import sys
from pathlib import Path

# Add src and tests directories to path
root = Path(__file__).parent
for path in (root.parent / "src", root):
    if str(path) not in sys.path:
        sys.path.insert(0, str(path))

from fixtures.conftest import *  # noqa: F403, F401, E402


def pytest_collection_modifyitems(config, items):
    """Mark tests unit or integration by directory."""
    import pytest

    for item in items:
        parts = Path(str(item.fspath)).parts
        if "integration" in parts:
            item.add_marker(pytest.mark.integration)
        elif "unit" in parts:
            item.add_marker(pytest.mark.unit)
