import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture
def majority_child_command():
    """Command line spawning the protocol child that plays majority."""
    script = TESTS_DIR / "child_majority.py"
    return f"{sys.executable} {script}"
