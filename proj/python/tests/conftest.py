import os
import pathlib
import shutil

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def cli():
    """Path to the uotkit executable, or skip when it has not been built."""
    candidates = [os.environ.get("UOTKIT_CLI"), str(ROOT / "build" / "tools" / "uotkit" / "uotkit"),
                  shutil.which("uotkit")]
    for c in candidates:
        if c and os.path.isfile(c) and os.access(c, os.X_OK):
            return c
    pytest.skip("uotkit executable not found; set UOTKIT_CLI")
