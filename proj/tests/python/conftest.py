import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def fixtures():
    return pathlib.Path(os.environ.get("LED_FIXTURE_DIR", ROOT / "data" / "fixtures"))


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("LED_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("led command line tool not built")
    return path
