from pathlib import Path

import pytest

from wigner.utils import load_json

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def expected():
    """Carga un archivo dorado de data/expected por nombre."""
    return lambda name: load_json(DATA_DIR / "expected" / f"{name}.json")
