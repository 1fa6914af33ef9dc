import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_CSV = REPO_ROOT / "data" / "synthetic_prices.csv"


@pytest.fixture
def fixture_csv():
    return FIXTURE_CSV
