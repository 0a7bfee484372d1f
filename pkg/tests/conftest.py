import json
import sys
from pathlib import Path

import numpy as np
import pytest

TESTS_DIR = Path(__file__).resolve().parent
FIXTURE_DIR = TESTS_DIR / "fixtures"

# Make the oracle helpers importable as `oracles.*`.
sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def iit3_golden():
    return json.loads((FIXTURE_DIR / "iit3_golden.json").read_text())


@pytest.fixture(scope="session")
def iit4_golden():
    return json.loads((FIXTURE_DIR / "iit4_golden.json").read_text())


@pytest.fixture(scope="session")
def fixture_bundle_path():
    return FIXTURE_DIR / "bundle"


@pytest.fixture(scope="session")
def fixture_spans_path():
    return FIXTURE_DIR / "spans.json"


def random_distribution(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.random(n)
    return p / p.sum()


def acceptance_line(name: str, passed: bool) -> None:
    """One pass/fail line per acceptance criterion, flushed immediately."""
    status = "PASS" if passed else "FAIL"
    print(f"[acceptance] {name}: {status}", flush=True)
