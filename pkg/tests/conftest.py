from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def corpus_canonical() -> Path:
    return REPO / "corpus" / "canonical"


@pytest.fixture(scope="session")
def corpus_raw() -> Path:
    return REPO / "corpus" / "raw"


@pytest.fixture(scope="session")
def corpus_golden() -> Path:
    return REPO / "corpus" / "golden"


@pytest.fixture(scope="session")
def corpus_broken() -> Path:
    return REPO / "corpus" / "broken"
