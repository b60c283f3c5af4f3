from __future__ import annotations

from pathlib import Path

import pytest

from menagerie.library import load_library

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="session")
def lib():
    return load_library()


@pytest.fixture(scope="session")
def elephant(lib):
    return next(e.skeleton for e in lib.entries if e.animal_name == "Elephant")


@pytest.fixture(scope="session")
def shepherd(lib):
    return next(e.skeleton for e in lib.entries if e.animal_name == "German Shepherd")
