import importlib.resources

import pytest


@pytest.fixture
def fixture_path():
    def lookup(name: str) -> str:
        return str(importlib.resources.files("stp") / "fixtures" / name)

    return lookup
