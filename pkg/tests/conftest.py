import functools

import numpy as np
import pytest

from rstab.geometry import catalog_surface, discretize


@functools.lru_cache(maxsize=None)
def mesh(name: str, level: int, **params):
    return discretize(catalog_surface(name, **params), level)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


ACCEPTANCE: dict = {}


def record(key: str, title: str, ok: bool, detail: str) -> None:
    """Store the one-line verdict for an acceptance criterion."""
    ACCEPTANCE[key] = f"[{'PASS' if ok else 'FAIL'}] {key} {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
