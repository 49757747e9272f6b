import functools

import pytest

from halfspace_ln.cones import ConePair
from halfspace_ln.profile import build_table


@functools.lru_cache(maxsize=None)
def cached_table(n: int, k: int, grid_size: int = 512):
    return build_table(ConePair.garding(n, k), grid_size=grid_size)


@pytest.fixture(scope="session")
def table_42():
    return cached_table(4, 2)


@pytest.fixture(scope="session")
def table_31():
    return cached_table(3, 1)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
