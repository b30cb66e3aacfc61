"""Shared fixtures and the acceptance summary printed at the end of a run."""
import pytest

ACCEPTANCE_RESULTS: dict = {}


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[number] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)
