import pytest
from hypothesis import settings

settings.register_profile("repo", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("repo")

# one line per acceptance criterion, filled by tests/test_acceptance.py
CRITERIA = {}


def record(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = (passed, detail)
    print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        passed, detail = CRITERIA[k]
        terminalreporter.write_line(
            f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    import numpy as np
    return np.random.Generator(np.random.Philox(1234))
