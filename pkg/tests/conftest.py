import time

SESSION_T0 = time.monotonic()

import pytest

from unitons import kernels

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compilation happens here, outside any timed criterion
    kernels.warmup()
    yield


@pytest.fixture(scope="session")
def session_t0():
    return SESSION_T0


def pytest_terminal_summary(terminalreporter):
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    elapsed = time.monotonic() - SESSION_T0
    terminalreporter.write_line(
        f"wall clock since session start: {elapsed:.1f} s (backend: {kernels.BACKEND})"
    )
