import pytest

from optosense.model import reference_params

ACCEPTANCE_LINES = []


@pytest.fixture
def ref():
    """Reference rates, G' = 4.5e-3, V = 0.01, phi = 0, theta = pi/2, T = 77 mK."""
    return reference_params()


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion."""

    def record(label, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}")
        return ok

    return record


@pytest.fixture
def uncoupled(ref):
    return ref.replace(v_hop=0.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

