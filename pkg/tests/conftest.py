import pytest

from wstring import profiles

# lines appended by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def corrupted_rho1():
    """Temporarily replace the rho1 numerator 8 by 7."""
    old = profiles._RHO1_COEFF
    profiles._RHO1_COEFF = 7.0
    yield
    profiles._RHO1_COEFF = old


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
