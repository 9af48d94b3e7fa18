import pytest

from pstrack import MeanProfile, ParamSet

DESK_T = 100_000
DESK_TRANSITIONS = (1, 25001, 50001, 75001, 100000)
DESK_MEANS = (0.9, 0.3, 0.7, 0.5)

# One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE_LINES = []


@pytest.fixture
def desk_profile():
    return MeanProfile(DESK_T, DESK_TRANSITIONS, DESK_MEANS)


@pytest.fixture
def desk_params():
    return ParamSet(gamma0=0.8, gamma=0.5, beta=0.1, delta=0.4, b=0.08, mu0=0.3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert the criterion."""

    def record(name, passed, detail):
        ACCEPTANCE_LINES.append(f"{name} {'PASS' if passed else 'FAIL'}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        assert passed, detail

    return record
