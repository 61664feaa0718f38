import pytest

WORKED_STREAM = [4.6, 5.1, 3.9, 4.4, 4.8, 6.6, 5.3, 8.3, 4.7, 5.0]
WORKED_RANKS = [1, 2, 1, 2, 4, 6, 6, 8, 4, 6]
WORKED_P = [0.5000, 0.7500, 0.1667, 0.3750, 0.7000, 0.9167, 0.7857, 0.9375, 0.3889, 0.5500]
WORKED_Z = [0.0000, 0.6745, -0.9674, -0.3186, 0.5244, 1.3830, 0.7916, 1.5341, -0.2822, 0.1257]


@pytest.fixture
def worked_stream():
    return list(WORKED_STREAM)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
