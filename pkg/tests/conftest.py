import pytest

from poncelet import pair_from_caustic

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def pair():
    return pair_from_caustic(1.0, 0.5)


@pytest.fixture(scope="session", params=[0.3, 0.5, 0.8], ids=lambda r: f"ratio{r}")
def ratio_pair(request):
    return pair_from_caustic(1.0, request.param)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
