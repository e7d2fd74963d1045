import pytest

from alphasvrg import kernels, problems

ACCEPTANCE_LINES = []


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


@pytest.fixture
def noisy():
    return problems.generate(50, 2, 1.0, 11)


@pytest.fixture
def noiseless():
    return problems.generate(50, 2, 0.0, 12)


@pytest.fixture
def small():
    return problems.generate(8, 3, 0.5, 13)


@pytest.fixture
def acceptance_report():
    def report(criterion, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

