import pytest

from faultsim.harness import warm_up

CRITERIA = []


def record(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
    CRITERIA.append(line)
    print(line)
    return passed


@pytest.fixture(scope="session", autouse=True)
def compiled_kernel():
    # compile or load the cached kernel once, outside any timed region
    warm_up()


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
