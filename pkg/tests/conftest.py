import pytest

from minigraph.diskfield import build_grid


@pytest.fixture(scope="session")
def small_grid():
    return build_grid(16, 64)


@pytest.fixture(scope="session")
def medium_grid():
    return build_grid(32, 128)


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        num = int(name.split("_")[2])
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {num:2d} {_CRITERIA[name]}  {label}")
