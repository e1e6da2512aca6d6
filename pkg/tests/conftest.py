import pytest

from covertrick.workbench.generators import gen_cycle, gen_genus_surface, gen_grid_torus

_acceptance: dict[str, str] = {}


@pytest.fixture(scope="session")
def c10():
    return gen_cycle(10)


@pytest.fixture(scope="session")
def torus4():
    return gen_grid_torus(4, with_faces=True)


@pytest.fixture(scope="session")
def torus4_graph():
    return gen_grid_torus(4, with_faces=False)


@pytest.fixture(scope="session")
def genus2():
    return gen_genus_surface(2, 1)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{outcome}  {name}")
