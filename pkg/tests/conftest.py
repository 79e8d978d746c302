import pytest

_RESULTS: dict = {}


@pytest.fixture
def criterion(request):
    """Register an acceptance criterion; its line is filled in from the test outcome."""

    def register(number: int, label: str):
        _RESULTS[request.node.nodeid] = [number, label, None]

    return register


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    entry = _RESULTS.get(item.nodeid)
    if entry is not None and rep.when == "call":
        entry[2] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, passed in sorted(_RESULTS.values()):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"AC{number:<2} {status}  {label}")
