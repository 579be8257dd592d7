import pytest

_DETAILS: dict[int, str] = {}
_OUTCOMES: dict[int, bool] = {}


@pytest.fixture
def detail(request):
    """Record a one-line summary for the acceptance criterion of the calling test."""
    marker = request.node.get_closest_marker("criterion")

    def record(text: str) -> None:
        _DETAILS[marker.args[0]] = text

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _OUTCOMES[k] = rep.passed and _OUTCOMES.get(k, True)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_OUTCOMES):
        status = "PASS" if _OUTCOMES[k] else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {_DETAILS.get(k, '')}")
