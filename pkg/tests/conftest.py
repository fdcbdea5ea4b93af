import pytest

from hetmem.config import default_paper_config

_RESULTS: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def config():
    return default_paper_config()


@pytest.fixture
def criterion(request):
    """Record a numbered acceptance criterion's outcome for the summary."""
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    yield
    call = getattr(request.node, "_outcome_call", None)
    _RESULTS[number] = (title, "PASS" if call is not None and call.passed else "FAIL")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item._outcome_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status = _RESULTS[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
