import pytest

_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): an acceptance criterion of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and call.excinfo is not None:
        detail = str(call.excinfo.value).strip().splitlines()[0] if str(call.excinfo.value).strip() else call.excinfo.typename
    number, title = marker.args
    _RESULTS.append((number, title, rep.passed, detail, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail, duration in sorted(_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"criterion {number:>2}  {status}  {title} [{duration:.1f}s]"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
