import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    cid, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    _RESULTS[cid] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=int):
        title, passed, detail = _RESULTS[cid]
        line = f"[{'PASS' if passed else 'FAIL'}] {cid}. {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
