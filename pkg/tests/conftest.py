import pytest

_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    num, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    _RESULTS[num] = (rep.outcome, title, rep.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        outcome, title, dur, detail = _RESULTS[num]
        word = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {num:>2} {word}  {title}  [{dur:.1f}s]"
        terminalreporter.write_line(line + (f"  {detail}" if detail else ""))
