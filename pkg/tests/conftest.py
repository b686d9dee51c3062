"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_results: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): an acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    label = mark.args[0]
    if call.when == "call":
        _results[label] = "PASS" if call.excinfo is None else "FAIL"
    elif call.excinfo is not None:
        _results[label] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_results, key=lambda s: int(s.split()[0][2:])):
        terminalreporter.write_line(f"[{_results[label]}] {label}")
