"""Shared pytest configuration.

Tests marked ``criterion("...")`` are the package's acceptance checklist;
after the run a summary section prints one PASS/FAIL line per criterion so
the gate can be read at a glance.
"""

_labels = {}
_results = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(label): an acceptance criterion, reported line by line "
        "after the run",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            _labels[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    if report.nodeid not in _labels:
        return
    if report.when == "call":
        _results[report.nodeid] = report.outcome
    elif report.outcome != "passed" and report.nodeid not in _results:
        # Setup/teardown failures count against the criterion too.
        _results[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, label in _labels.items():
        outcome = _results.get(nodeid, "skipped")
        word = "PASS" if outcome == "passed" else "FAIL"
        markup = {"green": True} if word == "PASS" else {"red": True}
        terminalreporter.write(f"{word}  ", **markup)
        terminalreporter.write_line(label)
