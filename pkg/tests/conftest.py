"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""
import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_results: dict[int, tuple[bool, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = _CRITERION.search(item.nodeid)
        if m:
            doc = (item.function.__doc__ or "").strip().splitlines()
            _results[int(m.group(1))] = (None, doc[0] if doc else "")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    ok, title = _results.get(number, (None, ""))
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        _results[number] = ((ok is not False) and not failed, title)


def pytest_terminal_summary(terminalreporter):
    ran = {k: v for k, v in _results.items() if v[0] is not None}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ran):
        ok, title = ran[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
