import re

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_results: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    title = m.group(2).replace("_", " ")
    summary = dict(report.user_properties).get("summary", "")
    if report.when == "call" or report.failed:
        status = "PASS" if report.passed else "FAIL"
        if num not in _results or status == "FAIL":
            _results[num] = (status, title, summary)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        status, title, summary = _results[num]
        line = f"criterion {num:2d} [{status}] {title}"
        terminalreporter.write_line(f"{line}: {summary}" if summary else line)
