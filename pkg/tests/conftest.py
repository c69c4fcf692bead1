"""Shared pytest wiring.

The acceptance module holds one test per advertised behavior; this hook
prints a PASS/FAIL line per criterion after the run so the summary is
visible even when everything passes and stdout capture swallows the
per-test detail.
"""

_docs: dict[str, str] = {}
_outcomes: dict[str, bool] = {}


def _is_acceptance(nodeid: str) -> bool:
    return nodeid.split("::")[0].endswith("test_acceptance.py")


def pytest_collection_modifyitems(items):
    for item in items:
        if _is_acceptance(item.nodeid):
            doc = getattr(item.function, "__doc__", None) or item.name
            _docs[item.nodeid] = doc.strip().splitlines()[0]


def pytest_runtest_logreport(report):
    if not _is_acceptance(report.nodeid):
        return
    if report.when == "call":
        _outcomes[report.nodeid] = (
            _outcomes.get(report.nodeid, True) and report.passed)
    elif report.failed:
        _outcomes[report.nodeid] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid in sorted(_outcomes):
        status = "PASS" if _outcomes[nodeid] else "FAIL"
        terminalreporter.write_line(f"{status}  {_docs.get(nodeid, nodeid)}")
