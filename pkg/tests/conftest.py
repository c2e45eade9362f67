import re

from hypothesis import settings

# exact computations warm up caches (and numba) on first use, so a per-example
# deadline only measures cold starts
settings.register_profile("exact", deadline=None)
settings.load_profile("exact")

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    if report.when == "call" or report.outcome != "passed":
        ok = report.outcome == "passed" and _CRITERIA.get(key, True)
        _CRITERIA[key] = ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), ok in sorted(_CRITERIA.items()):
        terminalreporter.write_line("criterion %2d  %-4s  %s" % (n, "PASS" if ok else "FAIL", name))
