"""Per-criterion PASS/FAIL summary for the acceptance suite.

Tests tagged ``@pytest.mark.criterion(n)`` roll up into criterion ``n``;
values passed to ``record_property`` are echoed next to the verdict.
"""

import pytest

CRITERIA = {
    1: "boundary log-derivative integral matches closed form",
    2: "center exponent on the invariant circle",
    3: "toy spectrum and basin",
    4: "finite-scale intermingling on the cylinder",
    5: "boundary box dimension sanity",
    6: "robustness dichotomy",
    7: "property suites",
}

_criterion_of: dict[str, int] = {}
_outcomes: dict[int, list[tuple[str, str]]] = {}
_observed: dict[int, list[tuple[str, object]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


def pytest_collection_modifyitems(config, items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criterion_of[item.nodeid] = int(m.args[0])


def pytest_runtest_logreport(report):
    n = _criterion_of.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(n, []).append((report.nodeid, report.outcome))
    if report.when == "call":
        _observed.setdefault(n, []).extend(report.user_properties)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n}: NOT RUN  {title}")
            continue
        if any(o == "failed" for _, o in results):
            verdict = "FAIL"
        elif all(o == "passed" for _, o in results):
            verdict = "PASS"
        else:
            verdict = "SKIP"
        tr.write_line(f"criterion {n}: {verdict}  {title} ({len(results)} tests)")
        for key, value in _observed.get(n, []):
            tr.write_line(f"    {key} = {value}")
