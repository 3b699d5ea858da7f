import re

import pytest

_RESULTS: dict[int, tuple[str, str, list[str]]] = {}
_NOTES: dict[str, list[str]] = {}


@pytest.fixture
def note(request):
    """Attach an informational line to the acceptance summary."""
    return _NOTES.setdefault(request.node.nodeid, []).append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_criterion_(\d+)", item.name)
    if not m:
        return
    if rep.when == "call" or rep.failed:
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if rep.passed else "FAIL"
        n = int(m.group(1))
        notes = _NOTES.get(item.nodeid, [])
        if n in _RESULTS:
            # parametrized criteria pass only if every case passes
            prev = _RESULTS[n]
            status = "FAIL" if "FAIL" in (prev[0], status) else "PASS"
            notes = prev[2] + [x for x in notes if x not in prev[2]]
        _RESULTS[n] = (status, doc, notes)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, doc, notes = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {doc}")
        for line in notes:
            terminalreporter.write_line(f"               {line}")
