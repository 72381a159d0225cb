import re

import pytest

CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Store one verdict line per acceptance criterion; failures also fail the test."""
    def _record(n: int, ok: bool, detail: str) -> None:
        prev = CRITERIA.get(n)
        if prev is not None:
            ok, detail = prev[0] and ok, f"{prev[1]}; {detail}"
        CRITERIA[n] = (ok, detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = re.match(r"test_criterion_(\d+)", item.name)
    if m and rep.when == "call" and rep.failed:
        n = int(m.group(1))
        ok, detail = CRITERIA.get(n, (True, ""))
        if ok:
            # failed before recording a verdict, e.g. on an inner assertion
            first = str(call.excinfo.value).splitlines()[0] if call.excinfo else "error"
            CRITERIA[n] = (False, (detail + "; " if detail else "") + f"{item.name} failed: {first}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
