import re

import pytest

ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def acceptance_record():
    def record(criterion: str, ok: bool, detail: str):
        ACCEPTANCE_RESULTS[criterion] = (ok, detail)
        print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: (int(re.match(r"\d+", k).group()), k)):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}")
