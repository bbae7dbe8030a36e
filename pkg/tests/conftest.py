import pytest

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def record(criterion: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (title, passed, detail)
    line = f"[acceptance {criterion}] {'PASS' if passed else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{k}. {'PASS' if passed else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture
def acceptance():
    return record
