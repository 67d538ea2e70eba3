import pytest

_CRITERIA: list = []


class CriterionRecorder:
    """Collects one pass/fail line per acceptance criterion."""

    def __call__(self, cid: str, title: str, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{text} [{'ok' if passed else 'FAIL'}]" for text, passed in checks)
        line = f"[{'PASS' if ok else 'FAIL'}] {cid} {title}: {detail}"
        _CRITERIA.append((cid, line))
        print(line)
        return ok


@pytest.fixture
def criterion():
    return CriterionRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda c: int(c[0][1:])):
        terminalreporter.write_line(line)
