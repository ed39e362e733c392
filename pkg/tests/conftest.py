import pytest

ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


@pytest.fixture
def report():
    """Record one sub-check of an acceptance criterion: ``report("3", ok, detail)``."""

    def _record(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
        print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return _record


def _key(criterion: str):
    return (int(criterion), criterion)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE, key=_key):
        checks = ACCEPTANCE[criterion]
        ok = all(passed for passed, _ in checks)
        detail = " | ".join(f"{'ok' if p else 'FAILED'}: {d}" for p, d in checks)
        terminalreporter.write_line(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
