from __future__ import annotations

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record a numbered acceptance result; the summary prints one line per criterion."""
    def record(number: int | str, ok: bool, detail: str) -> None:
        _CRITERIA[str(number)] = (bool(ok), detail)
        assert ok, f"criterion {number} failed: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    def order(label: str) -> tuple[int, str]:
        digits = "".join(ch for ch in label if ch.isdigit())
        return int(digits), label

    for label in sorted(_CRITERIA, key=order):
        ok, detail = _CRITERIA[label]
        terminalreporter.write_line(f"criterion {label:>3}: {'PASS' if ok else 'FAIL'}  {detail}")
