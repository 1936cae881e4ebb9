"""Shared test plumbing.

Acceptance tests record one verdict per criterion in ``VERDICTS``; the
terminal summary prints them whether or not output capture is on.
"""

VERDICTS: dict[int, tuple[str, str]] = {}


def record(number: int, ok: bool, detail: str) -> None:
    VERDICTS[number] = ("PASS" if ok else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        verdict, detail = VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
