ACCEPTANCE_LINES = {}


def record(criterion, passed, detail):
    """Store one acceptance verdict; the terminal summary prints them in order."""
    prev = ACCEPTANCE_LINES.get(criterion)
    ok = passed and (prev is None or prev[0])
    text = detail if prev is None else f"{prev[1]}; {detail}"
    ACCEPTANCE_LINES[criterion] = (ok, text)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        ok, text = ACCEPTANCE_LINES[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {text}")
