import time

# one entry per acceptance criterion: (number, passed, seconds, note)
ACCEPTANCE = []
SUITE_LIMIT = 300.0


def pytest_sessionstart(session):
    session.config._qscatter_start = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    total = time.perf_counter() - config._qscatter_start
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, ok, secs, note in sorted(ACCEPTANCE):
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({secs:.2f} s)"
        tr.write_line(line + (f"  {note}" if note else ""))
    ok = total < SUITE_LIMIT
    tr.write_line(f"whole pytest session: {'PASS' if ok else 'FAIL'}  ({total:.1f} s, limit {SUITE_LIMIT:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    start = getattr(session.config, "_qscatter_start", None)
    if ACCEPTANCE and start is not None and time.perf_counter() - start >= SUITE_LIMIT and exitstatus == 0:
        session.exitstatus = 1
