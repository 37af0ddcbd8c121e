import time

import pytest

# criterion number -> (passed, runtime, limit, detail)
_CRITERIA = {}


class Criterion:
    """Collects named checks and measurements for one acceptance criterion."""

    def __init__(self, number, limit):
        self.number = number
        self.limit = limit
        self.checks = {}
        self.values = {}
        self._t0 = time.perf_counter()

    def check(self, name, ok, value=None):
        self.checks[name] = bool(ok)
        if value is not None:
            self.values[name] = value
        return bool(ok)

    def note(self, name, value):
        self.values[name] = value

    def finish(self):
        elapsed = time.perf_counter() - self._t0
        if self.limit is not None:
            self.check("runtime", elapsed <= self.limit, f"{elapsed:.1f}s <= {self.limit:g}s")
        failed = [k for k, v in self.checks.items() if not v]
        detail = "; ".join(f"{k}={_fmt(v)}" for k, v in self.values.items())
        if failed:
            detail = "failed: " + ", ".join(failed) + " | " + detail
        _CRITERIA[self.number] = (not failed, elapsed, detail)
        return failed


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


@pytest.fixture
def criterion():
    """Factory: ``with criterion(n, limit) as c`` records one criterion line."""
    made = []

    class _Ctx:
        def __init__(self, number, limit=None):
            self.c = Criterion(number, limit)

        def __enter__(self):
            made.append(self.c)
            return self.c

        def __exit__(self, exc_type, exc, tb):
            if exc_type is not None:
                self.c.check("completed", False, f"{exc_type.__name__}: {exc}")
            failed = self.c.finish()
            if exc_type is None:
                assert not failed, f"criterion {self.c.number} failed: {failed}"
            return False

    return _Ctx


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, elapsed, detail = _CRITERIA[n]
        terminalreporter.write_line(
            f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}")
