import time

import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}
_START = time.perf_counter()
SUITE_LIMIT_S = 180.0


def suite_elapsed() -> float:
    return time.perf_counter() - _START


def pytest_collection_modifyitems(session, config, items):
    # the property-suite criterion also times the whole run, so it goes last
    last = [i for i in items if i.name == "test_criterion_11_property_suite"]
    items[:] = [i for i in items if i not in last] + last


class AcceptanceLog:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.details: list[str] = []
        self.ok = True

    def check(self, cond, detail: str):
        self.details.append(("ok: " if cond else "FAILED: ") + detail)
        self.ok = self.ok and bool(cond)
        return bool(cond)

    def finish(self):
        line = f"{self.title}: " + "; ".join(self.details)
        _RESULTS[self.number] = (self.ok, line)
        print(f"criterion {self.number:2d} {'PASS' if self.ok else 'FAIL'} | {line}")
        assert self.ok, line


@pytest.fixture
def criterion(request):
    logs = []

    def make(number, title):
        log = AcceptanceLog(number, title)
        logs.append(log)
        return log

    yield make
    for log in logs:
        if log.number not in _RESULTS:  # the test raised before finish()
            _RESULTS[log.number] = (False, f"{log.title}: aborted; " + "; ".join(log.details))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _START
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, line = _RESULTS[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} | {line}")
    tr.write_line(f"suite wall time {elapsed:.1f} s (limit {SUITE_LIMIT_S:.0f} s): "
                  f"{'PASS' if elapsed < SUITE_LIMIT_S else 'FAIL'}")


@pytest.fixture(scope="session")
def preset_run():
    """Run a preset once per session and share the result."""
    from depsym.scenario import run_preset

    cache = {}

    def get(name):
        if name not in cache:
            t0 = time.perf_counter()
            result = run_preset(name)
            cache[name] = (result, time.perf_counter() - t0)
        return cache[name]

    return get
