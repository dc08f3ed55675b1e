import contextlib
import time

import pytest

_RESULTS = []


class _Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.detail = ""


@pytest.fixture
def criterion(capsys):
    """``with criterion(n, title) as c:`` records one PASS/FAIL line for the acceptance summary."""

    @contextlib.contextmanager
    def record(number, title):
        c = _Criterion(number, title)
        t0 = time.perf_counter()
        status = "FAIL"
        try:
            yield c
            status = "PASS"
        except BaseException as e:
            if not c.detail:
                c.detail = f"{type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}"
            raise
        finally:
            line = (f"criterion {c.number:2d} {status}  {c.title}  [{c.detail}]"
                    f"  ({time.perf_counter() - t0:.1f}s)")
            _RESULTS.append(line)
            with capsys.disabled():
                print("\n" + line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
