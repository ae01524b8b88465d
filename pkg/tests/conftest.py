import time
from contextlib import contextmanager

import numpy as np
import pytest


class StubRng:
    """Replays fixed uniforms / normals; anything unscripted falls back to a real generator."""

    def __init__(self, uniforms=(), normals=(), seed=0):
        self._u = list(np.ravel(uniforms))
        self._g = list(np.ravel(normals))
        self._rng = np.random.default_rng(seed)

    def _take(self, pool, size, fallback):
        n = 1 if size is None else int(np.prod(size))
        if len(pool) >= n:
            vals = np.array([pool.pop(0) for _ in range(n)], dtype=float)
        else:
            vals = np.ravel(fallback(n))
        return vals[0] if size is None else vals.reshape(size)

    def random(self, size=None):
        return self._take(self._u, size, self._rng.random)

    def standard_normal(self, size=None):
        return self._take(self._g, size, self._rng.standard_normal)

    def integers(self, *args, **kwargs):
        return self._rng.integers(*args, **kwargs)

    def choice(self, *args, **kwargs):
        return self._rng.choice(*args, **kwargs)


@pytest.fixture
def stub_rng():
    return StubRng


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Context manager factory: ``with criterion(3, "ladder"):`` logs PASS/FAIL and timing."""

    @contextmanager
    def _criterion(number, title, max_seconds=None):
        t0 = time.perf_counter()
        note = {}
        try:
            yield note
            elapsed = time.perf_counter() - t0
            if max_seconds is not None:
                assert elapsed < max_seconds, f"took {elapsed:.1f}s, limit {max_seconds}s"
        except BaseException as exc:
            line = f"FAIL  criterion {number:>2}: {title} ({time.perf_counter() - t0:.2f}s) {exc}"
            ACCEPTANCE_LINES.append(line.splitlines()[0])
            print(line)
            raise
        extra = f" {note['detail']}" if "detail" in note else ""
        line = f"PASS  criterion {number:>2}: {title} ({elapsed:.2f}s){extra}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
