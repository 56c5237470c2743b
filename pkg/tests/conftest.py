import math

import numpy as np
import pytest

from zonecover import Arrangement, random_arrangement, solve

# criterion label -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[label]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}")


def evenly_spaced_2d(n: int) -> Arrangement:
    t = np.arange(n) * math.pi / n
    return Arrangement.from_array(np.column_stack([np.cos(t), np.sin(t)]))


def random_tangent(u: np.ndarray, rng: np.random.Generator, length: float = 1.0) -> np.ndarray:
    w = rng.standard_normal(u.size)
    w -= np.dot(w, u) * u
    return length * w / np.linalg.norm(w)


@pytest.fixture(scope="session")
def solved_random():
    """A small bank of solved random arrangements shared across test modules."""
    out = []
    for d, n, seed in [(2, 3, 0), (3, 3, 1), (3, 4, 2), (3, 5, 3), (4, 6, 4), (3, 6, 5), (2, 7, 6)]:
        arr = random_arrangement(d, n, seed)
        out.append((arr, solve(arr)))
    return out
