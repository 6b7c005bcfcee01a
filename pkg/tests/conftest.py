import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def central_difference(f, x, eps=1e-5):
    """Central finite differences of scalar ``f`` over every entry of flat ``x``."""
    x = np.array(x, dtype=np.float64)
    out = np.empty_like(x)
    for k in range(x.size):
        xp = x.copy()
        xp[k] += eps
        xm = x.copy()
        xm[k] -= eps
        out[k] = (f(xp) - f(xm)) / (2 * eps)
    return out


def rel_err(a, b, floor=1e-8):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE = []


def report(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
