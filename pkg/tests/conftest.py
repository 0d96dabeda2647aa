import itertools

import numpy as np
import pytest


def naive_local_bound(M, mar_A=None, mar_B=None):
    """Enumerate every (a, b) pair with plain Python loops."""
    M = np.asarray(M)
    mA, mB = M.shape
    mar_A = np.zeros(mA) if mar_A is None else np.asarray(mar_A)
    mar_B = np.zeros(mB) if mar_B is None else np.asarray(mar_B)
    best = None
    for a in itertools.product((-1, 1), repeat=mA):
        for b in itertools.product((-1, 1), repeat=mB):
            v = sum(M[i, j] * a[i] * b[j] for i in range(mA) for j in range(mB))
            v += sum(mar_A[i] * a[i] for i in range(mA)) + sum(mar_B[j] * b[j] for j in range(mB))
            best = v if best is None else max(best, v)
    return best


def random_unit(rng, m, d):
    x = rng.standard_normal((m, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
