import numpy as np
import pytest


@pytest.fixture
def gen():
    return np.random.default_rng(20240817)


def naive_conditional_dependence(k_u, k_v, k_w):
    """Reference double sum for the dependence measure, explicit loops.

    Centers K_U and K_V the slow way (subtract row, column, and grand
    means) and accumulates the elementwise triple product one entry at a
    time.  Deliberately O(n^2) scalar work so it shares no code with the
    vectorized implementation.
    """
    n = k_u.shape[0]
    a = _slow_center(k_u)
    b = _slow_center(k_v)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * b[i, j] * k_w[i, j]
    return total / (n * n)


def _slow_center(k):
    n = k.shape[0]
    row = [sum(k[i, j] for j in range(n)) / n for i in range(n)]
    col = [sum(k[i, j] for i in range(n)) / n for j in range(n)]
    grand = sum(row) / n
    out = np.empty_like(k)
    for i in range(n):
        for j in range(n):
            out[i, j] = k[i, j] - row[i] - col[j] + grand
    return out
