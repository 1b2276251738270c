import itertools
from pathlib import Path

import numpy as np
import pytest

from occupation_ld.chain import ProbMeasure, build_model

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"


def random_discrete(rng, n, zeros=False):
    P = rng.uniform(0.05, 1.0, (n, n))
    if zeros:
        P *= rng.random((n, n)) < 0.6
        P[np.arange(n), (np.arange(n) + 1) % n] += 0.1  # keep it irreducible
    P /= P.sum(axis=1, keepdims=True)
    return build_model("discrete", P, np.ones(n) / n)


def random_reversible(rng, n, scale=1.0):
    """m_i Q_ij = W_ij with W symmetric, so detailed balance holds exactly."""
    W = rng.uniform(0.1, 1.0, (n, n)) * scale
    W = np.triu(W, 1)
    W = W + W.T
    m = rng.uniform(0.5, 2.0, n)
    Q = W / m[:, None]
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return build_model("continuous", Q, m / m.sum())


def random_generator(rng, n, scale=1.0):
    Q = rng.uniform(0.1, 1.0, (n, n)) * scale
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return build_model("continuous", Q, np.ones(n) / n)


def random_interior(rng, n, low=0.05):
    return ProbMeasure.normalized(rng.uniform(low, 1.0, n))


def series_expm(A, terms=50):
    """Plain Taylor sum, used as an independent oracle for modest ||A||."""
    out = np.eye(len(A))
    term = np.eye(len(A))
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def enumerate_paths(P, start, n, target):
    """pmf of the visit count to ``target`` among X_0..X_{n-1} by brute force."""
    S = len(P)
    pmf = np.zeros(n + 1)
    for tail in itertools.product(range(S), repeat=n - 1):
        path = (start,) + tail
        p = 1.0
        for a, b in zip(path, path[1:]):
            p *= P[a, b]
        if p:
            pmf[sum(1 for x in path if target[x])] += p
    return pmf


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def two_state_discrete():
    return build_model("discrete", [[0.7, 0.3], [0.3, 0.7]], [0.5, 0.5], ["s0", "s1"])


@pytest.fixture
def two_state_continuous():
    return build_model("continuous", [[-1.0, 1.0], [1.0, -1.0]], [0.5, 0.5], ["s0", "s1"])


@pytest.fixture
def cycle3():
    """Non-reversible rotation generator."""
    Q = [[-2.0, 2.0, 0.0], [0.0, -2.0, 2.0], [2.0, 0.0, -2.0]]
    return build_model("continuous", Q, [1 / 3] * 3, ["a", "b", "c"])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
