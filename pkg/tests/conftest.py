import sys

import numpy as np
import pytest

from cachestream.channel import BDistribution
from cachestream.config import SimConfig


@pytest.fixture
def defaults():
    return SimConfig()


def tiny_instance(rng: np.random.Generator):
    """Random small frame problem, returned both as a package config and as a
    plain dict for the oracles. Budgets and chunk sizes are in bits with a
    1-bit grid, so grid values and bit values coincide."""
    L = int(rng.integers(1, 3))
    n1 = int(rng.integers(1, 3))
    N = [n1, n1 + int(rng.integers(1, 4))][:L]
    top = int(rng.integers(N[0], 8))  # at most 8 grid points
    Qt = int(rng.integers(1, 7))
    T = int(rng.integers(1, 4))
    V = 0.0 if rng.random() < 0.2 else float(rng.uniform(0, 3))
    P = sorted(rng.choice(np.arange(30.0, 40.0, 0.25), size=L, replace=False).tolist())
    A = float(rng.uniform(1, 1e4))
    mu = float(rng.uniform(0.2, 2.0))

    pmf = rng.dirichlet(np.ones(top + 1))
    pmf[rng.random(top + 1) < 0.25] = 0.0
    if pmf.sum() == 0:
        pmf[-1] = 1.0
    tail = float(rng.uniform(0, 0.2)) if rng.random() < 0.3 else 0.0
    pmf = pmf / pmf.sum() * (1.0 - tail)

    cfg = SimConfig(L=L, p=tuple([1.0 / L] * L), N=tuple(N), P=tuple(P), B_max=top,
                    b_unit=1, Q_tilde=Qt, c=1, T=T, V=V, A_end=A, mu=mu, K=1)
    bdist = BDistribution(pmf, tail, 1.0, 1)
    inst = dict(T=T, Qt=Qt, c=1, N=N, P=P, V=V, A=A, mu=mu, pmf=pmf.tolist(), tail=tail)
    return cfg, bdist, inst


@pytest.fixture
def tiny():
    return tiny_instance


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: (int(k.rstrip("abcde")), k)):
        terminalreporter.write_line(results[key])
