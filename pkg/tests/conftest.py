import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st
from scipy.stats import ortho_group

from ridgetopo.model import Mixture, load_example

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_cov(rng, d, lo=0.05, hi=2.0):
    eig = rng.uniform(lo, hi, size=d)
    if d == 1:
        return np.diag(eig)
    q = ortho_group.rvs(d, random_state=rng)
    return q @ np.diag(eig) @ q.T


def random_mixture(rng, k=2, d=2, spread=3.0, wlo=0.05, whi=0.95):
    """Means in [-spread, spread]^d, covariance eigenvalues in [0.05, 2]."""
    means = rng.uniform(-spread, spread, size=(k, d))
    covs = np.array([random_cov(rng, d) for _ in range(k)])
    if k == 2:
        p = rng.uniform(wlo, whi)
        w = np.array([1 - p, p])
    else:
        w = rng.dirichlet(np.ones(k))
    return Mixture.from_arrays(means, covs, w)


def proportional_pair(rng, d=2):
    """A K=2 mixture with cov_2 = sigma2 * cov_1 (sigma2 = 1 about a third of the time)."""
    c1 = random_cov(rng, d)
    s2 = 1.0 if rng.uniform() < 0.3 else float(rng.uniform(0.1, 5.0))
    means = rng.uniform(-3, 3, size=(2, d))
    return Mixture.from_arrays(means, np.array([c1, s2 * c1]), [0.5, 0.5])


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def mixtures(draw, k=2, dims=(1, 2, 3)):
    d = draw(st.sampled_from(dims))
    return random_mixture(np.random.default_rng(draw(seeds)), k=k, d=d)


@pytest.fixture(scope="session")
def ex1():
    return load_example(1)


@pytest.fixture(scope="session")
def ex2():
    return load_example(2)


@pytest.fixture(scope="session")
def ex3():
    return load_example(3)


@pytest.fixture(scope="session")
def ex4():
    return load_example(4)


# acceptance bookkeeping: one line per criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, passed: bool, detail: str) -> bool:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
