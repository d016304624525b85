import math

import numpy as np
import pytest
from hypothesis import strategies as st

from cutoff_lab.mixture import ExpMixture

# criterion name -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")


def lemma_bruteforce(n, beta, t):
    """log of the direct 9**n-term sum, accumulated exactly with fsum."""
    ell = math.log(n / math.log(n))
    rho1 = n / (1.0 + beta * ell / n)
    i = np.arange(1, 9**n, dtype=float)
    rho = np.log(math.exp(n) + i * math.exp(-n))
    total = math.fsum(np.exp(-n - rho * t)) + math.exp(n - rho1 * t)
    return math.log(total)


def naive_log_distance(pairs, t):
    """log of sum a exp(-rho t) in the linear domain."""
    return math.log(math.fsum(a * math.exp(-r * t) for a, r in pairs))


@st.composite
def mixtures(draw, max_terms=12, log_a_range=(-6.0, 6.0)):
    """Valid mixtures with moderately sized coefficients."""
    k = draw(st.integers(1, max_terms))
    log_a = draw(st.lists(st.floats(*log_a_range), min_size=k, max_size=k))
    start = draw(st.floats(0.05, 5.0))
    gaps = draw(st.lists(st.floats(0.01, 3.0), min_size=k - 1, max_size=k - 1))
    rho = start + np.concatenate([[0.0], np.cumsum(gaps)])
    return ExpMixture.from_log_terms(log_a, rho)


@st.composite
def cutoff_mixtures(draw, max_terms=12):
    """Mixtures with rho_1 t > 2, so both certificates apply for c in [-2, 2]."""
    m = draw(mixtures(max_terms=max_terms))
    lead = draw(st.floats(2.5, 12.0))
    log_a = np.array(m.log_a)
    log_a[0] = lead
    return ExpMixture(log_a, m.rho)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
