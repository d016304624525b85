import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from cutoff_lab.exceptions import InvalidGenerator, NotIrreducible, NotReversible
from cutoff_lab.families import hypercube_family
from cutoff_lab.mixture import evaluate
from cutoff_lab.spectral import (
    Generator,
    chain_to_json,
    chi_square_mixture,
    matrix_exponential_oracle,
    product_generator,
    random_reversible_generator,
    read_chain,
    spectral_decomposition,
    stationary_distribution,
)

TWO_SYM = [[-1.0, 1.0], [1.0, -1.0]]
TWO_ASYM = [[-2.0, 2.0], [1.0, -1.0]]
CYCLE3 = [[-2.0, 1.0, 1.0], [1.0, -2.0, 1.0], [1.0, 1.0, -2.0]]


def chi2_expm(Q, start, t):
    """Direct chi-square from a dense matrix exponential."""
    Q = np.asarray(Q, dtype=float)
    w, v = np.linalg.eig(Q.T)
    pi = np.real(v[:, np.argmin(np.abs(w))])
    pi = pi / pi.sum()
    row = expm(Q * t)[start]
    return float(np.sum((row - pi) ** 2 / pi))


class TestStationary:
    @pytest.mark.parametrize("Q, pi", [
        (TWO_SYM, [0.5, 0.5]),
        (TWO_ASYM, [1 / 3, 2 / 3]),
        (CYCLE3, [1 / 3, 1 / 3, 1 / 3]),
    ])
    def test_examples(self, Q, pi):
        np.testing.assert_allclose(stationary_distribution(Generator(Q)), pi, rtol=1e-12)


class TestValidation:
    def test_row_sums(self):
        with pytest.raises(InvalidGenerator):
            Generator([[-1.0, 2.0], [1.0, -1.0]])

    def test_negative_offdiagonal(self):
        with pytest.raises(InvalidGenerator):
            Generator([[1.0, -1.0], [1.0, -1.0]])

    def test_not_square(self):
        with pytest.raises(InvalidGenerator):
            Generator([[-1.0, 1.0]])

    def test_reducible(self):
        with pytest.raises(NotIrreducible):
            Generator([[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])

    def test_one_way(self):
        with pytest.raises(NotIrreducible):
            Generator([[-1.0, 1.0], [0.0, 0.0]])

    def test_irreversible_cycle(self):
        # rotating 3-cycle: uniform stationary law, nonzero net flow
        g = Generator([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]])
        with pytest.raises(NotReversible):
            spectral_decomposition(g)


class TestChiSquare:
    def test_two_state_symmetric(self):
        m = chi_square_mixture(Generator(TWO_SYM), 0)
        assert len(m) == 1
        assert m.coefficients[0] == pytest.approx(1.0, rel=1e-12)
        assert m.rho[0] == pytest.approx(4.0, rel=1e-12)

    def test_two_state_asymmetric(self):
        m = chi_square_mixture(Generator(TWO_ASYM), 0)
        assert m.coefficients[0] == pytest.approx(2.0, rel=1e-12)
        assert m.rho[0] == pytest.approx(6.0, rel=1e-12)
        for t in (0.1, 0.5, 2.0):
            assert math.exp(evaluate(m, t)) == pytest.approx(chi2_expm(TWO_ASYM, 0, t), rel=1e-10)

    def test_hypercube_product(self):
        two = Generator([[-0.5, 0.5], [0.5, -0.5]])
        m = chi_square_mixture(product_generator([two] * 3), 0)
        ref = hypercube_family().realize(3)
        np.testing.assert_allclose(m.rho, ref.rho, rtol=1e-10)
        np.testing.assert_allclose(m.coefficients, ref.coefficients, rtol=1e-10)

    def test_start_out_of_range(self):
        with pytest.raises(IndexError):
            chi_square_mixture(Generator(TWO_SYM), 2)

    def test_value_at_zero(self):
        g = random_reversible_generator(6, np.random.default_rng(3))
        pi = stationary_distribution(g)
        for x in range(6):
            m = chi_square_mixture(g, x)
            assert math.exp(evaluate(m, 0.0)) == pytest.approx(1 / pi[x] - 1, rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_decreasing_and_matches_expm(self, size, seed):
        rng = np.random.default_rng(seed)
        g = random_reversible_generator(size, rng)
        start = int(rng.integers(size))
        m = chi_square_mixture(g, start)
        ts = np.linspace(0.0, 3.0, 13)
        vals = evaluate(m, ts)
        assert np.all(np.diff(vals) <= 1e-12)
        for t in ts[1::3]:
            direct = chi2_expm(g.Q, start, t)
            if direct > 1e-6:
                assert math.exp(evaluate(m, t)) == pytest.approx(direct, rel=1e-7)


class TestOracle:
    def test_closed_form_two_state(self):
        assert matrix_exponential_oracle(Generator(TWO_SYM), 0, 0.5) == pytest.approx(math.exp(-2), rel=1e-12)

    def test_at_zero(self):
        g = Generator(TWO_ASYM)
        assert matrix_exponential_oracle(g, 0, 0.0) == pytest.approx(2.0, rel=1e-13)
        assert matrix_exponential_oracle(g, 1, 0.0) == pytest.approx(0.5, rel=1e-13)

    def test_against_expm(self):
        g = random_reversible_generator(5, np.random.default_rng(11))
        for t in (0.05, 0.4, 1.5):
            assert matrix_exponential_oracle(g, 2, t) == pytest.approx(chi2_expm(g.Q, 2, t), rel=1e-9)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            matrix_exponential_oracle(Generator(TWO_SYM), 0, -1.0)


def test_chain_json_round_trip(tmp_path):
    g = random_reversible_generator(4, np.random.default_rng(1))
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(chain_to_json(g)))
    np.testing.assert_array_equal(read_chain(path).Q, g.Q)


def test_chain_json_state_mismatch(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({"states": 3, "Q": TWO_SYM}))
    with pytest.raises(InvalidGenerator):
        read_chain(path)
