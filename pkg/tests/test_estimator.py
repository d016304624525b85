import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cutoff_lab import ChiSquareMixture, CutoffEstimator
from cutoff_lab.exceptions import CorrectionUndefined
from cutoff_lab.families import hypercube_family


def test_params_round_trip():
    est = CutoffEstimator(alpha=2.0, epsilon=0.1)
    assert est.get_params() == {"alpha": 2.0, "epsilon": 0.1, "log_coefficients": False}
    other = clone(est).set_params(alpha=1.0)
    assert other.alpha == 1.0 and est.alpha == 2.0


def test_fit_single_term():
    est = CutoffEstimator(alpha=1.0).fit([[100.0, 1.0]])
    assert est.location_ == pytest.approx(math.log(100))
    est = CutoffEstimator(log_coefficients=True).fit([[100.0, 1.0]])
    assert est.location_ == pytest.approx(100.0)
    assert est.width_ == 1.0
    assert est.correction_ == pytest.approx(3.07799, abs=1e-5)
    assert est.argmax_index_ == 1


def test_transform_and_predict():
    est = CutoffEstimator(log_coefficients=True).fit([[100.0, 1.0]])
    np.testing.assert_allclose(est.predict([-2.0, 0.0, 2.0]), [2.0, 0.0, -2.0], atol=1e-12)
    np.testing.assert_allclose(est.transform([100.0]), [0.0], atol=1e-12)
    r = est.correction_
    np.testing.assert_allclose(est.predict(1.0, side="right"), [-(r + 1.0)], atol=1e-12)


def test_certificates():
    est = CutoffEstimator(log_coefficients=True).fit([[100.0, 1.0]])
    assert est.lower_certificate(-1.0).log_bound == pytest.approx(1.0)
    assert est.upper_certificate(1.0).C == 0.0


def test_undefined_correction():
    est = CutoffEstimator().fit([[math.e, 1.0]])
    assert est.correction_ is None
    with pytest.raises(CorrectionUndefined):
        est.window_time(1.0, side="right")


def test_not_fitted():
    with pytest.raises(NotFittedError):
        CutoffEstimator().transform([1.0])


def test_input_validation():
    with pytest.raises(ValueError):
        CutoffEstimator().fit([[1.0, 2.0, 3.0]])
    with pytest.raises(ValueError):
        CutoffEstimator().fit([[-1.0, 2.0]])
    with pytest.raises(ValueError):
        CutoffEstimator().fit([[np.nan, 2.0]])


def test_chi_square_transformer():
    two = np.array([[-0.5, 0.5], [0.5, -0.5]])
    Q = np.kron(two, np.eye(2)) + np.kron(np.eye(2), two)
    est = ChiSquareMixture(start=0).fit(Q)
    ref = hypercube_family().realize(2)
    np.testing.assert_allclose(est.mixture_.rho, ref.rho, rtol=1e-10)
    out = est.transform([0.0, 1.0])
    np.testing.assert_allclose(np.exp(out), [3.0, (1 + math.exp(-2)) ** 2 - 1], rtol=1e-10)
