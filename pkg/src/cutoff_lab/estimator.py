"""scikit-learn style front-end: fit on a mixture, then query distances,
window times and certificates."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_generator_matrix, check_terms, check_times
from .analysis import (
    check_alpha,
    correction,
    location,
    lower_bound_certificate,
    upper_bound_certificate,
    width,
)
from .exceptions import CorrectionUndefined
from .mixture import cumulative_mass, evaluate
from .spectral import Generator, chi_square_mixture


class CutoffEstimator(BaseEstimator):
    """Cutoff location, width and correction of an exponential mixture.

    Parameters
    ----------
    alpha : float, optional
        If given, ``fit`` also checks ``a_i <= alpha * A_{i-1}``.
    epsilon : float, optional
        Band for the lower certificate; defaults to ``-c / 10``.
    log_coefficients : bool
        Interpret the first column of ``X`` as log-coefficients.

    Attributes
    ----------
    mixture_ : ExpMixture
    location_, width_ : float
    correction_ : float or None
        ``None`` when ``rho_1 * t <= 1``.
    argmax_index_ : int
    log_cumulative_mass_ : ndarray
    alpha_ok_ : bool or None
    """

    def __init__(self, alpha=None, epsilon=None, log_coefficients=False):
        self.alpha = alpha
        self.epsilon = epsilon
        self.log_coefficients = log_coefficients

    def fit(self, X, y=None):
        m = check_terms(X, self.log_coefficients)
        self.mixture_ = m
        self.location_, self.argmax_index_ = location(m)
        self.width_ = width(m)
        try:
            self.correction_ = correction(self.location_, self.width_)
        except CorrectionUndefined:
            self.correction_ = None
        self.log_cumulative_mass_ = cumulative_mass(m).log_A
        self.alpha_ok_ = None if self.alpha is None else check_alpha(m, self.alpha).ok
        return self

    def window_time(self, c, side="left"):
        check_is_fitted(self, "mixture_")
        c = np.asarray(c, dtype=float)
        if side == "left":
            return self.location_ + c * self.width_
        if side == "right":
            if self.correction_ is None:
                raise CorrectionUndefined("right window needs rho_1 * t > 1")
            return self.location_ + self.correction_ + c * self.width_
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def transform(self, T):
        """``log d`` at each time in ``T``."""
        check_is_fitted(self, "mixture_")
        return evaluate(self.mixture_, check_times(T))

    def predict(self, c, side="left"):
        """``log d`` at the window times ``t + c w`` (left) or ``t + r + c w`` (right)."""
        return self.transform(np.atleast_1d(self.window_time(c, side)))

    def lower_certificate(self, c):
        check_is_fitted(self, "mixture_")
        return lower_bound_certificate(self.mixture_, c, self.epsilon)

    def upper_certificate(self, c):
        check_is_fitted(self, "mixture_")
        return upper_bound_certificate(self.mixture_, c)


class ChiSquareMixture(TransformerMixin, BaseEstimator):
    """Chi-square mixture of a reversible rate matrix seen from ``start``.

    ``fit(Q)`` builds ``mixture_``; ``transform(T)`` returns ``log chi2(T)``.
    """

    def __init__(self, start=0):
        self.start = start

    def fit(self, X, y=None):
        self.generator_ = Generator(check_generator_matrix(X))
        self.mixture_ = chi_square_mixture(self.generator_, self.start)
        return self

    def transform(self, T):
        check_is_fitted(self, "mixture_")
        return evaluate(self.mixture_, check_times(T))
