"""Input validation shared by the estimator front-end."""
import numpy as np
from sklearn.utils import check_array

from .mixture import ExpMixture


def check_terms(X, log_coefficients=False):
    """Coerce ``X`` to an :class:`ExpMixture`.

    ``X`` is an ``ExpMixture`` or an array-like of shape ``(n_terms, 2)``
    holding ``(coefficient, rate)`` rows, or ``(log_coefficient, rate)`` rows
    when ``log_coefficients`` is set.
    """
    if isinstance(X, ExpMixture):
        return X
    arr = check_array(X, dtype=np.float64, ensure_all_finite=not log_coefficients)
    if arr.shape[1] != 2:
        raise ValueError(f"expected (n_terms, 2) array, got shape {arr.shape}")
    first, rho = arr[:, 0], arr[:, 1]
    if log_coefficients:
        log_a = first
    else:
        if np.any(first < 0):
            raise ValueError("coefficients must be nonnegative")
        with np.errstate(divide="ignore"):
            log_a = np.log(first)
    return ExpMixture.from_log_terms(log_a, rho)


def check_times(T):
    """1-d float array of evaluation times."""
    return check_array(np.atleast_1d(np.asarray(T, dtype=float)), ensure_2d=False)


def check_generator_matrix(Q):
    return check_array(Q, dtype=np.float64)
