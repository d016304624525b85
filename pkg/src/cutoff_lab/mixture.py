"""Exponential mixtures ``d(t) = sum_i a_i exp(-rho_i t)`` held in log-domain.

Coefficients are stored as ``log_a`` (``-inf`` encodes a zero coefficient)
so that families with coefficients such as ``e**n`` for large ``n`` stay
representable.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from .exceptions import (
    EmptyMixture,
    ExponentAtPole,
    LeadingCoefficientZero,
    NonpositiveRate,
)

__all__ = [
    "ExpTerm",
    "ExpMixture",
    "CumulativeMass",
    "LogInterval",
    "build_mixture",
    "cumulative_mass",
    "evaluate",
    "tensor_sum",
    "iid_sample",
    "split_signed",
    "ell",
    "lemma31_leading_rate",
    "evaluate_lemma31",
    "mixture_from_json",
    "mixture_to_json",
    "read_mixture",
    "write_mixture",
]

_EPS = np.finfo(float).eps


class ExpTerm(NamedTuple):
    log_a: float
    rho: float

    @property
    def a(self) -> float:
        return math.exp(self.log_a)


@dataclass(frozen=True, eq=False)
class ExpMixture:
    """Finite exponential mixture with strictly increasing rates.

    Use :func:`build_mixture` or :meth:`from_log_terms` rather than the
    constructor: they sort and merge equal rates first.  The constructor
    only validates.
    """

    log_a: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        log_a = np.array(self.log_a, dtype=float).ravel()
        rho = np.array(self.rho, dtype=float).ravel()
        if log_a.size == 0:
            raise EmptyMixture("mixture has no terms")
        if log_a.shape != rho.shape:
            raise ValueError("log_a and rho must have the same length")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise NonpositiveRate("all rates must be positive and finite")
        if np.any(np.diff(rho) <= 0):
            raise ValueError("rates must be strictly increasing")
        if np.any(np.isnan(log_a)) or np.any(log_a == np.inf):
            raise ValueError("log coefficients must be finite or -inf")
        if not np.isfinite(log_a[0]):
            raise LeadingCoefficientZero("leading coefficient a_1 must be positive")
        log_a.flags.writeable = False
        rho.flags.writeable = False
        object.__setattr__(self, "log_a", log_a)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_log_terms(cls, log_a, rho) -> "ExpMixture":
        """Sort by rate and merge equal rates (log-domain sum)."""
        log_a = np.asarray(log_a, dtype=float).ravel()
        rho = np.asarray(rho, dtype=float).ravel()
        if log_a.size == 0:
            raise EmptyMixture("mixture has no terms")
        if log_a.shape != rho.shape:
            raise ValueError("log_a and rho must have the same length")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise NonpositiveRate("all rates must be positive and finite")
        if np.all(np.diff(rho) > 0):
            return cls(log_a, rho)
        rates, inverse = np.unique(rho, return_inverse=True)
        merged = np.full(rates.shape, -np.inf)
        np.logaddexp.at(merged, inverse, log_a)
        return cls(merged, rates)

    def __len__(self) -> int:
        return self.rho.size

    def __iter__(self):
        return iter(self.terms)

    def __repr__(self) -> str:
        if len(self) <= 6:
            body = ", ".join(f"({a:.6g}, {r:.6g})" for a, r in zip(self.coefficients, self.rho))
        else:
            body = f"{len(self)} terms, rates [{self.rho[0]:.6g} .. {self.rho[-1]:.6g}]"
        return f"ExpMixture({body})"

    @property
    def terms(self) -> list:
        return [ExpTerm(float(la), float(r)) for la, r in zip(self.log_a, self.rho)]

    @property
    def coefficients(self) -> np.ndarray:
        """Linear-domain coefficients (may overflow to inf for huge ones)."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_a)

    @property
    def harmless_zeros(self) -> np.ndarray:
        """Indices of zero-coefficient terms kept in the mixture."""
        return np.flatnonzero(np.isneginf(self.log_a))

    def scale_time(self, s: float) -> "ExpMixture":
        """Mixture of ``t -> d(s t)``: every rate multiplied by ``s``."""
        if s <= 0:
            raise ValueError("time scale must be positive")
        return ExpMixture(self.log_a, self.rho * s)

    def __call__(self, t):
        return evaluate(self, t)


@dataclass(frozen=True)
class CumulativeMass:
    """``log_A[i] = log max(1, a_1 + ... + a_{i+1})`` (0-based storage)."""

    log_A: np.ndarray

    def __len__(self) -> int:
        return self.log_A.size

    def __getitem__(self, i):
        return self.log_A[i]


@dataclass(frozen=True)
class LogInterval:
    """Enclosure ``[exp(log_lo), exp(log_hi)]`` of a nonnegative magnitude."""

    log_lo: float
    log_hi: float

    def __post_init__(self):
        if not self.log_lo <= self.log_hi:
            raise ValueError(f"empty interval: log_lo={self.log_lo} > log_hi={self.log_hi}")

    @classmethod
    def point(cls, value: float) -> "LogInterval":
        return cls(value, value)

    def contains(self, log_value: float) -> bool:
        return self.log_lo <= log_value <= self.log_hi

    @property
    def log_mid(self) -> float:
        return 0.5 * (self.log_lo + self.log_hi)

    @property
    def rel_width(self) -> float:
        """``hi / lo - 1``."""
        return math.expm1(self.log_hi - self.log_lo)

    def __add__(self, other: "LogInterval") -> "LogInterval":
        return LogInterval(
            float(np.logaddexp(self.log_lo, other.log_lo)),
            float(np.logaddexp(self.log_hi, other.log_hi)),
        )


def _log_coefficients(coefficients) -> np.ndarray:
    a = np.asarray(coefficients, dtype=float)
    if np.any(a < 0) or np.any(np.isnan(a)):
        raise ValueError("coefficients must be nonnegative")
    with np.errstate(divide="ignore"):
        return np.log(a)


def build_mixture(raw_terms: Iterable[Tuple[float, float]]) -> ExpMixture:
    """Build a mixture from ``(coefficient, rate)`` pairs.

    Terms are sorted by rate and equal rates merged.  Zero coefficients are
    kept (they contribute nothing) unless one ends up in the leading position,
    which raises :class:`LeadingCoefficientZero`.
    """
    raw = [tuple(map(float, pair)) for pair in raw_terms]
    if not raw:
        raise EmptyMixture("mixture has no terms")
    a, rho = np.array(raw).T
    return ExpMixture.from_log_terms(_log_coefficients(a), rho)


def cumulative_mass(m: ExpMixture) -> CumulativeMass:
    log_A = np.maximum(0.0, np.logaddexp.accumulate(m.log_a))
    log_A.flags.writeable = False
    return CumulativeMass(log_A)


def evaluate(m: ExpMixture, t):
    """``log d(t)``; ``t`` may be a scalar or an array of times."""
    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim == 0:
        if len(m) == 1:
            return float(m.log_a[0] - m.rho[0] * t_arr)
        return float(logsumexp(m.log_a - m.rho * t_arr))
    flat = t_arr.ravel()
    if flat.size * len(m) <= 4_000_000:
        out = logsumexp(m.log_a[None, :] - np.outer(flat, m.rho), axis=1)
    else:
        out = np.array([logsumexp(m.log_a - m.rho * ti) for ti in flat])
    return out.reshape(t_arr.shape)


def tensor_sum(m1: ExpMixture, m2: ExpMixture) -> ExpMixture:
    """Distance of a product process: term lists concatenated and merged."""
    return ExpMixture.from_log_terms(
        np.concatenate([m1.log_a, m2.log_a]), np.concatenate([m1.rho, m2.rho])
    )


def iid_sample(base: ExpMixture, n: int) -> ExpMixture:
    """Distance of ``n`` independent copies of the ``base`` process."""
    if int(n) != n or n < 1:
        raise ValueError("sample size must be a positive integer")
    return ExpMixture(base.log_a + math.log(n), base.rho)


def split_signed(
    raw_terms: Iterable[Tuple[float, float]],
) -> Tuple[ExpMixture, Optional[ExpMixture]]:
    """Split a signed mixture into ``d = d_plus - d_minus``.

    Zero coefficients are dropped from both parts.  The minus part is
    ``None`` when there are no negative coefficients.
    """
    raw = [tuple(map(float, pair)) for pair in raw_terms]
    if not raw:
        raise EmptyMixture("mixture has no terms")
    a, rho = np.array(raw).T
    if np.any(rho <= 0):
        raise NonpositiveRate("all rates must be positive")
    pos = a > 0
    neg = a < 0
    if not np.any(pos):
        raise LeadingCoefficientZero("signed mixture has no positive coefficient")
    plus = ExpMixture.from_log_terms(np.log(a[pos]), rho[pos])
    minus = None
    if np.any(neg):
        minus = ExpMixture.from_log_terms(np.log(-a[neg]), rho[neg])
    return plus, minus


# --- the two-level family with 9**n terms -----------------------------------


def ell(n: float) -> float:
    """``log(n / log n)``, the correction scale of the two-level family."""
    return math.log(n / math.log(n))


def lemma31_leading_rate(n: int, beta: float) -> float:
    return n / (1.0 + beta * ell(n) / n)


def _log_shifted(n: int, log_k: Optional[float]) -> float:
    """``log(e**n + k e**-n)`` for ``k = exp(log_k)`` (``None`` means k = 0)."""
    if log_k is None:
        return float(n)
    return n + float(np.logaddexp(0.0, log_k - 2.0 * n))


def _log_power_integral(n: int, t: float, log_ka: Optional[float], log_kb: float) -> float:
    """``log`` of the integral of ``x**-t`` between ``e^n + k_a e^-n`` and ``e^n + k_b e^-n``."""
    la = _log_shifted(n, log_ka)
    lb = _log_shifted(n, log_kb)
    span = lb - la
    s = 1.0 - t
    if s == 0.0:
        return math.log(span)
    # a**s * (exp(s * span) - 1) / s, written so that no pole appears at t = 1
    growth = math.expm1(s * span)
    if growth == 0.0 or not math.isfinite(growth):
        raise ExponentAtPole(f"integral of x**-{t!r} is not representable")
    return s * la + math.log(growth / s)


def evaluate_lemma31(n: int, beta: float, t: float) -> LogInterval:
    """Enclosure of ``log d_n(t)`` for the two-level family with ``9**n`` terms.

    ``d_n = e^n exp(-rho_1 t) + sum_{i=2}^{9^n} e^-n (e^n + (i-1) e^-n)**-t``.
    The leading term is exact; the tail is a right-endpoint Riemann sum of the
    decreasing ``x**-t`` with step ``e^-n`` and is sandwiched between two
    closed-form integrals.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not t > 0:
        raise ValueError("evaluation time must be positive")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    log_m = n * math.log(9.0)
    log_m_minus_1 = log_m + math.log1p(-math.exp(-log_m))
    log_head = n - lemma31_leading_rate(n, beta) * t
    # lower integral: [e^n + e^-n, e^n + m e^-n]; upper: [e^n, e^n + (m-1) e^-n]
    log_tail_lo = _log_power_integral(n, t, 0.0, log_m)
    log_tail_hi = _log_power_integral(n, t, None, log_m_minus_1)
    lo = float(np.logaddexp(log_head, log_tail_lo))
    hi = float(np.logaddexp(log_head, log_tail_hi))
    pad = 16 * _EPS * (1.0 + n * t)
    return LogInterval(lo - pad, hi + pad)


# --- JSON ------------------------------------------------------------------


def mixture_from_json(obj) -> ExpMixture:
    """Parse ``{"terms": [{"a": .., "rho": ..} | {"log_a": .., "rho": ..}, ...]}``."""
    if "terms" not in obj:
        raise ValueError("mixture JSON needs a 'terms' list")
    log_a, rho = [], []
    for k, term in enumerate(obj["terms"]):
        has_a, has_log = "a" in term, "log_a" in term
        if has_a == has_log:
            raise ValueError(f"term {k}: give exactly one of 'a' or 'log_a'")
        if "rho" not in term:
            raise ValueError(f"term {k}: missing 'rho'")
        if has_a:
            a = float(term["a"])
            if a < 0:
                raise ValueError(f"term {k}: negative coefficient")
            log_a.append(math.log(a) if a > 0 else -math.inf)
        else:
            log_a.append(float(term["log_a"]))
        rho.append(float(term["rho"]))
    return ExpMixture.from_log_terms(log_a, rho)


def mixture_to_json(m: ExpMixture) -> dict:
    terms = []
    for la, r in zip(m.log_a, m.rho):
        if la < 700.0:
            terms.append({"a": math.exp(la), "rho": float(r)})
        else:
            terms.append({"log_a": float(la), "rho": float(r)})
    return {"terms": terms}


def read_mixture(path: Union[str, os.PathLike]) -> ExpMixture:
    with open(path) as fh:
        return mixture_from_json(json.load(fh))


def write_mixture(m: ExpMixture, path) -> None:
    with open(path, "w") as fh:
        json.dump(mixture_to_json(m), fh, indent=2)
        fh.write("\n")
