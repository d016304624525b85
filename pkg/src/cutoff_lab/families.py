"""Concrete sequences of processes indexed by ``n``.

Each family realizes, for a given ``n``, the exponential mixture of its
distance to equilibrium, or (for the two-level family with ``9**n`` terms)
closed forms plus an interval evaluation that never materializes the terms.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Union

import numpy as np
from scipy.special import gammaln

from .analysis import (
    CutoffParams,
    correction,
    cutoff_params,
    location,
    upper_bound_certificate,
    upper_bound_from_params,
    width,
)
from .exceptions import (
    BetaOutOfRange,
    CoefficientNotAboveOne,
    CutoffLabError,
    GammaNonpositive,
    IndexTooSmall,
    UnknownDescriptor,
)
from .mixture import (
    ExpMixture,
    LogInterval,
    ell,
    evaluate,
    evaluate_lemma31,
    iid_sample,
    lemma31_leading_rate,
    mixture_from_json,
    mixture_to_json,
)

__all__ = [
    "MAX_MATERIALIZE_N",
    "PowerSchedule",
    "BetaSchedule",
    "beta_schedule",
    "ParametricFamily",
    "SingleOUFamily",
    "Lemma31Family",
    "HypercubeFamily",
    "IIDSampleFamily",
    "ExplicitFamily",
    "single_ou_family",
    "lemma31_family",
    "hypercube_family",
    "iid_sample_family",
    "explicit_family",
    "parse_descriptor",
]

# 9**8 ~ 4.3e7 terms; beyond this only interval evaluation is offered
MAX_MATERIALIZE_N = 8


@dataclass(frozen=True)
class PowerSchedule:
    """``n -> coef * n**power``."""

    coef: float = 1.0
    power: float = 1.0

    def __call__(self, n: int) -> float:
        return self.coef * float(n) ** self.power

    def to_json(self):
        if self.power == 0:
            return self.coef
        return {"coef": self.coef, "power": self.power}

    @classmethod
    def from_json(cls, obj) -> "PowerSchedule":
        if isinstance(obj, (int, float)):
            return cls(float(obj), 0.0)
        return cls(float(obj.get("coef", 1.0)), float(obj.get("power", 1.0)))


# --- beta schedules ----------------------------------------------------------

_BETA_CASES = ("const", "alternating", "gamma", "oscillating")


def _first_n_with_ell_at_least(level: float) -> int:
    """Smallest ``n >= 3`` with ``ell(n) >= level`` (ell increases from 3 on)."""
    if ell(3) >= level:
        return 3
    lo, hi = 3, 4
    while ell(hi) < level:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ell(mid) >= level:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class BetaSchedule:
    """One of the five ``beta_n`` schedules of the two-level family.

    ``value`` is the constant for ``const`` and ``gamma`` for ``gamma``
    (``beta_n = 1 - gamma / ell_n``).
    """

    kind: str
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _BETA_CASES:
            raise UnknownDescriptor(f"unknown beta schedule {self.kind!r}")
        if self.kind == "const":
            if self.value is None or not 0.0 <= self.value <= 1.0:
                raise BetaOutOfRange(f"constant beta must lie in [0, 1], got {self.value!r}")
        elif self.kind == "gamma":
            if self.value is None or not self.value > 0:
                raise GammaNonpositive(f"gamma must be positive, got {self.value!r}")

    def raw(self, n: int) -> float:
        if self.kind == "const":
            return float(self.value)
        if self.kind == "alternating":
            return 1.0 if n % 2 == 0 else 0.0
        if self.kind == "gamma":
            return 1.0 - self.value / ell(n)
        return 1.0 - (3.0 if n % 2 == 0 else 1.0) / ell(n)

    def valid_at(self, n: int) -> bool:
        return n >= 2 and 0.0 <= self.raw(n) <= 1.0

    def __call__(self, n: int) -> float:
        if n < 2:
            raise IndexTooSmall(f"n = {n} < 2")
        b = self.raw(n)
        if not 0.0 <= b <= 1.0:
            raise BetaOutOfRange(
                f"beta_{n} = {b:.6g} outside [0, 1]; schedule valid from n = {self.min_valid_n}"
            )
        return b

    @property
    def min_valid_n(self) -> int:
        """Smallest ``n0`` with ``beta_n`` in ``[0, 1]`` for every ``n >= n0``."""
        if self.kind in ("const", "alternating"):
            return 2
        level = self.value if self.kind == "gamma" else 3.0
        n0 = _first_n_with_ell_at_least(level)
        while n0 - 1 >= 2 and self.valid_at(n0 - 1):
            n0 -= 1
        return n0

    @property
    def gamma(self) -> Optional[float]:
        """Limit of ``(1 - beta_n) ell_n``; ``None`` when there is none."""
        if self.kind == "const":
            return 0.0 if self.value == 1.0 else math.inf
        if self.kind == "gamma":
            return float(self.value)
        return None

    def gamma_at(self, n: int) -> float:
        """Limit of ``(1 - beta_k) ell_k`` along the subsequence of ``n``'s parity."""
        if self.kind == "alternating":
            return 0.0 if n % 2 == 0 else math.inf
        if self.kind == "oscillating":
            return 3.0 if n % 2 == 0 else 1.0
        return self.gamma

    @property
    def parity_dependent(self) -> bool:
        return self.kind in ("alternating", "oscillating")

    @property
    def expected(self) -> str:
        if self.kind == "const" and self.value == 1.0:
            return "profile 2 e^-c at (t_n, w_n)"
        if self.kind == "const":
            return "profile e^-c at (t_n + (1 - beta) r_n, w_n)"
        if self.kind == "alternating":
            return "left window at (t_n, w_n), right window at (t_n + r_n, w_n); no profile"
        if self.kind == "gamma":
            return f"profile e^-c (1 + e^{self.value:g}) at (t_n, w_n)"
        return "(t_n, w_n) window cutoff without a profile"

    @property
    def label(self) -> str:
        if self.value is None:
            return self.kind
        return f"{self.kind}:{self.value:g}"

    def to_json(self) -> dict:
        if self.kind == "const":
            return {"case": "const", "value": self.value}
        if self.kind == "gamma":
            return {"case": "gamma", "gamma": self.value}
        return {"case": self.kind}


def beta_schedule(case_id: str, value: Optional[float] = None) -> BetaSchedule:
    """Build a schedule by case name.

    ``"one"`` is shorthand for ``const`` with value 1.
    """
    if case_id == "one":
        return BetaSchedule("const", 1.0)
    return BetaSchedule(case_id, None if value is None else float(value))


def _beta_from_json(obj) -> BetaSchedule:
    case = obj.get("case")
    if case == "const":
        return BetaSchedule("const", float(obj["value"]))
    if case == "gamma":
        return BetaSchedule("gamma", float(obj.get("gamma", obj.get("value"))))
    return beta_schedule(case)


# --- families ----------------------------------------------------------------


class ParametricFamily:
    """Sequence of mixtures ``n -> d_n``.

    Subclasses implement :meth:`realize`; the remaining methods default to
    computing from the realized mixture and are overridden where closed forms
    exist.
    """

    kind = "abstract"

    def realize(self, n: int) -> ExpMixture:
        raise NotImplementedError

    @property
    def label(self) -> str:
        return self.kind

    def location(self, n: int):
        return location(self.realize(n))

    def width(self, n: int) -> float:
        return width(self.realize(n))

    def params(self, n: int) -> CutoffParams:
        return cutoff_params(self.realize(n))

    def log_distance(self, n: int, t: float) -> LogInterval:
        return LogInterval.point(evaluate(self.realize(n), t))

    def upper_certificate(self, n: int, c: float) -> float:
        return upper_bound_certificate(self.realize(n), c).log_bound

    def to_descriptor(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label})"


class SingleOUFamily(ParametricFamily):
    """One Ornstein-Uhlenbeck coordinate: ``d_n(t) = a_n exp(-rho_n t)``."""

    kind = "single_ou"

    def __init__(self, log_a: Callable[[int], float], rho: Callable[[int], float]):
        self.log_a = log_a
        self.rho = rho

    def realize(self, n: int) -> ExpMixture:
        log_a = float(self.log_a(n))
        if not log_a > 0:
            raise CoefficientNotAboveOne(f"a_{n} = exp({log_a:g}) must exceed 1")
        return ExpMixture([log_a], [float(self.rho(n))])

    def location(self, n: int):
        m = self.realize(n)
        return float(m.log_a[0] / m.rho[0]), 1

    def params(self, n: int) -> CutoffParams:
        t, _ = self.location(n)
        w = 1.0 / float(self.rho(n))
        return CutoffParams(t, w, correction(t, w), 1)

    def upper_certificate(self, n: int, c: float) -> float:
        return upper_bound_from_params(self.params(n), c)

    @property
    def label(self) -> str:
        if isinstance(self.log_a, PowerSchedule) and isinstance(self.rho, PowerSchedule):
            if self.log_a == PowerSchedule() and self.rho.power == 0:
                return "single_ou" if self.rho.coef == 1 else f"single_ou/rho:{self.rho.coef:g}"
        return "single_ou/custom"

    def to_descriptor(self) -> dict:
        if not (isinstance(self.log_a, PowerSchedule) and isinstance(self.rho, PowerSchedule)):
            raise CutoffLabError("only power-law schedules can be serialized")
        return {"kind": "single_ou", "log_a": self.log_a.to_json(), "rho": self.rho.to_json()}


class Lemma31Family(ParametricFamily):
    """Two-level family: one term ``(e^n, rho_1)`` plus ``9^n - 1`` terms
    ``(e^-n, log(e^n + (i-1) e^-n))``, with ``rho_1 = n / (1 + beta_n ell_n / n)``.
    """

    kind = "lemma31"

    def __init__(self, beta: BetaSchedule):
        self.beta = beta

    def _check(self, n: int) -> float:
        if n < 2:
            raise IndexTooSmall(f"n = {n} < 2")
        return self.beta(n)

    def leading_rate(self, n: int) -> float:
        return lemma31_leading_rate(n, self._check(n))

    def realize(self, n: int) -> ExpMixture:
        b = self._check(n)
        if n > MAX_MATERIALIZE_N:
            raise CutoffLabError(
                f"n = {n}: 9**n terms cannot be materialized (limit n = {MAX_MATERIALIZE_N}); "
                "use log_distance for interval evaluation"
            )
        k = np.arange(1, 9**n, dtype=float)
        rho = np.concatenate([[lemma31_leading_rate(n, b)], n + np.log1p(k * math.exp(-2.0 * n))])
        log_a = np.full(rho.shape, -float(n))
        log_a[0] = float(n)
        if not rho[0] < rho[1]:
            raise CutoffLabError(f"n = {n}: leading rate does not precede the rest")
        return ExpMixture(log_a, rho)

    def location(self, n: int):
        b = self._check(n)
        return 1.0 + ell(n) * b / n, 1

    def width(self, n: int) -> float:
        return self.location(n)[0] / n

    def params(self, n: int) -> CutoffParams:
        t, _ = self.location(n)
        w = t / n
        return CutoffParams(t, w, ell(n) * w, 1)

    def log_distance(self, n: int, t: float) -> LogInterval:
        return evaluate_lemma31(n, self._check(n), t)

    def upper_certificate(self, n: int, c: float) -> float:
        # log A_1 = n = rho_1 t_n by construction: the C = 0 branch always applies
        return upper_bound_from_params(self.params(n), c)

    @property
    def label(self) -> str:
        return f"lemma31/{self.beta.label}"

    def to_descriptor(self) -> dict:
        return {"kind": "lemma31", "beta": self.beta.to_json()}


class HypercubeFamily(ParametricFamily):
    """Chi-square distance of ``n`` independent symmetric two-state chains:
    ``d(t) = (1 + e^{-rate t})^n - 1``."""

    kind = "hypercube"

    def __init__(self, rate: float = 2.0):
        if not rate > 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate)

    def realize(self, n: int) -> ExpMixture:
        if n < 1:
            raise IndexTooSmall(f"dimension {n} < 1")
        k = np.arange(1, n + 1, dtype=float)
        log_binom = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
        return ExpMixture(log_binom, self.rate * k)

    @property
    def label(self) -> str:
        return "hypercube" if self.rate == 2.0 else f"hypercube/rate:{self.rate:g}"

    def to_descriptor(self) -> dict:
        return {"kind": "hypercube", "rate": self.rate}


class IIDSampleFamily(ParametricFamily):
    """``n`` independent copies of one base process."""

    kind = "iid_sample"

    def __init__(self, base: ExpMixture):
        self.base = base

    def realize(self, n: int) -> ExpMixture:
        return iid_sample(self.base, n)

    def to_descriptor(self) -> dict:
        return {"kind": "iid_sample", "base": mixture_to_json(self.base)}


class ExplicitFamily(ParametricFamily):
    kind = "explicit"

    def __init__(self, mixtures: Union[Mapping[int, ExpMixture], list]):
        if isinstance(mixtures, Mapping):
            self.mixtures: Dict[int, ExpMixture] = {int(k): v for k, v in mixtures.items()}
        else:
            self.mixtures = {i + 1: m for i, m in enumerate(mixtures)}
        if not self.mixtures:
            raise ValueError("explicit family needs at least one mixture")

    def realize(self, n: int) -> ExpMixture:
        try:
            return self.mixtures[n]
        except KeyError:
            raise IndexTooSmall(f"explicit family has no member n = {n}") from None

    def to_descriptor(self) -> dict:
        return {
            "kind": "explicit",
            "mixtures": {str(k): mixture_to_json(m) for k, m in sorted(self.mixtures.items())},
        }


def _as_schedule(s, default: PowerSchedule):
    if s is None:
        return default
    if callable(s):
        return s
    return PowerSchedule.from_json(s)


def single_ou_family(a_schedule=None, rho_schedule=1.0, *, log_a_schedule=None) -> SingleOUFamily:
    """Single OU coordinate with coefficient ``a_n`` and rate ``rho_n``.

    Pass ``log_a_schedule`` for coefficients that overflow doubles; the
    default is ``a_n = e^n``.
    """
    if a_schedule is not None and log_a_schedule is not None:
        raise ValueError("give a_schedule or log_a_schedule, not both")
    if a_schedule is not None:
        if callable(a_schedule):
            log_a = lambda n: math.log(a_schedule(n))  # noqa: E731
        else:
            log_a = PowerSchedule(math.log(float(a_schedule)), 0.0)
    else:
        log_a = _as_schedule(log_a_schedule, PowerSchedule())
    return SingleOUFamily(log_a, _as_schedule(rho_schedule, PowerSchedule(1.0, 0.0)))


def lemma31_family(beta: BetaSchedule) -> Lemma31Family:
    return Lemma31Family(beta)


def hypercube_family(rate: float = 2.0) -> HypercubeFamily:
    return HypercubeFamily(rate)


def iid_sample_family(base: ExpMixture) -> IIDSampleFamily:
    return IIDSampleFamily(base)


def explicit_family(mixtures) -> ExplicitFamily:
    return ExplicitFamily(mixtures)


# --- descriptors -------------------------------------------------------------


def _parse_shorthand(text: str) -> dict:
    kind, _, rest = text.partition("/")
    if kind == "lemma31":
        case, _, value = rest.partition(":")
        if not case:
            raise UnknownDescriptor("lemma31 needs a beta case, e.g. lemma31/const:0.5")
        if case == "const":
            return {"kind": "lemma31", "beta": {"case": "const", "value": float(value)}}
        if case == "gamma":
            return {"kind": "lemma31", "beta": {"case": "gamma", "gamma": float(value)}}
        return {"kind": "lemma31", "beta": {"case": case}}
    if kind in ("single_ou", "hypercube"):
        obj = {"kind": kind}
        if rest:
            key, _, value = rest.partition(":")
            obj[key] = float(value)
        return obj
    raise UnknownDescriptor(f"cannot parse family descriptor {text!r}")


def parse_descriptor(desc) -> ParametricFamily:
    """Family from a JSON dict, a JSON string, a file path, or shorthand
    such as ``lemma31/const:1``, ``single_ou/rho:2``, ``hypercube``."""
    if isinstance(desc, str):
        text = desc.strip()
        if text.startswith("{"):
            desc = json.loads(text)
        elif os.path.isfile(text):
            with open(text) as fh:
                desc = json.load(fh)
        else:
            desc = _parse_shorthand(text)
    kind = desc.get("kind")
    if kind == "lemma31":
        return Lemma31Family(_beta_from_json(desc["beta"]))
    if kind == "single_ou":
        return SingleOUFamily(
            PowerSchedule.from_json(desc.get("log_a", {"coef": 1.0, "power": 1.0})),
            PowerSchedule.from_json(desc.get("rho", 1.0)),
        )
    if kind == "hypercube":
        return HypercubeFamily(float(desc.get("rate", 2.0)))
    if kind == "iid_sample":
        return IIDSampleFamily(mixture_from_json(desc["base"]))
    if kind == "explicit":
        return ExplicitFamily({int(k): mixture_from_json(v) for k, v in desc["mixtures"].items()})
    raise UnknownDescriptor(f"unknown family kind {kind!r}")
