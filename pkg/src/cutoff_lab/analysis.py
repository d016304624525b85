"""Cutoff location, width and correction of an exponential mixture, the
three sufficient conditions, and finite-n bound certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    CorrectionUndefined,
    EmptyIStarSet,
    EpsilonOutOfRange,
    EvaluationTimeNegative,
    LocationNotPositive,
)
from .mixture import ExpMixture, cumulative_mass

__all__ = [
    "TIE_RTOL",
    "CutoffParams",
    "LowerCertificate",
    "UpperCertificate",
    "AlphaCheck",
    "PeresReport",
    "location",
    "width",
    "correction",
    "cutoff_params",
    "check_alpha",
    "check_peres",
    "lower_bound_certificate",
    "upper_bound_certificate",
    "upper_bound_from_params",
    "analysis_report",
]

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class CutoffParams:
    """Location ``t``, width ``w``, correction ``r`` and the attaining index.

    ``argmax_index`` is 1-based, like the term numbering of the mixture.
    """

    t: float
    w: float
    r: float
    argmax_index: int

    @property
    def rho1_t(self) -> float:
        return self.t / self.w

    def left_time(self, c: float) -> float:
        return self.t + c * self.w

    def right_time(self, c: float) -> float:
        return self.t + self.r + c * self.w

    def scaled(self, s: float) -> "CutoffParams":
        """Parameters after multiplying every rate by ``s``."""
        return CutoffParams(self.t / s, self.w / s, self.r / s, self.argmax_index)


@dataclass(frozen=True)
class LowerCertificate:
    c: float
    epsilon: float
    i_star: int
    log_bound: float

    @property
    def log_floor(self) -> float:
        """``-c - epsilon``, which ``log_bound`` always dominates."""
        return -self.c - self.epsilon


@dataclass(frozen=True)
class UpperCertificate:
    c: float
    l_index: int
    C: float
    log_bound: float


class AlphaCheck(NamedTuple):
    ok: bool
    first_violation: Optional[int]


@dataclass(frozen=True)
class PeresReport:
    n_grid: Tuple[int, ...]
    values: Tuple[float, ...]
    threshold: float
    consistent: bool
    note: str = (
        "grid heuristic only: a strictly increasing rho_1*t_n ending above the "
        "threshold is consistent with divergence but proves nothing"
    )

    @property
    def status(self) -> str:
        return "consistent" if self.consistent else "inconsistent"


def _ratios(m: ExpMixture) -> np.ndarray:
    return cumulative_mass(m).log_A / m.rho


def location(m: ExpMixture) -> Tuple[float, int]:
    """Largest ``log A_i / rho_i`` and the smallest (1-based) index attaining it.

    Ratios within ``TIE_RTOL`` (relative) of the maximum count as ties.
    """
    ratios = _ratios(m)
    t = float(ratios.max())
    cut = t - TIE_RTOL * abs(t)
    idx = int(np.argmax(ratios >= cut)) + 1
    return t, idx


def width(m: ExpMixture) -> float:
    return 1.0 / float(m.rho[0])


def correction(t: float, w: float) -> float:
    x = t / w
    if not x > 1.0:
        raise CorrectionUndefined(f"rho_1 * t = {x!r} <= 1; log log is undefined")
    return w * (math.log(x) - math.log(math.log(x)))


def cutoff_params(m: ExpMixture) -> CutoffParams:
    t, idx = location(m)
    if not (t > 0 and math.isfinite(t)):
        raise LocationNotPositive(f"location t = {t!r}; needs 0 < t < inf")
    w = width(m)
    return CutoffParams(t, w, correction(t, w), idx)


def check_alpha(m: ExpMixture, alpha: float) -> AlphaCheck:
    """Whether ``a_i <= alpha * A_{i-1}`` for every ``i >= 2``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    log_A = cumulative_mass(m).log_A
    bad = m.log_a[1:] > math.log(alpha) + log_A[:-1]
    if not bad.any():
        return AlphaCheck(True, None)
    return AlphaCheck(False, int(np.argmax(bad)) + 2)


def check_peres(family, n_grid: Sequence[int], threshold: float = 10.0) -> PeresReport:
    """Tabulate ``rho_1,n * t_n`` over ``n_grid``.

    ``family`` needs ``location(n)`` and ``width(n)``.
    """
    grid = tuple(int(n) for n in n_grid)
    if len(grid) < 3:
        raise ValueError("n_grid needs at least 3 points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n_grid must be increasing")
    values = tuple(family.location(n)[0] / family.width(n) for n in grid)
    increasing = all(b > a for a, b in zip(values, values[1:]))
    return PeresReport(grid, values, threshold, increasing and values[-1] > threshold)


def lower_bound_certificate(
    m: ExpMixture, c: float, epsilon: Optional[float] = None
) -> LowerCertificate:
    """Finite-n lower bound on ``d(t + c w)`` for ``c < 0``.

    ``i*`` is the first index whose ratio ``log A_i / rho_i`` lies within
    ``epsilon * w`` of the location; then
    ``d(t + c w) >= A_{i*} exp(-rho_{i*} (t + c w)) >= exp(-c - epsilon)``.
    """
    if epsilon is None:
        epsilon = -c / 10.0
    if not (c < 0 and 0 < epsilon < -c):
        raise EpsilonOutOfRange(f"need 0 < epsilon < -c, got c={c!r}, epsilon={epsilon!r}")
    t, _ = location(m)
    w = width(m)
    T = t + c * w
    if not T > 0:
        raise EvaluationTimeNegative(f"t + c w = {T!r} is not positive")
    log_A = cumulative_mass(m).log_A
    band = (log_A / m.rho) >= t - epsilon * w
    if not band.any():
        raise EmptyIStarSet(f"no index within epsilon={epsilon!r} of the location")
    i = int(np.argmax(band))
    return LowerCertificate(c, epsilon, i + 1, float(log_A[i] - m.rho[i] * T))


def upper_bound_from_params(params: CutoffParams, c: float, C: float = 0.0) -> float:
    """``log`` of ``e^{-x} (t / s) (s / t + e^C)`` with ``s = r + c w``, ``x = s rho_1``."""
    s = params.r + c * params.w
    x = s / params.w
    return -x + float(np.logaddexp(0.0, math.log(params.t / s) + C))


def upper_bound_certificate(m: ExpMixture, c: float) -> UpperCertificate:
    """Finite-n upper bound on ``d(t + r + c w)`` for ``c > 0``.

    When the leading term attains the location the bound holds with
    ``C = 0``; otherwise ``l`` is the first index whose cumulative mass
    reaches ``exp(rho_1 t)`` and ``C`` measures how far ``A_{l-1}`` falls
    short of it.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    params = cutoff_params(m)
    x = (params.r + c * params.w) / params.w
    if params.argmax_index == 1:
        return UpperCertificate(c, 1, 0.0, upper_bound_from_params(params, c))
    log_A = cumulative_mass(m).log_A
    level = params.rho1_t
    reached = log_A >= level
    l_index = int(np.argmax(reached)) + 1 if reached.any() else params.argmax_index
    l_index = max(l_index, 2)
    C = x * (1.0 - float(log_A[l_index - 2]) / level)
    return UpperCertificate(c, l_index, C, upper_bound_from_params(params, c, C))


def analysis_report(m: ExpMixture, alpha: Optional[float] = None) -> dict:
    """Analysis as a JSON-ready dict; ``r`` is ``None`` when undefined."""
    t, idx = location(m)
    w = width(m)
    positive = bool(t > 0 and math.isfinite(t))
    try:
        r = correction(t, w)
    except CorrectionUndefined:
        r = None
    report = {"t": t, "w": w, "r": r, "argmax_index": idx}
    conditions = {"tn_positive": positive, "peres": "unchecked"}
    if alpha is not None:
        chk = check_alpha(m, alpha)
        conditions["alpha"] = {"ok": chk.ok, "alpha": alpha, "first_violation": chk.first_violation}
    else:
        conditions["alpha"] = {"ok": None, "alpha": None, "first_violation": None}
    report["conditions"] = conditions
    return report
