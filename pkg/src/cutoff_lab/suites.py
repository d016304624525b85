"""Bundled verification suites run by ``cutoff-lab verify``.

Each check returns a :class:`CheckResult`; a suite is a list of checks.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .analysis import cutoff_params, lower_bound_certificate, upper_bound_certificate
from .exceptions import BetaOutOfRange
from .families import (
    BetaSchedule,
    Lemma31Family,
    beta_schedule,
    hypercube_family,
    single_ou_family,
)
from .harness import limit_check
from .mixture import ExpMixture, evaluate, evaluate_lemma31
from .spectral import (
    Generator,
    chi_square_mixture,
    matrix_exponential_oracle,
    product_generator,
    random_reversible_generator,
    spectral_decomposition,
)

__all__ = ["CheckResult", "SUITES", "run_suite", "random_mixture", "lemma31_schedules"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name: str, budget: float, fn: Callable[[], tuple]) -> CheckResult:
    start = time.perf_counter()
    passed, detail = fn()
    elapsed = time.perf_counter() - start
    if elapsed > budget:
        passed = False
        detail += f"; runtime {elapsed:.2f}s exceeds {budget:g}s"
    return CheckResult(name, bool(passed), detail, elapsed)


def lemma31_schedules() -> List[BetaSchedule]:
    return [
        beta_schedule("one"),
        beta_schedule("const", 0.0),
        beta_schedule("const", 0.5),
        beta_schedule("alternating"),
        beta_schedule("gamma", math.log(2.0)),
        beta_schedule("oscillating"),
    ]


def random_mixture(rng: np.random.Generator, size: int) -> ExpMixture:
    """Random mixture with ``rho_1 t > 2`` so every certificate applies."""
    log_a = rng.uniform(-8.0, 8.0, size=size)
    log_a[0] = rng.uniform(2.5, 12.0)
    log_a[1:][rng.random(size - 1) < 0.1] = -np.inf
    rho = rng.uniform(0.1, 5.0) + np.concatenate([[0.0], np.cumsum(rng.exponential(0.5, size - 1))])
    return ExpMixture.from_log_terms(log_a, rho)


# --- individual criteria ----------------------------------------------------


def check_single_ou_exactness() -> CheckResult:
    def run():
        fam = single_ou_family()
        worst = 0.0
        for n in (10, 100, 10_000):
            p = fam.params(n)
            m = fam.realize(n)
            for c in (-3.0, -1.0, 0.0, 1.0, 3.0):
                worst = max(worst, abs(math.expm1(evaluate(m, p.left_time(c)) + c)))
        return worst <= 1e-12, f"max relative error {worst:.2e} (tol 1e-12)"

    return _timed("single-OU profile e^-c is exact", 1.0, run)


def check_lemma31_closed_forms() -> CheckResult:
    def run():
        worst, checked, skipped = 0.0, 0, []
        for beta in lemma31_schedules():
            fam = Lemma31Family(beta)
            for n in range(2, 7):
                if not beta.valid_at(n):
                    try:
                        fam.realize(n)
                        return False, f"{beta.label} n={n}: out-of-range beta was accepted"
                    except BetaOutOfRange:
                        skipped.append(f"{beta.label}@{n}")
                        continue
                direct = cutoff_params(fam.realize(n))
                closed = fam.params(n)
                for a, b in ((direct.t, closed.t), (direct.w, closed.w), (direct.r, closed.r)):
                    worst = max(worst, abs(a - b) / abs(b))
                checked += 1
        detail = f"{checked} (schedule, n) pairs, max relative error {worst:.2e} (tol 1e-10)"
        if skipped:
            detail += f"; beta outside [0,1] (family undefined) for {len(skipped)} pairs"
        return worst <= 1e-10, detail

    return _timed("two-level family closed forms for t, w, r", 10.0, run)


def check_sandwich() -> CheckResult:
    def run():
        misses = []
        for n in range(2, 7):
            for b in (0.0, 0.5, 1.0):
                fam = Lemma31Family(BetaSchedule("const", b))
                m = fam.realize(n)
                p = fam.params(n)
                for c in (-1.0, 0.0, 1.0, 2.0, 4.0):
                    t = p.t + (1.0 - b) * p.r + c * p.w
                    if not evaluate_lemma31(n, b, t).contains(evaluate(m, t)):
                        misses.append((n, b, c))
        p = Lemma31Family(BetaSchedule("const", 0.0)).params(100)
        width = evaluate_lemma31(100, 0.0, p.t + p.r).rel_width
        ok = not misses and width < 1e-3
        return ok, f"{len(misses)} brute-force sums outside the enclosure; n=100 relative width {width:.2e}"

    return _timed("Riemann-sum sandwich encloses brute force", 30.0, run)


def check_certificates(n_random: int = 200, seed: int = 20240101) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        mixtures = [random_mixture(rng, int(rng.integers(1, 51))) for _ in range(n_random)]
        mixtures += [Lemma31Family(BetaSchedule("const", b)).realize(n)
                     for n in (3, 4, 5) for b in (0.0, 0.5, 1.0)]
        mixtures += [hypercube_family().realize(n) for n in (8, 16, 32, 64, 128)]
        bad = 0
        for m in mixtures:
            p = cutoff_params(m)
            for c in (-2.0, -1.0):
                cert = lower_bound_certificate(m, c, -c / 10.0)
                if not (cert.log_floor <= cert.log_bound <= evaluate(m, p.left_time(c))):
                    bad += 1
            for c in (0.5, 1.0, 2.0):
                if not evaluate(m, p.right_time(c)) <= upper_bound_certificate(m, c).log_bound:
                    bad += 1
        # two-level family at large n: interval evaluation against the closed-form certificate
        for b in (0.0, 0.5, 1.0):
            fam = Lemma31Family(BetaSchedule("const", b))
            for n in (100, 1000, 10_000):
                p = fam.params(n)
                for c in (0.5, 1.0, 2.0):
                    if not fam.log_distance(n, p.right_time(c)).log_hi <= fam.upper_certificate(n, c):
                        bad += 1
        return bad == 0, f"{len(mixtures)} explicit mixtures + 9 interval instances, {bad} violations"

    return _timed("lower/upper certificate inequalities", 10.0, run)


def check_lemma31_limits() -> CheckResult:
    def run():
        schedules = [beta_schedule("const", 0.0), beta_schedule("const", 0.5),
                     beta_schedule("one"), beta_schedule("gamma", math.log(2.0))]
        ok, parts = True, []
        for beta in schedules:
            rep = limit_check(beta, (-1.0, 0.0, 1.0), (100, 1000, 10_000), tol=0.02,
                              raise_on_failure=False)
            mono = all(rep.monotone.values())
            ok &= rep.ok and mono
            worst = max(rep.final_error.values())
            parts.append(f"{beta.label}: err@1e4 {worst:.3f}{'' if mono else ' non-monotone'}")
        return ok, "; ".join(parts) + " (tol 0.02)"

    return _timed("two-level family limit profile", 5.0, run)


def check_window_locations() -> CheckResult:
    def run():
        alt = limit_check(beta_schedule("alternating"), (0.0,), (10_000,), tol=0.05,
                          raise_on_failure=False)
        osc = limit_check(beta_schedule("oscillating"), (-1.0, 0.0, 1.0), (10_000,),
                          separation=0.1, raise_on_failure=False)
        sep = min(osc.separation.values())
        detail = (f"alternating err {alt.final_error[0.0]:.3f} (tol 0.05); "
                  f"oscillating even/odd separation {sep:.3f} (>= 0.1)")
        return alt.ok and osc.ok, detail

    return _timed("distinct left/right window locations", 5.0, run)


def check_spectral(n_chains: int = 50, seed: int = 7) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_chains):
            g = random_reversible_generator(int(rng.integers(2, 9)), rng)
            data = spectral_decomposition(g)
            start = int(rng.integers(g.size))
            m = chi_square_mixture(g, start, data)
            relax = 1.0 / abs(data.eigenvalues[1])
            for t in relax * np.array([0, 0.1, 0.2, 0.5, 1, 1.5, 2, 3, 4, 5]):
                oracle = matrix_exponential_oracle(g, start, t)
                worst = max(worst, abs(math.exp(evaluate(m, t)) - oracle) / oracle)
        two = Generator([[-0.5, 0.5], [0.5, -0.5]])
        cube = chi_square_mixture(product_generator([two] * 3), 0)
        ref = hypercube_family().realize(3)
        same = len(cube) == len(ref) and np.allclose(cube.rho, ref.rho, rtol=1e-10) \
            and np.allclose(cube.coefficients, ref.coefficients, rtol=1e-10)
        return worst <= 1e-8 and same, (
            f"max relative gap spectral vs uniformization {worst:.2e} (tol 1e-8); "
            f"hypercube(3) term-by-term {'equal' if same else 'DIFFERENT'}")

    return _timed("spectral mixture matches uniformization oracle", 10.0, run)


def check_upper_limit_recovery() -> CheckResult:
    def run():
        ratio = math.exp(single_ou_family().upper_certificate(10**6, 1.0) + 1.0)
        return 1.0 <= ratio <= 1.05, f"certificate / e^-c = {ratio:.4f} at n=1e6, c=1 (need [1, 1.05])"

    return _timed("upper certificate tends to e^-c", 1.0, run)


SUITES: Dict[str, List[Callable[[], CheckResult]]] = {
    "bounds": [check_single_ou_exactness, check_certificates],
    "lemma31": [check_lemma31_closed_forms, check_sandwich, check_lemma31_limits,
                check_window_locations],
    "spectral": [check_spectral],
    "asymptotic": [check_upper_limit_recovery],
}
SUITES["all"] = SUITES["bounds"] + SUITES["lemma31"] + SUITES["spectral"] + SUITES["asymptotic"]


def run_suite(name: str) -> List[CheckResult]:
    return [check() for check in SUITES[name]]
