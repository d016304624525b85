"""Chi-square distance of finite reversible continuous-time chains as an
exponential mixture, with a uniformization oracle for cross-checking."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import gammaln, pdtrc

from .exceptions import DegenerateLeadingTerm, InvalidGenerator, NotIrreducible, NotReversible
from .mixture import ExpMixture

__all__ = [
    "MAX_STATES",
    "Generator",
    "SpectralData",
    "stationary_distribution",
    "check_reversible",
    "spectral_decomposition",
    "chi_square_mixture",
    "matrix_exponential_oracle",
    "random_reversible_generator",
    "product_generator",
    "chain_from_json",
    "chain_to_json",
    "read_chain",
]

MAX_STATES = 2048
ROW_SUM_TOL = 1e-10
REVERSIBILITY_RTOL = 1e-9
ZERO_EIGEN_TOL = 1e-12
POISSON_TAIL = 1e-12
# relative gap below which two decay rates are the same eigenvalue split by rounding
RATE_MERGE_RTOL = 1e-9
# weights below this fraction of the total are orthogonality up to rounding
WEIGHT_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class Generator:
    """Rate matrix of an irreducible continuous-time chain."""

    Q: np.ndarray

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise InvalidGenerator("Q must be a square matrix")
        n = Q.shape[0]
        if n < 2:
            raise InvalidGenerator("need at least 2 states")
        if n > MAX_STATES:
            raise InvalidGenerator(f"{n} states exceeds the cap of {MAX_STATES}")
        if not np.all(np.isfinite(Q)):
            raise InvalidGenerator("Q has non-finite entries")
        off = Q - np.diag(np.diag(Q))
        if np.any(off < 0):
            raise InvalidGenerator("off-diagonal rates must be nonnegative")
        scale = max(1.0, float(np.abs(Q).max()))
        if np.any(np.abs(Q.sum(axis=1)) > ROW_SUM_TOL * scale):
            raise InvalidGenerator("rows of Q must sum to 0")
        ncomp, _ = connected_components(off > 0, directed=True, connection="strong")
        if ncomp != 1:
            raise NotIrreducible(f"support graph has {ncomp} strongly connected components")
        Q.flags.writeable = False
        object.__setattr__(self, "Q", Q)

    @property
    def size(self) -> int:
        return self.Q.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralData:
    """``eigenvalues`` are nonincreasing, starting at the stationary 0;
    ``weights[x, j]`` is ``psi_j(x)**2`` (column 0 belongs to the stationary
    eigenvalue and is not part of any mixture)."""

    stationary: np.ndarray
    eigenvalues: np.ndarray
    weights: np.ndarray


def stationary_distribution(g: Generator) -> np.ndarray:
    """Solve ``pi Q = 0`` with ``sum(pi) = 1`` (normalization row appended)."""
    n = g.size
    M = np.vstack([g.Q.T, np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    if np.any(pi <= 0):
        raise NotIrreducible("stationary distribution is not strictly positive")
    return pi / pi.sum()


def check_reversible(g: Generator, pi: Optional[np.ndarray] = None) -> None:
    if pi is None:
        pi = stationary_distribution(g)
    flow = pi[:, None] * g.Q
    gap = np.abs(flow - flow.T)
    scale = np.maximum(np.abs(flow), np.abs(flow.T))
    if np.any(gap > REVERSIBILITY_RTOL * scale + 1e-300):
        i, j = np.unravel_index(np.argmax(gap - REVERSIBILITY_RTOL * scale), gap.shape)
        raise NotReversible(f"detailed balance fails between states {i} and {j}")


def spectral_decomposition(g: Generator) -> SpectralData:
    pi = stationary_distribution(g)
    check_reversible(g, pi)
    root = np.sqrt(pi)
    S = root[:, None] * g.Q / root[None, :]
    S = 0.5 * (S + S.T)
    lam, U = np.linalg.eigh(S)
    order = np.argsort(-lam, kind="stable")
    lam, U = lam[order], U[:, order]
    weights = U**2 / pi[:, None]
    return SpectralData(pi, lam, weights)


def _merge_close_rates(rates: np.ndarray, weights: np.ndarray):
    order = np.argsort(rates, kind="stable")
    rates, weights = rates[order], weights[order]
    groups = [[0]]
    for k in range(1, rates.size):
        if rates[k] - rates[groups[-1][0]] <= RATE_MERGE_RTOL * rates[k]:
            groups[-1].append(k)
        else:
            groups.append([k])
    merged_rates = np.array([np.average(rates[gp], weights=weights[gp] + 1e-300) for gp in groups])
    merged_weights = np.array([weights[gp].sum() for gp in groups])
    return merged_rates, merged_weights


def chi_square_mixture(g: Generator, start: int, data: Optional[SpectralData] = None) -> ExpMixture:
    """Mixture of ``chi2(t) = sum_y (P_t(start, y) - pi_y)**2 / pi_y``.

    Terms are ``(psi_j(start)**2, 2 |lambda_j|)`` over the non-stationary
    eigenpairs; numerically equal rates are merged.
    """
    if not 0 <= start < g.size:
        raise IndexError(f"start state {start} out of range")
    if data is None:
        data = spectral_decomposition(g)
    lam = data.eigenvalues
    scale = max(1.0, float(np.abs(g.Q).max()))
    keep = np.abs(lam) >= ZERO_EIGEN_TOL * scale
    rates = 2.0 * np.abs(lam[keep])
    w = data.weights[start, keep]
    total = 1.0 / data.stationary[start] - 1.0
    w = np.where(w >= WEIGHT_FLOOR * total, w, 0.0)
    if not np.any(w > 0):
        raise DegenerateLeadingTerm(f"state {start} has no weight on any non-stationary mode")
    rates, w = _merge_close_rates(rates, w)
    first = int(np.argmax(w > 0))
    rates, w = rates[first:], w[first:]
    with np.errstate(divide="ignore"):
        return ExpMixture.from_log_terms(np.log(w), rates)


def matrix_exponential_oracle(g: Generator, start: int, t: float) -> float:
    """``chi2(t)`` from the transition row computed by uniformization.

    The deviation ``e_start - pi`` is propagated instead of the row itself,
    so the result does not suffer cancellation once ``P_t`` is close to
    ``pi``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    pi = stationary_distribution(g)
    dev = -pi.copy()
    dev[start] += 1.0
    if t == 0:
        return float(np.sum(dev**2 / pi))
    rate = float(np.max(-np.diag(g.Q)))
    P = np.eye(g.size) + g.Q / rate
    mu = rate * t
    log_mu = math.log(mu)
    acc = np.zeros_like(dev)
    v = dev
    k = 0
    while True:
        acc += math.exp(-mu + k * log_mu - gammaln(k + 1.0)) * v
        if k > mu and pdtrc(k, mu) < POISSON_TAIL:
            break
        v = v @ P
        k += 1
    return float(np.sum(acc**2 / pi))


def random_reversible_generator(
    size: int, rng: Optional[np.random.Generator] = None, density: float = 0.6
) -> Generator:
    """Symmetric random conductances divided by random positive state weights.

    A random spanning path keeps the chain irreducible whatever ``density``.
    """
    rng = np.random.default_rng(rng)
    C = rng.uniform(0.05, 2.0, size=(size, size))
    C = np.triu(C, 1) * (rng.random((size, size)) < density)
    path = rng.permutation(size)
    for a, b in zip(path, path[1:]):
        i, j = min(a, b), max(a, b)
        if C[i, j] == 0:
            C[i, j] = rng.uniform(0.05, 2.0)
    C = C + C.T
    weight = rng.uniform(0.2, 3.0, size=size)
    Q = C / weight[:, None]
    Q[np.diag_indices(size)] = -Q.sum(axis=1)
    return Generator(Q)


def product_generator(factors: Sequence[Generator]) -> Generator:
    """Generator of independent coordinates (Kronecker sum)."""
    Q = np.zeros((1, 1))
    for f in factors:
        Q = np.kron(Q, np.eye(f.size)) + np.kron(np.eye(Q.shape[0]), f.Q)
    return Generator(Q)


def chain_from_json(obj) -> Generator:
    Q = np.asarray(obj["Q"], dtype=float)
    if "states" in obj and int(obj["states"]) != Q.shape[0]:
        raise InvalidGenerator(f"'states' = {obj['states']} but Q has {Q.shape[0]} rows")
    return Generator(Q)


def chain_to_json(g: Generator) -> dict:
    return {"states": g.size, "Q": g.Q.tolist()}


def read_chain(path) -> Generator:
    with open(path) as fh:
        return chain_from_json(json.load(fh))
