"""Convergence bounds and hyperparameter constraints as closed-form functions.

Implements the guarantees for the NGN family exactly as stated:
the heavy-ball parameter cap and rate constant for NGN-M, the constant-c
and decaying-c suboptimality bounds, the per-coordinate nonconvex and PL
bounds for NGN-D, and the step-size range plus momentum threshold for the
scaled polynomial family. Also estimates the two noise quantities the
bounds consume, sigma_int^2 = E_S[f* - f_S*] and sigma_pos^2 = E_S[f_S*].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problems import StochasticObjective, sample_batch


@dataclass(frozen=True, eq=False)
class TheoryInputs:
    """Inputs to the bound evaluators; leave unused fields at None.

    dist0_sq is ||x0 - x*||^2, f0_gap is f(x0) - f*, sigma_coord the
    per-coordinate noise levels sigma_j, and c_coord/L_coord the
    per-coordinate step caps and smoothness constants.
    """

    c: Optional[float] = None
    L: Optional[float] = None
    K: Optional[int] = None
    dist0_sq: float = 0.0
    sigma_int_sq: float = 0.0
    sigma_pos_sq: float = 0.0
    mu: Optional[float] = None
    sigma_coord: Optional[np.ndarray] = None
    c_coord: Optional[np.ndarray] = None
    L_coord: Optional[np.ndarray] = None
    f0_gap: float = 0.0

    def __post_init__(self):
        for name in ("dist0_sq", "sigma_int_sq", "sigma_pos_sq", "f0_gap"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


def ngn_m_params(c: float, L: float) -> tuple:
    """Rate constant and momentum cap for NGN-M under L-smoothness.

    rho = c / ((1+cL)(1+2cL)) is the usable fraction of the step size;
    the momentum parameter lambda must satisfy
    lambda <= min{cL, 0.5 (1+cL)^-1 (1+2cL)^-1}, and beta = lambda/(1+lambda).
    Returns (rho, lambda_max, beta_max).
    """
    if c <= 0.0 or L <= 0.0:
        raise ValueError("c and L must be positive")
    cl = c * L
    denom = (1.0 + cl) * (1.0 + 2.0 * cl)
    rho = c / denom
    lambda_max = min(cl, 0.5 / denom)
    beta_max = lambda_max / (1.0 + lambda_max)
    return rho, lambda_max, beta_max


def ngn_m_bound(inputs: TheoryInputs) -> float:
    """Average-iterate suboptimality bound for constant-c NGN-M:

    ||x0-x*||^2 (1+2cL)^2 / (cK) + 8cL(1+2cL)^2 sigma_int^2
      + 2cL max{2cL - 1, 0} sigma_pos^2.
    """
    c, L, K = inputs.c, inputs.L, inputs.K
    if c is None or L is None or K is None or c <= 0.0 or L <= 0.0 or K <= 0:
        raise ValueError("ngn_m_bound requires positive c, L, K")
    cl = c * L
    sq = (1.0 + 2.0 * cl) ** 2
    return (inputs.dist0_sq * sq / (c * K)
            + 8.0 * cl * sq * inputs.sigma_int_sq
            + 2.0 * cl * max(2.0 * cl - 1.0, 0.0) * inputs.sigma_pos_sq)


def ngn_m_bound_decaying(c0: float, L: float, K: int, dist0_sq: float,
                         sigma_int_sq: float = 0.0, sigma_pos_sq: float = 0.0) -> float:
    """Weighted-average suboptimality bound for c_k = c0/sqrt(k+1):

    5(1+c0 L)(1+2c0 L)||x0-x*||^2 / (4 c0 sqrt(K))
      + 10 L c0 (1+c0 L)(1+2c0 L) sigma_int^2 log(K+2)/sqrt(K)
      + 5 c0 L (1+c0 L) (log(K+2)/(2 sqrt(K))) max{2c0 L - 1, 0} sigma_pos^2.

    The averaged iterate uses the weights from decaying_weights().
    """
    if c0 <= 0.0 or L <= 0.0 or K <= 0:
        raise ValueError("ngn_m_bound_decaying requires positive c0, L, K")
    cl = c0 * L
    one = (1.0 + cl) * (1.0 + 2.0 * cl)
    sqrt_k = math.sqrt(K)
    log_k = math.log(K + 2.0)
    return (5.0 * one * dist0_sq / (4.0 * c0 * sqrt_k)
            + 10.0 * L * c0 * one * sigma_int_sq * log_k / sqrt_k
            + 5.0 * cl * (1.0 + cl) * (log_k / (2.0 * sqrt_k)) * max(2.0 * cl - 1.0, 0.0) * sigma_pos_sq)


def decaying_weights(c0: float, L: float, K: int) -> np.ndarray:
    """Normalized averaging weights rho_k / sum rho_k for the decaying
    schedule, with rho_k = c_k / ((1+c_k L)(1+2 c_k L)), c_k = c0/sqrt(k+1)."""
    if c0 <= 0.0 or L <= 0.0 or K <= 0:
        raise ValueError("decaying_weights requires positive c0, L, K")
    ks = np.arange(K, dtype=float)
    ck = c0 / np.sqrt(ks + 1.0)
    rho = ck / ((1.0 + ck * L) * (1.0 + 2.0 * ck * L))
    return rho / np.sum(rho)


MODE_NONCONVEX = "nonconvex"
MODE_PL = "pl"


def ngn_d_bound(inputs: TheoryInputs, mode: str) -> float:
    """Per-coordinate NGN-D bounds.

    Nonconvex (requires c_j <= 1/(2 L_j) for all j):
        12 f0_gap / (c_min K) + (1/c_min) sum_j 18 L_j c_j^2 sigma_j^2,
    bounding min_k E||grad f(x^k)||^2.

    PL (requires c_j <= min{1/(2 L_j), 6/mu}):
        (1 - mu c_min / 6)^K f0_gap + (9/(mu c_min)) sum_j L_j c_j^2 sigma_j^2.
    """
    if inputs.c_coord is None or inputs.L_coord is None:
        raise ValueError("ngn_d_bound requires c_coord and L_coord")
    c = np.asarray(inputs.c_coord, dtype=float)
    Lc = np.asarray(inputs.L_coord, dtype=float)
    if c.shape != Lc.shape or c.ndim != 1:
        raise ValueError("c_coord and L_coord must be 1-D vectors of equal length")
    if np.any(c <= 0.0) or np.any(Lc <= 0.0):
        raise ValueError("c_coord and L_coord must be positive")
    K = inputs.K
    if K is None or K <= 0:
        raise ValueError("ngn_d_bound requires a positive horizon K")
    sigma = inputs.sigma_coord
    sigma = np.zeros_like(c) if sigma is None else np.asarray(sigma, dtype=float)
    if sigma.shape != c.shape:
        raise ValueError("sigma_coord must match c_coord in length")
    c_min = float(np.min(c))
    if mode == MODE_NONCONVEX:
        if np.any(c > 1.0 / (2.0 * Lc)):
            raise ValueError("nonconvex mode requires c_j <= 1/(2 L_j) for every coordinate")
        return (12.0 * inputs.f0_gap / (c_min * K)
                + (1.0 / c_min) * float(np.sum(18.0 * Lc * c * c * sigma * sigma)))
    if mode == MODE_PL:
        if inputs.mu is None or inputs.mu <= 0.0:
            raise ValueError("PL mode requires mu > 0")
        if np.any(c > np.minimum(1.0 / (2.0 * Lc), 6.0 / inputs.mu)):
            raise ValueError("PL mode requires c_j <= min{1/(2 L_j), 6/mu} for every coordinate")
        rate = 1.0 - inputs.mu * c_min / 6.0
        return (rate ** K * inputs.f0_gap
                + (9.0 / (inputs.mu * c_min)) * float(np.sum(Lc * c * c * sigma * sigma)))
    raise ValueError(f"unknown mode {mode!r}; expected 'nonconvex' or 'pl'")


def gammahat_range(C_poly: float) -> tuple:
    """Normalized step-size range and momentum threshold on the scaled
    polynomial family f = L x^2 (1 + p(x)^2) once c >= 1/(2L):

    gammahat in [1/(2(1+C)), 2], and heavy-ball momentum converges to
    f* = 0 for beta >= (2(1+C)-1)^2 / (2(1+C)+1)^2.
    Returns (lo, hi, beta_threshold).
    """
    if C_poly < 0.0:
        raise ValueError("C_poly must be >= 0")
    two = 2.0 * (1.0 + C_poly)
    lo = 1.0 / two
    beta_threshold = (two - 1.0) ** 2 / (two + 1.0) ** 2
    return lo, 2.0, beta_threshold


_ENUMERATION_LIMIT = 10 ** 4


def estimate_sigmas(problem: StochasticObjective, batch_size: int,
                    n_mc: int = 10 ** 4, seed: int = 0) -> tuple:
    """Estimate (sigma_int_sq, sigma_pos_sq) for a uniform random batch.

    Enumerates all C(n, batch_size) batches when there are at most 10^4 of
    them, otherwise Monte-Carlo averages over n_mc seeded batches. Requires
    f* metadata and a per-batch minimizer (least-squares problems); batch
    minima use minimum-norm solutions so rank-deficient batches are exact.
    """
    f_star = problem.metadata.f_star
    if f_star is None:
        raise ValueError("estimate_sigmas requires f_star metadata")
    n = problem.n_samples
    if not 1 <= batch_size <= n:
        raise ValueError(f"batch_size {batch_size} out of range [1, {n}]")

    def batch_min(idx):
        if batch_size == n:
            return f_star
        if problem._batch_min is None:
            raise ValueError("per-batch minima unavailable for this problem")
        return problem._batch_min(idx)

    if math.comb(n, batch_size) <= _ENUMERATION_LIMIT:
        mins = [batch_min(np.asarray(comb, dtype=np.intp))
                for comb in itertools.combinations(range(n), batch_size)]
    else:
        mins = [batch_min(sample_batch(problem, seed, t, batch_size).indices)
                for t in range(n_mc)]
    mins = np.asarray(mins)
    sigma_int_sq = float(np.mean(f_star - mins))
    sigma_pos_sq = float(np.mean(mins))
    return sigma_int_sq, sigma_pos_sq
