"""Hyperparameter fitting for the marginal two-normal scale mixture.

Marginally y_i ~ (1 - xi) N(0, sigma^2) + xi N(0, sigma^2 + tau^2); EM
alternates responsibilities with closed-form variance and weight updates.
The mixture weight stays inside [1/n, 1 - 1/n] and the variance gap is
floored at 1e-8 of the noise variance so the ratio tau^2/sigma^2 never
degenerates to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import em_loop
from .errors import DegenerateDataError, DomainError
from .baselines import mad_sigma, universal_threshold

__all__ = ["EmEstimates", "marginal_loglik", "init_heuristic", "em_fit"]

TAU_SQ_FLOOR = 1e-8

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class EmEstimates:
    """Fitted noise scale, slab scale, mixture weight, and the fit trace."""

    sigma_hat: float
    tau_hat: float
    xi_hat: float
    loglik: float
    iterations: int
    converged: bool
    loglik_trace: np.ndarray = field(repr=False)


def marginal_loglik(y, sigma: float, tau: float, xi: float) -> float:
    """Log-likelihood of the two-component marginal at the given parameters."""
    y = np.asarray(y, dtype=float)
    if sigma <= 0.0 or tau <= 0.0:
        raise DomainError("sigma and tau must be positive")
    if not (0.0 < xi < 1.0):
        raise DomainError(f"xi must lie in (0, 1), got {xi}")
    v0 = sigma**2
    v1 = sigma**2 + tau**2
    l0 = math.log1p(-xi) - 0.5 * (_LOG_2PI + math.log(v0)) - 0.5 * y**2 / v0
    l1 = math.log(xi) - 0.5 * (_LOG_2PI + math.log(v1)) - 0.5 * y**2 / v1
    return float(np.sum(np.logaddexp(l0, l1)))


def init_heuristic(y) -> tuple[float, float, float]:
    """Starting point (sigma0, tau0, xi0) from robust scale and exceedances.

    xi0 is the fraction of magnitudes above the universal cutoff (at least
    1/n), and tau0^2 spreads the excess second moment over that fraction.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 2:
        raise DomainError(f"need at least 2 observations, got {n}")
    sigma0 = mad_sigma(y)
    xi0 = max(1.0 / n, float(np.mean(np.abs(y) > universal_threshold(n, sigma0))))
    tau0_sq = max(float(np.mean(y**2)) - sigma0**2, sigma0**2) / max(xi0, 1.0 / n)
    tau0_sq = max(tau0_sq, 1e-4 * sigma0**2)
    return sigma0, math.sqrt(tau0_sq), xi0


def em_fit(
    y,
    init: tuple[float, float, float] | None = None,
    tol: float = 1e-8,
    max_iter: int = 500,
) -> EmEstimates:
    """Fit (sigma, tau, xi) by EM on the marginal mixture.

    ``init`` is an optional (sigma0, tau0, xi0) triple; by default it comes
    from ``init_heuristic``.  ``tol`` is a relative log-likelihood change;
    hitting ``max_iter`` first returns converged=False rather than raising.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 10:
        raise DomainError(f"EM fitting needs n >= 10, got {n}")
    if not np.all(np.isfinite(y)):
        raise DomainError("y must be finite")
    if np.all(y == y[0]):
        raise DegenerateDataError("constant data cannot identify the mixture")
    if tol <= 0.0 or max_iter < 1:
        raise DomainError("tol must be positive and max_iter >= 1")
    if init is None:
        init = init_heuristic(y)
    sigma0, tau0, xi0 = init
    if sigma0 <= 0.0 or tau0 <= 0.0:
        raise DomainError("init sigma and tau must be positive")
    xi_lo, xi_hi = 1.0 / n, 1.0 - 1.0 / n
    xi0 = min(max(xi0, xi_lo), xi_hi)
    sigma_sq, tau_sq, xi, trace, iterations, converged = em_loop(
        y**2, sigma0**2, tau0**2, xi0, tol, max_iter, xi_lo, xi_hi, TAU_SQ_FLOOR
    )
    return EmEstimates(
        sigma_hat=math.sqrt(sigma_sq),
        tau_hat=math.sqrt(tau_sq),
        xi_hat=xi,
        loglik=float(trace[-1]),
        iterations=iterations,
        converged=converged,
        loglik_trace=trace,
    )
