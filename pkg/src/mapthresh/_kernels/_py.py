"""NumPy reference implementations of the hot kernels.

These define the semantics; the compiled module in ``_core.pyx`` mirrors
them loop for loop.  ``penalized_scan`` accumulates the tail sums in the
same right-to-left order as the C version, so the two backends agree
bit for bit there.
"""

import numpy as np

__all__ = ["penalized_scan", "em_loop"]

_LOG_2PI = float(np.log(2.0 * np.pi))


def penalized_scan(sorted_sq, penalty):
    """Minimize tail-sum-of-squares plus penalty over model sizes.

    ``sorted_sq`` holds the n squared observations in non-increasing order,
    ``penalty`` the n+1 per-size penalties.  Returns (k_hat, objective)
    where objective[k] = sum(sorted_sq[k:]) + penalty[k].  Every candidate
    is scanned (penalty increments may be negative, so no early exit), and
    exact ties go to the smaller size.
    """
    sorted_sq = np.ascontiguousarray(sorted_sq, dtype=np.float64)
    penalty = np.ascontiguousarray(penalty, dtype=np.float64)
    n = sorted_sq.shape[0]
    objective = np.empty(n + 1)
    objective[n] = 0.0
    np.cumsum(sorted_sq[::-1], out=objective[:n][::-1])
    objective += penalty
    return int(np.argmin(objective)), objective


def em_loop(y_sq, sigma_sq, tau_sq, xi, tol, max_iter, xi_lo, xi_hi, tau_floor):
    """EM iterations for the two-component scale mixture of centered normals.

    ``y_sq`` are squared observations.  Each pass computes responsibilities
    for the wide component, the log-likelihood at the current parameters,
    then the closed-form parameter updates with ``xi`` clamped to
    [xi_lo, xi_hi] and the variance gap floored at ``tau_floor`` times the
    narrow variance.  Stops once the relative log-likelihood change drops
    below ``tol``.  Returns (sigma_sq, tau_sq, xi, trace, iterations,
    converged).
    """
    y_sq = np.ascontiguousarray(y_sq, dtype=np.float64)
    n = y_sq.shape[0]
    trace = []
    converged = False
    iterations = 0
    while True:
        v0 = sigma_sq
        v1 = sigma_sq + tau_sq
        l0 = np.log1p(-xi) - 0.5 * (_LOG_2PI + np.log(v0) + y_sq / v0)
        l1 = np.log(xi) - 0.5 * (_LOG_2PI + np.log(v1) + y_sq / v1)
        loglik = float(np.sum(np.logaddexp(l0, l1)))
        trace.append(loglik)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= tol * max(1.0, abs(trace[-1])):
            converged = True
            break
        if iterations >= max_iter:
            break
        r = 1.0 / (1.0 + np.exp(l0 - l1))
        r_sum = float(np.sum(r))
        r_y = float(np.sum(r * y_sq))
        c_sum = n - r_sum
        c_y = float(np.sum(y_sq)) - r_y
        xi = min(max(r_sum / n, xi_lo), xi_hi)
        sigma_sq = c_y / c_sum
        tau_sq = max(r_y / r_sum - sigma_sq, tau_floor * sigma_sq)
        iterations += 1
    return sigma_sq, tau_sq, xi, np.asarray(trace), iterations, converged
