# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see _py.py for the semantics."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, log1p

cnp.import_array()

cdef double LOG_2PI = 1.8378770664093453


def penalized_scan(object sorted_sq_in, object penalty_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sorted_sq = np.ascontiguousarray(
        sorted_sq_in, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] penalty = np.ascontiguousarray(
        penalty_in, dtype=np.float64
    )
    cdef Py_ssize_t n = sorted_sq.shape[0]
    if penalty.shape[0] != n + 1:
        raise ValueError("penalty must have length n + 1")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] objective = np.empty(n + 1, dtype=np.float64)
    cdef double tail = 0.0
    cdef Py_ssize_t i, k_hat
    objective[n] = penalty[n]
    for i in range(n - 1, -1, -1):
        tail = tail + sorted_sq[i]
        objective[i] = tail + penalty[i]
    k_hat = 0
    cdef double best = objective[0]
    for i in range(1, n + 1):
        if objective[i] < best:
            best = objective[i]
            k_hat = i
    return int(k_hat), objective


def em_loop(object y_sq_in, double sigma_sq, double tau_sq, double xi,
            double tol, long max_iter, double xi_lo, double xi_hi, double tau_floor):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_sq = np.ascontiguousarray(
        y_sq_in, dtype=np.float64
    )
    cdef Py_ssize_t n = y_sq.shape[0]
    cdef list trace = []
    cdef bint converged = False
    cdef bint have_prev = False
    cdef long iterations = 0
    cdef double v0, v1, a0, a1, b0, b1, l0, l1, m, loglik, r
    cdef double r_sum, r_y, y_total, c_sum, c_y
    cdef double prev = 0.0
    cdef Py_ssize_t i

    y_total = 0.0
    for i in range(n):
        y_total = y_total + y_sq[i]

    while True:
        v0 = sigma_sq
        v1 = sigma_sq + tau_sq
        a0 = log1p(-xi) - 0.5 * (LOG_2PI + log(v0))
        a1 = log(xi) - 0.5 * (LOG_2PI + log(v1))
        b0 = 0.5 / v0
        b1 = 0.5 / v1
        loglik = 0.0
        r_sum = 0.0
        r_y = 0.0
        for i in range(n):
            l0 = a0 - y_sq[i] * b0
            l1 = a1 - y_sq[i] * b1
            m = l0 if l0 > l1 else l1
            loglik = loglik + m + log(exp(l0 - m) + exp(l1 - m))
            r = 1.0 / (1.0 + exp(l0 - l1))
            r_sum = r_sum + r
            r_y = r_y + r * y_sq[i]
        trace.append(loglik)
        if have_prev and fabs(loglik - prev) <= tol * max(1.0, fabs(loglik)):
            converged = True
            break
        prev = loglik
        have_prev = True
        if iterations >= max_iter:
            break
        c_sum = n - r_sum
        c_y = y_total - r_y
        xi = min(max(r_sum / n, xi_lo), xi_hi)
        sigma_sq = c_y / c_sum
        tau_sq = max(r_y / r_sum - sigma_sq, tau_floor * sigma_sq)
        iterations += 1
    return sigma_sq, tau_sq, xi, np.asarray(trace), iterations, converged
