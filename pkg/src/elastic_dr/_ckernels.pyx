# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Must stay draw-for-draw compatible with ``_pykernels``."""

from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from scipy.special.cython_special cimport ndtri

import numpy as np


def truncnorm_fill(bit_generator, const double[::1] mean, const double[::1] sd,
                   const double[::1] lower, const double[::1] upper,
                   double[::1] out, long max_attempts):
    """Inverse-CDF draws with rejection into ``out``; returns -1 or the failing index."""
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")
    cdef Py_ssize_t i, n = out.shape[0]
    cdef Py_ssize_t failed = -1
    cdef long k
    cdef double u, x
    cdef bint ok
    with bit_generator.lock, nogil:
        for i in range(n):
            if lower[i] == upper[i]:
                rng.next_double(rng.state)
                out[i] = mean[i]
                continue
            ok = False
            for k in range(max_attempts):
                u = rng.next_double(rng.state)
                x = mean[i] + sd[i] * ndtri(u)
                if lower[i] <= x <= upper[i]:
                    ok = True
                    break
            if not ok:
                failed = i
                break
            out[i] = x
    return failed


cdef Py_ssize_t _respond(const double[::1] D0, const double[:, ::1] E, const double[::1] price,
                         double rho0, double lam, double floor,
                         double[::1] dev, double[::1] out) noexcept nogil:
    cdef Py_ssize_t t, tau, n = D0.shape[0]
    cdef Py_ssize_t clamped = 0
    cdef double acc
    for tau in range(n):
        dev[tau] = (price[tau] - rho0 + lam) / rho0
    for t in range(n):
        acc = 0.0
        for tau in range(n):
            acc += E[t, tau] * dev[tau]
        out[t] = D0[t] * (1.0 + acc)
        if out[t] < floor:
            out[t] = floor
            clamped += 1
    return clamped


cdef double _psi(const double[::1] D0, const double[::1] D, const unsigned char[::1] peak) noexcept nogil:
    cdef Py_ssize_t t, n = D0.shape[0]
    cdef double curtailed = 0.0, shifted = 0.0
    for t in range(n):
        if peak[t]:
            curtailed += D0[t] - D[t]
        else:
            shifted += D[t] - D0[t]
    return curtailed - shifted


def respond_into(const double[::1] D0, const double[:, ::1] E, const double[::1] price,
                 double rho0, double lam, double floor, double[::1] out):
    cdef double[::1] dev = np.empty(D0.shape[0])
    return _respond(D0, E, price, rho0, lam, floor, dev, out)


def psi_at(const double[::1] D0, const double[:, ::1] E, const double[::1] price,
           double rho0, double lam, double floor, const unsigned char[::1] peak):
    cdef Py_ssize_t n = D0.shape[0]
    cdef double[::1] dev = np.empty(n)
    cdef double[::1] D = np.empty(n)
    _respond(D0, E, price, rho0, lam, floor, dev, D)
    return _psi(D0, D, peak)


def bisect_lambda(const double[::1] D0, const double[:, ::1] E, const double[::1] price,
                  double rho0, double floor, const unsigned char[::1] peak,
                  double lo, double hi, double tol, long max_iter):
    """Bisect psi(lambda) = 0 on a sign-changing bracket ``[lo, hi]``."""
    cdef Py_ssize_t n = D0.shape[0]
    cdef double[::1] dev = np.empty(n)
    cdef double[::1] D = np.empty(n)
    cdef double f_lo, f_mid, mid = 0.5 * (lo + hi)
    cdef long it
    with nogil:
        _respond(D0, E, price, rho0, lo, floor, dev, D)
        f_lo = _psi(D0, D, peak)
        for it in range(max_iter):
            mid = 0.5 * (lo + hi)
            _respond(D0, E, price, rho0, mid, floor, dev, D)
            f_mid = _psi(D0, D, peak)
            if -tol <= f_mid <= tol or mid == lo or mid == hi:
                break
            if (f_mid < 0) == (f_lo < 0):
                lo = mid
                f_lo = f_mid
            else:
                hi = mid
    return mid
