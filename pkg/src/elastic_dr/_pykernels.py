"""Pure-Python/numpy twins of the compiled kernels in ``_ckernels.pyx``."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri


def truncnorm_fill(bit_generator, mean, sd, lower, upper, out, max_attempts):
    # Generator.random() and bitgen next_double() read the same stream.
    rng = np.random.Generator(bit_generator)
    for i in range(out.shape[0]):
        if lower[i] == upper[i]:
            rng.random()
            out[i] = mean[i]
            continue
        for _ in range(max_attempts):
            x = mean[i] + sd[i] * float(ndtri(rng.random()))
            if lower[i] <= x <= upper[i]:
                out[i] = x
                break
        else:
            return i
    return -1


def respond_into(D0, E, price, rho0, lam, floor, out):
    dev = (price - rho0 + lam) / rho0
    out[:] = D0 * (1.0 + E @ dev)
    low = out < floor
    out[low] = floor
    return int(low.sum())


def psi_at(D0, E, price, rho0, lam, floor, peak):
    D = np.empty_like(D0)
    respond_into(D0, E, price, rho0, lam, floor, D)
    return _psi(D0, D, peak)


def _psi(D0, D, peak):
    peak = peak.astype(bool)
    return float(np.sum(D0[peak] - D[peak]) - np.sum(D[~peak] - D0[~peak]))


def bisect_lambda(D0, E, price, rho0, floor, peak, lo, hi, tol, max_iter):
    f_lo = psi_at(D0, E, price, rho0, lo, floor, peak)
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = psi_at(D0, E, price, rho0, mid, floor, peak)
        if -tol <= f_mid <= tol or mid == lo or mid == hi:
            break
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return mid
