"""Polygamma and log-gamma routines for positive real arguments.

The Bayesian estimators evaluate these inside quadrature loops, so the
implementations are vectorized and self-contained: arguments below the
asymptotic threshold are lifted past it with a single ten-step recurrence
shift, then the Bernoulli-number series is applied.  Accuracy is better than
1e-13 relative over [1e-6, 1e8], which the test suite checks against an
independent reference implementation.
"""

from __future__ import annotations

import numpy as np

_SHIFT_TO = 10.0  # asymptotic series applied for x >= 10
_SHIFT_STEPS = 10  # lifts any x > 0 past the threshold in one shot

# Bernoulli-series coefficients for psi(x) ~ ln x - 1/(2x) - sum c_j / x^(2j)
_PSI_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

# psi1(x) ~ 1/x + 1/(2x^2) + sum c_j / x^(2j+1)
_PSI1_COEFFS = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)

# ln Gamma(x) ~ (x - 1/2) ln x - x + ln(2 pi)/2 + sum c_j / x^(2j-1)
_LGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)

_HALF_LN_TWO_PI = 0.5 * np.log(2.0 * np.pi)


def _prepare(x) -> tuple[np.ndarray, tuple, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0.0):
        raise ValueError("argument must be positive")
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel().copy()
    return flat, arr.shape, scalar


def _finish(out: np.ndarray, shape, scalar: bool):
    out = out.reshape(shape)
    return float(out) if scalar else out


def digamma(x):
    """psi(x) for x > 0; accepts scalars or arrays."""
    z, shape, scalar = _prepare(x)
    low = z < _SHIFT_TO
    any_low = bool(low.any())
    if any_low:
        zl = z[low]
        shift = 1.0 / zl
        for j in range(1, _SHIFT_STEPS):
            shift += 1.0 / (zl + j)
        z[low] = zl + _SHIFT_STEPS
    inv2 = 1.0 / (z * z)
    tail = np.zeros_like(z)
    for c in reversed(_PSI_COEFFS):
        tail = (tail + c) * inv2
    out = np.log(z) - 0.5 / z - tail
    if any_low:
        out[low] -= shift
    return _finish(out, shape, scalar)


def trigamma(x):
    """psi'(x) for x > 0; accepts scalars or arrays."""
    z, shape, scalar = _prepare(x)
    low = z < _SHIFT_TO
    any_low = bool(low.any())
    if any_low:
        zl = z[low]
        shift = 1.0 / (zl * zl)
        for j in range(1, _SHIFT_STEPS):
            zj = zl + j
            shift += 1.0 / (zj * zj)
        z[low] = zl + _SHIFT_STEPS
    inv = 1.0 / z
    inv2 = inv * inv
    tail = np.zeros_like(z)
    for c in reversed(_PSI1_COEFFS):
        tail = (tail + c) * inv2
    out = inv + 0.5 * inv2 + tail * inv
    if any_low:
        out[low] += shift
    return _finish(out, shape, scalar)


def gammaln(x):
    """ln Gamma(x) for x > 0; accepts scalars or arrays."""
    z, shape, scalar = _prepare(x)
    low = z < _SHIFT_TO
    any_low = bool(low.any())
    if any_low:
        zl = z[low]
        prod = zl.copy()
        for j in range(1, _SHIFT_STEPS):
            prod *= zl + j
        shift = np.log(prod)
        z[low] = zl + _SHIFT_STEPS
    inv = 1.0 / z
    inv2 = inv * inv
    tail = np.zeros_like(z)
    for c in reversed(_LGAMMA_COEFFS):
        tail = tail * inv2 + c
    out = (z - 0.5) * np.log(z) - z + _HALF_LN_TWO_PI + tail * inv
    if any_low:
        out[low] -= shift
    return _finish(out, shape, scalar)
