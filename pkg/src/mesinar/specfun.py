"""Log-space special functions for integer-order Bessel arithmetic.

Every probability mass function in the package is a product or ratio of
modified Bessel functions of the first kind ``I_y(x)`` or, equivalently, of the
regularized confluent hypergeometric limit function

    0F1~(; b; m) = sum_k m**k / (k! * Gamma(b + k)).

Values are returned as natural logarithms. An exact zero is ``-inf`` and
propagates through sums of logs; it is never produced by underflow on the
argument ranges the package uses (``x <= 100``).

All functions broadcast over numpy arrays and also accept Python scalars, in
which case a Python ``float`` is returned.
"""

import numpy as np
from scipy.special import gammaln

from mesinar.errors import DomainError

__all__ = [
    "log_reg_hyp_0f1",
    "log_bessel_i",
    "log_bessel_i_orders",
    "hyp_ratio",
    "log_hyp_ratio",
]

# extra terms past the series peak; with 2*sqrt(m) this leaves a tail < 1e-18
_TAIL_TERMS = 40


def _n_terms(m_max):
    return int(np.ceil(2.0 * np.sqrt(m_max))) + _TAIL_TERMS


def _scalar_out(value, *args):
    if all(np.ndim(a) == 0 for a in args):
        return float(value)
    return value


def _log_0f1(b, m):
    """Vectorised core; ``b`` integer array, ``m`` nonnegative float array."""
    b, m = np.broadcast_arrays(np.asarray(b, dtype=np.int64), np.asarray(m, dtype=float))
    out = np.empty(b.shape, dtype=float)

    zero = m == 0.0
    if zero.any():
        bz = b[zero]
        # only the k=0 term survives, and it vanishes on the Gamma poles
        out[zero] = np.where(bz >= 1, -gammaln(np.maximum(bz, 1)), -np.inf)

    pos = ~zero
    if pos.any():
        bp = b[pos]
        mp = m[pos]
        k0 = np.maximum(0, 1 - bp)
        k = k0[:, None] + np.arange(_n_terms(mp.max()))[None, :]
        logm = np.log(mp)[:, None]
        terms = k * logm - gammaln(k + 1.0) - gammaln(bp[:, None] + k)
        peak = terms.max(axis=1)
        out[pos] = peak + np.log(np.exp(terms - peak[:, None]).sum(axis=1))
    return out


def log_reg_hyp_0f1(b, m):
    """Return ``log 0F1~(; b; m)`` for integer ``b`` and ``m >= 0``.

    Terms with ``b + k`` on a nonpositive integer are zero (reciprocal Gamma
    pole), so for ``b <= 0`` the series effectively starts at ``k = 1 - b``.

    Raises
    ------
    DomainError
        If any ``m < 0``.
    """
    m_arr = np.asarray(m, dtype=float)
    if np.any(m_arr < 0) or np.any(np.isnan(m_arr)):
        raise DomainError("0F1 argument must be nonnegative", name="m")
    return _scalar_out(_log_0f1(b, m_arr), b, m)


def log_bessel_i(order, x):
    """Return ``log I_order(x)`` for integer ``order`` and ``x >= 0``.

    ``I_{-y} = I_y`` is applied before evaluation, then
    ``I_y(x) = (x/2)**y * 0F1~(; y+1; x**2/4)``.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or np.any(np.isnan(x_arr)):
        raise DomainError("Bessel argument must be nonnegative", name="x")
    y = np.abs(np.asarray(order, dtype=np.int64))
    y, xb = np.broadcast_arrays(y, x_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = np.where(y == 0, 0.0, y * np.log(xb / 2.0))
    res = lead + _log_0f1(y + 1, xb * xb / 4.0)
    return _scalar_out(res, order, x)


def log_bessel_i_orders(lo, hi, x):
    """Return ``log I_y(x)`` for every integer ``y`` in ``[lo, hi]`` as an array."""
    return log_bessel_i(np.arange(lo, hi + 1), float(x))


def log_hyp_ratio(z, theta):
    """Log of ``0F1~(; z+2; theta) / 0F1~(; z+1; theta)``."""
    th = np.asarray(theta, dtype=float)
    if np.any(th <= 0) or np.any(np.isnan(th)):
        raise DomainError("theta must be positive", name="theta")
    z = np.asarray(z, dtype=np.int64)
    res = _log_0f1(z + 2, th) - _log_0f1(z + 1, th)
    return _scalar_out(res, z, theta)


def hyp_ratio(z, theta):
    """Ratio ``0F1~(; z+2; theta) / 0F1~(; z+1; theta)`` for integer ``z``, ``theta > 0``.

    This is the factor multiplying ``2 p (1-p) theta`` in the conditional
    variance of extended binomial thinning; ``theta * hyp_ratio(|z|, theta)`` is
    also the mean of the Bessel distribution with order ``|z|``.
    """
    return np.exp(log_hyp_ratio(z, theta))
