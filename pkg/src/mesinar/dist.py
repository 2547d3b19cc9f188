"""Skellam, extended binomial and Bessel distributions.

Each distribution has a log-pmf (vectorised over the support argument), a pmf
and an exact sampler. Samplers take a :class:`numpy.random.Generator` and are
deterministic given its state. The extended binomial thinning operator is
sampled through its constructive representation (signed binomial part plus a
Bessel-indexed sum of symmetric trinomial steps), not by inverting the
extended binomial pmf, so that the sampler and :func:`eb_pmf` check each other.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, xlogy

from mesinar.errors import DomainError, UndefinedConditionalError
from mesinar.specfun import _n_terms, log_bessel_i, log_reg_hyp_0f1

__all__ = [
    "SkellamParams",
    "EBParams",
    "BesselParams",
    "log_skellam_pmf",
    "skellam_pmf",
    "skellam_sample",
    "log_eb_pmf",
    "log_eb_pmf_bessel",
    "eb_pmf",
    "cond_pd_pmf",
    "log_bessel_pmf",
    "bessel_pmf",
    "bessel_sample",
    "eb_thinning_sample",
]


def _check(cond, name, message):
    if not cond:
        raise DomainError(f"{name}: {message}", name=name)


@dataclass(frozen=True)
class SkellamParams:
    """Rates of the two Poisson counts whose difference is Skellam distributed."""

    theta1: float
    theta2: float

    def __post_init__(self):
        _check(np.isfinite(self.theta1) and self.theta1 >= 0, "theta1", "must be >= 0")
        _check(np.isfinite(self.theta2) and self.theta2 >= 0, "theta2", "must be >= 0")

    @property
    def mean(self):
        return self.theta1 - self.theta2

    @property
    def var(self):
        return self.theta1 + self.theta2


@dataclass(frozen=True)
class EBParams:
    """Extended binomial EB(z, p, theta); ``p`` doubles as the thinning weight alpha."""

    z: int
    p: float
    theta: float

    def __post_init__(self):
        _check(0.0 < self.p < 1.0, "p", "must lie in (0, 1)")
        _check(np.isfinite(self.theta) and self.theta > 0, "theta", "must be > 0")

    @property
    def q(self):
        return 1.0 - self.p


@dataclass(frozen=True)
class BesselParams:
    """Bessel distribution with order ``y >= 0`` and argument ``theta > 0``."""

    y: int
    theta: float

    def __post_init__(self):
        _check(self.y >= 0, "y", "order must be >= 0")
        _check(np.isfinite(self.theta) and self.theta > 0, "theta", "must be > 0")


def _out(value, arg):
    return float(value) if np.ndim(arg) == 0 else value


# --- Skellam ---------------------------------------------------------------


def log_skellam_pmf(z, params):
    """Log pmf of the Skellam law, in the form that stays finite when a rate is zero."""
    t1, t2 = params.theta1, params.theta2
    z = np.asarray(z, dtype=np.int64)
    a = np.abs(z)
    # z >= 0: theta1**z 0F1(;z+1;t1 t2);  z < 0: theta2**|z| 0F1(;|z|+1;t1 t2)
    lead = np.where(z >= 0, xlogy(a, t1), xlogy(a, t2))
    res = -t1 - t2 + lead + log_reg_hyp_0f1(a + 1, t1 * t2)
    return _out(res, z)


def skellam_pmf(z, params):
    """P(Z = z) for Z = N1 - N2, N_i ~ Poisson(theta_i) independent.

    >>> round(skellam_pmf(2, SkellamParams(1.0, 0.0)), 7)
    0.1839397
    """
    return np.exp(log_skellam_pmf(z, params))


def skellam_sample(params, rng, size=None):
    """Draw N1 - N2 with independent Poisson counts."""
    n1 = rng.poisson(params.theta1, size)
    n2 = rng.poisson(params.theta2, size)
    return n1 - n2


# --- extended binomial -----------------------------------------------------


def log_eb_pmf(x, z, p, theta):
    """Log pmf of EB(z, p, theta) via the 0F1 representation."""
    q = 1.0 - p
    x = np.asarray(x, dtype=np.int64)
    res = (
        x * math.log(p)
        + (z - x) * math.log(q)
        + log_reg_hyp_0f1(x + 1, p * p * theta)
        + log_reg_hyp_0f1(z - x + 1, q * q * theta)
        - log_reg_hyp_0f1(z + 1, theta)
    )
    return _out(res, x)


def log_eb_pmf_bessel(x, z, p, theta):
    """Log pmf of EB(z, p, theta) as a ratio of Bessel functions.

    ``I_x(2 p b) I_{z-x}(2 q b) / I_z(2 b)`` with ``b = sqrt(theta)``.
    """
    b = math.sqrt(theta)
    x = np.asarray(x, dtype=np.int64)
    res = (
        log_bessel_i(x, 2.0 * p * b)
        + log_bessel_i(z - x, 2.0 * (1.0 - p) * b)
        - log_bessel_i(z, 2.0 * b)
    )
    return _out(res, x)


def eb_pmf(x, params):
    """P(X = x) for X ~ EB(z, p, theta); supported on all integers."""
    return np.exp(log_eb_pmf(x, params.z, params.p, params.theta))


def cond_pd_pmf(w, z, t1, t2, t3, t4):
    """P(W = w | W + R = z) for W ~ PD(t1, t2) independent of R ~ PD(t3, t4)."""
    denom = log_skellam_pmf(z, SkellamParams(t1 + t3, t2 + t4))
    if denom == -np.inf:
        raise UndefinedConditionalError(f"P(W + R = {z}) is zero")
    w = np.asarray(w, dtype=np.int64)
    num = log_skellam_pmf(w, SkellamParams(t1, t2)) + log_skellam_pmf(z - w, SkellamParams(t3, t4))
    return _out(np.exp(num - denom), w)


# --- Bessel distribution ---------------------------------------------------


def log_bessel_pmf(w, params):
    w = np.asarray(w, dtype=np.int64)
    y, th = params.y, params.theta
    wc = np.maximum(w, 0)
    res = wc * math.log(th) - gammaln(wc + 1.0) - gammaln(wc + y + 1.0) - log_reg_hyp_0f1(y + 1, th)
    res = np.where(w < 0, -np.inf, res)
    return _out(res, w)


def bessel_pmf(w, params):
    """P(W = w) proportional to theta**w / (w! Gamma(w + y + 1)); zero for w < 0."""
    return np.exp(log_bessel_pmf(w, params))


@lru_cache(maxsize=4096)
def _bessel_cdf(y, theta):
    # support [0, mode + 2 sqrt(theta) + 40] leaves tail mass below 1e-18
    upper = int(math.sqrt(theta)) + _n_terms(theta)
    pmf = bessel_pmf(np.arange(upper + 1), BesselParams(y, theta))
    cdf = np.cumsum(pmf)
    cdf /= cdf[-1]
    cdf.setflags(write=False)
    return cdf


def bessel_sample(params, rng, size=None):
    """Draw from the Bessel distribution by inversion of its cumulative table."""
    cdf = _bessel_cdf(int(params.y), float(params.theta))
    u = rng.random(size)
    out = np.searchsorted(cdf, u, side="right")
    return int(out) if size is None else out


# --- extended binomial thinning -------------------------------------------


def eb_thinning_sample(z, alpha, theta, rng, size=None):
    """Sample the extended binomial thinning ``S_{alpha,theta}(z)``.

    ``sgn(z) * Binomial(|z|, alpha) + sum_{i<=W} B_i`` where
    ``W ~ Bessel(|z|, theta)`` is drawn once and the ``B_i`` take the values
    +1 and -1 with probability ``alpha (1 - alpha)`` each. The result is
    distributed as EB(z, alpha, theta).
    """
    _check(0.0 < alpha < 1.0, "alpha", "must lie in (0, 1)")
    _check(theta > 0, "theta", "must be > 0")
    n = abs(int(z))
    sign = (z > 0) - (z < 0)
    kept = rng.binomial(n, alpha, size)
    w = bessel_sample(BesselParams(n, theta), rng, size)
    r = alpha * (1.0 - alpha)
    moves = rng.binomial(w, 2.0 * r)
    ups = rng.binomial(moves, 0.5)
    return sign * kept + 2 * ups - moves
