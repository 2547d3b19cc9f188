"""The MESINAR(1) process and the PDINAR(1) comparator.

MESINAR(1) draws the next state from a Pegram mixture: with probability
``phi`` it is ``delta * S_{p,theta}(Z_{t-1})`` (extended binomial thinning,
``theta = beta**2``), otherwise an independent Skellam(theta1, theta2)
innovation. PDINAR(1) adds the innovation to the thinned state instead.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from mesinar.dist import (
    SkellamParams,
    eb_thinning_sample,
    log_eb_pmf,
    log_eb_pmf_bessel,
    log_skellam_pmf,
    skellam_sample,
)
from mesinar.errors import ConvergenceError, DomainError
from mesinar.specfun import hyp_ratio, log_bessel_i_orders

__all__ = [
    "ModelParams",
    "PDINARParams",
    "IntSeries",
    "ProbVector",
    "log_transition_pmf",
    "transition_pmf",
    "simulate",
    "simulate_pdinar",
    "cond_mean",
    "cond_var",
    "stationary_mean",
    "stationary_var",
    "autocovariance",
    "kernel_matrix",
    "stationary_dist",
    "pdinar_row",
    "pdinar_transition_pmf",
    "pdinar_log_transitions",
    "PARAMETER_GROUPS",
]

PARAM_NAMES = ("phi", "p", "beta", "theta1", "theta2")


def _bad(name, message):
    raise DomainError(f"{name}: {message}", name=name)


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector ``(phi, p, beta, theta1, theta2)`` plus the sign ``delta``."""

    phi: float
    p: float
    beta: float
    theta1: float
    theta2: float
    delta: int = 1

    def __post_init__(self):
        vals = (self.phi, self.p, self.beta, self.theta1, self.theta2)
        for name, v in zip(PARAM_NAMES, vals):
            if not np.isfinite(v):
                _bad(name, "must be finite")
        if not 0.0 <= self.phi <= 1.0:
            _bad("phi", "must lie in [0, 1]")
        if not 0.0 < self.p < 1.0:
            _bad("p", "must lie in (0, 1)")
        if self.beta <= 0:
            _bad("beta", "must be > 0")
        if self.theta1 <= 0:
            _bad("theta1", "must be > 0")
        if self.theta2 <= 0:
            _bad("theta2", "must be > 0")
        if self.delta not in (1, -1):
            _bad("delta", "must be +1 or -1")

    @property
    def theta(self):
        return self.beta**2

    @property
    def innovation(self):
        return SkellamParams(self.theta1, self.theta2)

    @property
    def rho(self):
        """Lag-one autocorrelation ``phi * p * delta``."""
        return self.phi * self.p * self.delta

    def vector(self):
        return np.array([self.phi, self.p, self.beta, self.theta1, self.theta2])

    @classmethod
    def from_vector(cls, omega, delta=1):
        return cls(*(float(v) for v in omega), delta=int(delta))

    def as_dict(self):
        return dict(zip(PARAM_NAMES, self.vector().tolist()), delta=self.delta)


@dataclass(frozen=True)
class PDINARParams:
    """PDINAR(1) comparator ``Z_t = delta * S_{alpha,theta}(Z_{t-1}) + eps_t``.

    ``theta1`` and ``theta2`` are the innovation rates. The thinning
    dependence parameter is tied to them as ``theta1 * theta2 / (1 - alpha)**2``,
    the product of the Skellam marginal rates of the positive-sign process, so
    the model has three free parameters.
    """

    alpha: float
    theta1: float
    theta2: float
    delta: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            _bad("alpha", "must lie in (0, 1)")
        if not (np.isfinite(self.theta1) and self.theta1 > 0):
            _bad("theta1", "must be > 0")
        if not (np.isfinite(self.theta2) and self.theta2 > 0):
            _bad("theta2", "must be > 0")
        if self.delta not in (1, -1):
            _bad("delta", "must be +1 or -1")

    @property
    def theta(self):
        return self.theta1 * self.theta2 / (1.0 - self.alpha) ** 2

    @property
    def innovation(self):
        return SkellamParams(self.theta1, self.theta2)


# four reference parameter groups of the simulation study
PARAMETER_GROUPS = {
    "omega1": ModelParams(0.8, 0.5, math.sqrt(5.0), 10.0, 10.0, delta=1),
    "omega2": ModelParams(0.2, 0.4, 2.0, 9.0, 7.0, delta=1),
    "omega3": ModelParams(0.2, 0.4, math.sqrt(5.0), 5.0, 5.0, delta=-1),
    "omega4": ModelParams(0.2, 0.8, math.sqrt(5.0), 10.0, 10.0, delta=-1),
}


@dataclass
class IntSeries:
    """Observed or simulated integer series with optional time labels."""

    values: np.ndarray
    labels: list = field(default=None)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 1:
            raise DomainError("series must be one-dimensional", name="values")
        if vals.size and not np.all(np.equal(np.mod(vals, 1), 0)):
            raise DomainError("series must contain integers", name="values")
        self.values = vals.astype(np.int64)
        if self.labels is not None and len(self.labels) != len(self.values):
            raise DomainError("labels and values differ in length", name="labels")

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass
class ProbVector:
    """Probability masses on the integer interval ``[lo, lo + len(masses) - 1]``."""

    lo: int
    masses: np.ndarray

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)

    @property
    def hi(self):
        return self.lo + len(self.masses) - 1

    @property
    def support(self):
        return np.arange(self.lo, self.hi + 1)

    def mean(self):
        return float(self.support @ self.masses)

    def var(self):
        s = self.support
        m = self.mean()
        return float(((s - m) ** 2) @ self.masses)

    def expect(self, values):
        return float(np.asarray(values) @ self.masses)

    def is_normalized(self, tol=1e-9):
        return bool(np.all(self.masses >= 0) and abs(self.masses.sum() - 1.0) <= tol)

    def pmf(self, z):
        z = np.asarray(z, dtype=np.int64)
        idx = z - self.lo
        inside = (idx >= 0) & (idx < len(self.masses))
        out = np.where(inside, self.masses[np.clip(idx, 0, len(self.masses) - 1)], 0.0)
        return float(out) if out.ndim == 0 else out


# --- transition kernel -----------------------------------------------------


def _log_components(z_prev, z_next, params, form):
    z_prev = np.asarray(z_prev, dtype=np.int64)
    z_next = np.asarray(z_next, dtype=np.int64)
    x = params.delta * z_next
    if form == "hyp":
        log_thin = log_eb_pmf(x, z_prev, params.p, params.theta) if z_prev.ndim == 0 else None
        if log_thin is None:
            zp, xx = np.broadcast_arrays(z_prev, x)
            log_thin = np.array([log_eb_pmf(a, b, params.p, params.theta) for a, b in zip(xx.ravel(), zp.ravel())]).reshape(zp.shape)
    elif form == "bessel":
        if z_prev.ndim == 0:
            log_thin = log_eb_pmf_bessel(x, int(z_prev), params.p, params.theta)
        else:
            zp, xx = np.broadcast_arrays(z_prev, x)
            log_thin = np.array([log_eb_pmf_bessel(a, b, params.p, params.theta) for a, b in zip(xx.ravel(), zp.ravel())]).reshape(zp.shape)
    else:
        raise ValueError(f"unknown form {form!r}")
    log_innov = log_skellam_pmf(z_next, params.innovation)
    return np.asarray(log_thin, dtype=float), np.asarray(log_innov, dtype=float)


def log_transition_pmf(z_prev, z_next, params, form="hyp"):
    """Log of P(Z_t = z_next | Z_{t-1} = z_prev).

    ``form="hyp"`` evaluates the thinning term with 0F1 functions,
    ``form="bessel"`` with modified Bessel functions; the two agree to
    rounding.
    """
    lt, li = _log_components(z_prev, z_next, params, form)
    with np.errstate(divide="ignore"):
        lphi = math.log(params.phi) if params.phi > 0 else -np.inf
        l1phi = math.log1p(-params.phi) if params.phi < 1 else -np.inf
    res = np.logaddexp(lphi + lt, l1phi + li)
    return float(res) if res.ndim == 0 else res


def transition_pmf(z_prev, z_next, params, form="hyp"):
    """P(Z_t = z_next | Z_{t-1} = z_prev) as the phi-weighted mixture of the two branches."""
    lt, li = _log_components(z_prev, z_next, params, form)
    res = params.phi * np.exp(lt) + (1.0 - params.phi) * np.exp(li)
    return float(res) if np.ndim(res) == 0 else res


def kernel_matrix(params, lo, hi):
    """Transition matrix restricted to states ``lo..hi`` (rows are not renormalised)."""
    states = np.arange(lo, hi + 1)
    x = params.delta * states
    b = params.beta
    span = 2 * max(abs(lo), abs(hi))
    orders_lo = -span - 1
    t_p = log_bessel_i_orders(orders_lo, span + 1, 2.0 * params.p * b)
    t_q = log_bessel_i_orders(orders_lo, span + 1, 2.0 * (1.0 - params.p) * b)
    t_1 = log_bessel_i_orders(orders_lo, span + 1, 2.0 * b)
    zp = states[:, None]
    log_thin = t_p[x[None, :] - orders_lo] + t_q[zp - x[None, :] - orders_lo] - t_1[zp - orders_lo]
    innov = np.exp(log_skellam_pmf(states, params.innovation))
    return params.phi * np.exp(log_thin) + (1.0 - params.phi) * innov[None, :]


# --- simulation ------------------------------------------------------------


def simulate(params, n, burn_in=500, rng=None):
    """Simulate ``n`` observations of the process.

    Innovations and mixing indicators are drawn up front, the first state from
    the innovation law, then each step either thins the previous state (and
    applies ``delta``) or takes the innovation. The first ``burn_in`` states
    are discarded; ``burn_in=0`` reproduces the plain recipe.
    """
    if n < 1:
        raise DomainError("n must be >= 1", name="n")
    if burn_in < 0:
        raise DomainError("burn_in must be >= 0", name="burn_in")
    if rng is None:
        rng = np.random.default_rng()
    total = n + burn_in
    eps = skellam_sample(params.innovation, rng, total)
    use_thin = rng.random(total) < params.phi
    z = np.empty(total, dtype=np.int64)
    z[0] = eps[0]
    p, theta, delta = params.p, params.theta, params.delta
    for t in range(1, total):
        if use_thin[t]:
            z[t] = delta * eb_thinning_sample(int(z[t - 1]), p, theta, rng)
        else:
            z[t] = eps[t]
    return IntSeries(z[burn_in:])


def simulate_pdinar(params, n, burn_in=500, rng=None):
    """Simulate the PDINAR(1) comparator ``Z_t = delta * S(Z_{t-1}) + eps_t``."""
    if n < 1:
        raise DomainError("n must be >= 1", name="n")
    if rng is None:
        rng = np.random.default_rng()
    total = n + burn_in
    eps = skellam_sample(params.innovation, rng, total)
    z = np.empty(total, dtype=np.int64)
    z[0] = eps[0]
    for t in range(1, total):
        z[t] = params.delta * eb_thinning_sample(int(z[t - 1]), params.alpha, params.theta, rng) + eps[t]
    return IntSeries(z[burn_in:])


# --- moments ---------------------------------------------------------------


def cond_mean(z_prev, params):
    """E[Z_t | Z_{t-1} = z_prev] = phi p delta z_prev + (1 - phi)(theta1 - theta2)."""
    z_prev = np.asarray(z_prev, dtype=float)
    res = params.rho * z_prev + (1.0 - params.phi) * (params.theta1 - params.theta2)
    return float(res) if res.ndim == 0 else res


def cond_var(z_prev, params):
    """Var[Z_t | Z_{t-1} = z_prev].

    The thinning variance is written with the signed state and the signed
    0F1 ratio; for negative states the ratio recurrence
    ``theta * r(-y) = y + theta * r(y)`` makes this equal to the
    ``|z_prev|`` form, so the expression holds on all of Z.
    """
    phi, p, th = params.phi, params.p, params.theta
    zp = np.asarray(z_prev, dtype=np.int64)
    thin = p * (1.0 - p) * zp + 2.0 * p * (1.0 - p) * th * hyp_ratio(zp, th)
    d = params.theta1 - params.theta2
    res = phi * thin + (1.0 - phi) * (params.theta1 + params.theta2) + phi * (1.0 - phi) * (p * params.delta * zp - d) ** 2
    return float(res) if np.ndim(res) == 0 else res


def stationary_mean(params):
    """(1 - phi)(theta1 - theta2) / (1 - phi p delta)."""
    return (1.0 - params.phi) * (params.theta1 - params.theta2) / (1.0 - params.rho)


def stationary_var(params, dist=None, ratio_mean=None):
    """Stationary variance from the law of total variance.

    ``Var Z (1 - phi p^2) = phi p q mu + 2 phi p q theta E[r(Z)]
    + (1 - phi)(theta1 + theta2) + phi (1 - phi) E[(p delta Z - d)^2]``
    with ``d = theta1 - theta2``, ``mu`` the stationary mean and ``r`` the
    0F1 ratio of :func:`mesinar.specfun.hyp_ratio`.

    ``E[r(Z)]`` is taken against ``dist`` (a normalised :class:`ProbVector`,
    e.g. from :func:`stationary_dist`) or given directly as ``ratio_mean``
    (e.g. a sample average over an observed series).
    """
    phi, p, th = params.phi, params.p, params.theta
    if ratio_mean is None:
        if phi == 0.0:
            ratio_mean = 0.0
        elif dist is None:
            dist = stationary_dist(params)
        if dist is not None:
            if not dist.is_normalized():
                raise DomainError("dist must be a normalised probability vector", name="dist")
            ratio_mean = dist.expect(hyp_ratio(dist.support, th))
    q = 1.0 - p
    d = params.theta1 - params.theta2
    mu = stationary_mean(params)
    num = (
        phi * p * q * mu
        + 2.0 * phi * p * q * th * ratio_mean
        + (1.0 - phi) * (params.theta1 + params.theta2)
        + phi * (1.0 - phi) * (p * p * mu * mu - 2.0 * p * params.delta * d * mu + d * d)
    )
    return num / (1.0 - phi * p * p)


def autocovariance(k, params, var0):
    """Lag-``k`` autocovariance ``(phi p delta)**k * var0``."""
    if k < 0:
        raise DomainError("lag must be >= 0", name="k")
    return params.rho**k * var0


def stationary_dist(params, tol=1e-10, max_iter=20000):
    """Numerical stationary distribution by power iteration of the truncated kernel.

    Starts from the innovation law and iterates until successive
    distributions differ by less than ``tol`` in total variation. The
    support is widened until the mass in the outer five states on each side
    is below ``tol / 10``.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0", name="tol")
    mu = stationary_mean(params)
    spread = math.sqrt(params.theta1 + params.theta2 + params.theta)
    half = int(12 * spread + 30)
    center = int(round(mu))
    while True:
        lo, hi = center - half, center + half
        K = kernel_matrix(params, lo, hi)
        pi = np.exp(log_skellam_pmf(np.arange(lo, hi + 1), params.innovation))
        pi /= pi.sum()
        for _ in range(max_iter):
            new = pi @ K
            new /= new.sum()
            diff = 0.5 * np.abs(new - pi).sum()
            pi = new
            if diff < tol:
                break
        else:
            raise ConvergenceError("stationary distribution did not converge", best=ProbVector(lo, pi))
        if pi[:5].sum() < tol / 10 and pi[-5:].sum() < tol / 10:
            return ProbVector(lo, pi)
        half = int(half * 1.5) + 10


# --- PDINAR(1) -------------------------------------------------------------


def _span(center, sd):
    w = int(14 * sd + 40)
    c = int(round(center))
    return c - w, c + w


def _thin_sd(alpha, theta, z):
    return math.sqrt(alpha * (1 - alpha) * abs(z) + 2 * alpha * (1 - alpha) * theta * hyp_ratio(abs(z), theta))


def pdinar_row(z_prev, alpha, theta, skl, delta):
    """Distribution of ``delta * S_{alpha,theta}(z_prev) + eps`` as a :class:`ProbVector`."""
    z_prev = int(z_prev)
    s_lo, s_hi = _span(alpha * z_prev, _thin_sd(alpha, theta, z_prev))
    s = np.arange(s_lo, s_hi + 1)
    thin = np.exp(log_eb_pmf(s, z_prev, alpha, theta))
    if delta == -1:
        thin = thin[::-1]
        s_lo, s_hi = -s_hi, -s_lo
    e_lo, e_hi = _span(skl.theta1 - skl.theta2, math.sqrt(skl.theta1 + skl.theta2))
    innov = np.exp(log_skellam_pmf(np.arange(e_lo, e_hi + 1), skl))
    return ProbVector(s_lo + e_lo, np.convolve(thin, innov))


def pdinar_log_transitions(prev, nxt, alpha, theta, skl, delta):
    """Log transition probabilities of PDINAR(1) for arrays of (previous, next) states.

    Same convolution as :func:`pdinar_row`, but all rows share one table of
    ``log I_y`` per argument and one innovation vector.
    """
    prev = np.asarray(prev, dtype=np.int64)
    nxt = np.asarray(nxt, dtype=np.int64)
    uniq = np.unique(prev)
    spans = [_span(alpha * u, _thin_sd(alpha, theta, u)) for u in uniq]
    s_lo = min(sp[0] for sp in spans)
    s_hi = max(sp[1] for sp in spans)
    reach = max(abs(s_lo), abs(s_hi)) + int(np.abs(uniq).max()) + 2
    b = math.sqrt(theta)
    tp = log_bessel_i_orders(-reach, reach, 2.0 * alpha * b)
    tq = log_bessel_i_orders(-reach, reach, 2.0 * (1.0 - alpha) * b)
    t1 = log_bessel_i_orders(-reach, reach, 2.0 * b)
    e_lo, e_hi = _span(skl.theta1 - skl.theta2, math.sqrt(skl.theta1 + skl.theta2))
    innov = np.exp(log_skellam_pmf(np.arange(e_lo, e_hi + 1), skl))
    out = np.empty(prev.shape, dtype=float)
    for u, (lo, hi) in zip(uniq, spans):
        s = np.arange(lo, hi + 1)
        thin = np.exp(tp[s + reach] + tq[u - s + reach] - t1[u + reach])
        if delta == -1:
            thin = thin[::-1]
            lo, hi = -hi, -lo
        row = np.convolve(thin, innov)
        mask = prev == u
        idx = nxt[mask] - (lo + e_lo)
        inside = (idx >= 0) & (idx < row.size)
        vals = np.where(inside, row[np.clip(idx, 0, row.size - 1)], 0.0)
        with np.errstate(divide="ignore"):
            out[mask] = np.log(vals)
    return out


def pdinar_transition_pmf(z_prev, z_next, alpha, theta, skl, delta=1):
    """P(Z_t = z_next | Z_{t-1} = z_prev) for the additive PDINAR(1) model."""
    if not 0.0 < alpha < 1.0:
        _bad("alpha", "must lie in (0, 1)")
    if theta <= 0:
        _bad("theta", "must be > 0")
    if delta not in (1, -1):
        _bad("delta", "must be +1 or -1")
    return pdinar_row(z_prev, alpha, theta, skl, delta).pmf(z_next)
