"""Conditional maximum likelihood, Yule-Walker and information criteria.

The conditional log-likelihood drops the marginal term of the first
observation; it is the sum of log transition probabilities over the ``n - 1``
transitions of a series of length ``n``. Information criteria use the raw
series length ``n``.

The MESINAR fitter optimises over the unconstrained coordinates
``(logit phi, logit p, log beta, log theta1, log theta2)`` with L-BFGS-B and
the analytic score chained through the transform.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from mesinar.errors import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    SingularInformationError,
    UndefinedStatisticError,
)
from mesinar.model import PARAM_NAMES, ModelParams, PDINARParams, pdinar_log_transitions
from mesinar.specfun import hyp_ratio, log_bessel_i_orders

logger = logging.getLogger(__name__)

__all__ = [
    "FitOptions",
    "FitResult",
    "Criteria",
    "SampleMoments",
    "neg_loglik",
    "loglik_and_score",
    "score",
    "fit_cml",
    "observed_information",
    "standard_errors",
    "sample_moments",
    "detect_delta",
    "fit_yw",
    "info_criteria",
    "pdinar_neg_loglik",
    "fit_pdinar",
]


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    n_starts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1", name="max_iterations")
        if not self.gradient_tolerance > 0:
            raise DomainError("gradient_tolerance must be > 0", name="gradient_tolerance")
        if self.n_starts < 1:
            raise DomainError("n_starts must be >= 1", name="n_starts")
        if self.seed < 0:
            raise DomainError("seed must be >= 0", name="seed")


class Criteria(NamedTuple):
    aic: float
    bic: float
    hqic: float


class SampleMoments(NamedTuple):
    mean: float
    variance: float
    acf1: float
    n: int


@dataclass
class FitResult:
    """Outcome of a fit.

    ``estimates`` is a :class:`ModelParams` for MESINAR fits and a
    :class:`PDINARParams` for the comparator. ``std_errors`` follows the
    order of ``param_names`` and is ``None`` for Yule-Walker fits or when
    the information matrix is singular.
    """

    method: str
    estimates: object
    std_errors: Optional[np.ndarray]
    loglik: float
    criteria: Criteria
    delta_used: int
    converged: bool
    iterations: int
    n_used: int
    model: str = "mesinar"
    param_names: tuple = PARAM_NAMES
    warnings: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.param_names)

    def param_values(self):
        return [getattr(self.estimates, name) for name in self.param_names]


def info_criteria(loglik, k, n):
    """AIC, BIC and HQIC with ``HQIC = -2 L + k ln ln n``.

    >>> [round(v, 4) for v in info_criteria(-679.9163, 3, 292)]
    [1365.8326, 1376.8629, 1365.0418]
    """
    if n < 2:
        raise DomainError("n must be >= 2 for information criteria", name="n")
    dev = -2.0 * loglik
    return Criteria(dev + 2.0 * k, dev + k * math.log(n), dev + k * math.log(math.log(n)))


# --- likelihood and score --------------------------------------------------


def _as_values(series):
    z = np.asarray(series, dtype=np.int64)
    if z.ndim != 1:
        raise DomainError("series must be one-dimensional", name="series")
    return z


def _transitions(series):
    z = _as_values(series)
    if z.size < 2:
        raise DomainError("series needs at least two observations", name="series")
    return z[:-1], z[1:]


def _bessel_ratio(table, idx):
    # (I_{y-1} + I_{y+1}) / I_y at the table's argument
    return np.exp(table[idx - 1] - table[idx]) + np.exp(table[idx + 1] - table[idx])


def loglik_and_score(series, params, grad=True):
    """Conditional log-likelihood and (optionally) its gradient in ``(phi, p, beta, theta1, theta2)``.

    Transition probabilities use the Bessel form
    ``phi I_{dz}(2pb) I_{m-dz}(2qb) / I_m(2b) + (1-phi) q(z)`` with a single
    table of ``log I_y`` per argument, so evaluation cost is linear in the
    series length.
    """
    prev, nxt = _transitions(series)
    phi, p, b, t1, t2, delta = params.phi, params.p, params.beta, params.theta1, params.theta2, params.delta
    q = 1.0 - p
    a = delta * nxt
    c = prev - a
    lo = int(min(a.min(), c.min(), prev.min(), nxt.min())) - 2
    hi = int(max(a.max(), c.max(), prev.max(), nxt.max())) + 2
    s = math.sqrt(t1 * t2)
    tp = log_bessel_i_orders(lo, hi, 2.0 * p * b)
    tq = log_bessel_i_orders(lo, hi, 2.0 * q * b)
    t1tab = log_bessel_i_orders(lo, hi, 2.0 * b)
    ts = log_bessel_i_orders(lo, hi, 2.0 * s)
    ia, ic, im, iz = a - lo, c - lo, prev - lo, nxt - lo

    log_thin = tp[ia] + tq[ic] - t1tab[im]
    log_innov = -t1 - t2 + 0.5 * nxt * (math.log(t1) - math.log(t2)) + ts[iz]
    with np.errstate(divide="ignore"):
        lphi = math.log(phi) if phi > 0 else -np.inf
        l1phi = math.log1p(-phi) if phi < 1 else -np.inf
    lt = lphi + log_thin
    li = l1phi + log_innov
    logp = np.logaddexp(lt, li)
    ll = float(logp.sum())
    if not grad:
        return ll, None
    if not 0.0 < phi < 1.0:
        raise DomainError("score requires 0 < phi < 1", name="phi")

    w_thin = np.exp(lt - logp)
    w_innov = np.exp(li - logp)
    r_a = _bessel_ratio(tp, ia)
    r_c = _bessel_ratio(tq, ic)
    r_m = _bessel_ratio(t1tab, im)
    r_z = _bessel_ratio(ts, iz)
    g = np.empty(5)
    g[0] = np.sum(w_thin / phi - w_innov / (1.0 - phi))
    g[1] = np.sum(w_thin * b * (r_a - r_c))
    g[2] = np.sum(w_thin * (p * r_a + q * r_c - r_m))
    g[3] = np.sum(w_innov * (-1.0 + nxt / (2.0 * t1) + 0.5 * math.sqrt(t2 / t1) * r_z))
    g[4] = np.sum(w_innov * (-1.0 - nxt / (2.0 * t2) + 0.5 * math.sqrt(t1 / t2) * r_z))
    return ll, g


def neg_loglik(series, params):
    """Negative conditional log-likelihood; ``+inf`` if a transition has zero probability."""
    ll, _ = loglik_and_score(series, params, grad=False)
    return -ll if np.isfinite(ll) else math.inf


def score(series, params):
    """Analytic gradient of the conditional log-likelihood (not negated)."""
    return loglik_and_score(series, params, grad=True)[1]


# --- observed information --------------------------------------------------


def observed_information(series, params, symmetrize=True, rel_step=1e-5):
    """Negative Hessian of the average log-likelihood by central differences of the score."""
    omega = params.vector()
    n_trans = len(_as_values(series)) - 1
    H = np.empty((5, 5))
    for j in range(5):
        h = rel_step * max(1.0, abs(omega[j]))
        if j < 2:
            h = min(h, 0.5 * omega[j], 0.5 * (1.0 - omega[j]))
        up, dn = omega.copy(), omega.copy()
        up[j] += h
        dn[j] -= h
        g_up = score(series, ModelParams.from_vector(up, params.delta))
        g_dn = score(series, ModelParams.from_vector(dn, params.delta))
        H[:, j] = -(g_up - g_dn) / (2.0 * h)
    H /= n_trans
    if symmetrize:
        H = 0.5 * (H + H.T)
    return H


def standard_errors(info, n_trans):
    """Standard errors ``sqrt(diag(info^{-1}) / n)`` from the average information."""
    eig = np.linalg.eigvalsh(0.5 * (info + info.T))
    if eig.min() <= 0 or eig.max() / eig.min() > 1e13:
        raise SingularInformationError(f"information matrix not positive definite (eigenvalues {eig})")
    cov = np.linalg.inv(info) / n_trans
    return np.sqrt(np.diag(cov))


# --- moments and Yule-Walker -----------------------------------------------


def sample_moments(series):
    """Sample mean, variance and lag-one autocorrelation.

    For ``N`` observations the variance divides by ``N - 1``; the
    autocorrelation is the lag-one cross-product sum over the full sum of
    squares.
    """
    z = _as_values(series).astype(float)
    if z.size < 2:
        raise DomainError("series needs at least two observations", name="series")
    m = z.mean()
    dev = z - m
    ss = float(dev @ dev)
    if ss == 0.0:
        raise UndefinedStatisticError("autocorrelation undefined for a constant series")
    r1 = float(dev[:-1] @ dev[1:]) / ss
    return SampleMoments(float(m), ss / (z.size - 1), r1, int(z.size))


def detect_delta(series):
    """Sign of the lag-one sample autocorrelation (+1 when it is zero)."""
    return 1 if sample_moments(series).acf1 >= 0 else -1


_PHI_MAX_YW = 0.999


def fit_yw(series, p_plugin, theta_plugin, delta):
    """Modified Yule-Walker estimates of ``(phi, theta1, theta2)``.

    ``p`` and ``theta`` are plugged in (normally from a CML fit). ``phi``
    comes from the lag-one autocorrelation, ``theta1 - theta2`` from the
    mean and ``theta1 + theta2`` from the variance equation, whose
    expectation of the 0F1 ratio is replaced by its average over the series.
    """
    if not 0.0 < p_plugin < 1.0:
        raise DomainError("p_plugin must lie in (0, 1)", name="p_plugin")
    if not theta_plugin > 0:
        raise DomainError("theta_plugin must be > 0", name="theta_plugin")
    if delta not in (1, -1):
        raise DomainError("delta must be +1 or -1", name="delta")
    z = _as_values(series)
    mom = sample_moments(z)
    notes = []
    p, th = p_plugin, theta_plugin
    phi = delta * mom.acf1 / p
    if phi < 0.0 or phi > _PHI_MAX_YW:
        notes.append(f"phi estimate {phi:.6g} clamped to [0, {_PHI_MAX_YW}]")
        phi = min(max(phi, 0.0), _PHI_MAX_YW)
    d = mom.mean * (1.0 - phi * p * delta) / (1.0 - phi)
    ratio_mean = float(np.mean(hyp_ratio(z[:-1], th)))
    q = 1.0 - p
    mu = mom.mean
    rest = (
        phi * p * q * mu
        + 2.0 * phi * p * q * th * ratio_mean
        + phi * (1.0 - phi) * (p * p * mu * mu - 2.0 * p * delta * d * mu + d * d)
    )
    total = (mom.variance * (1.0 - phi * p * p) - rest) / (1.0 - phi)
    t1, t2 = 0.5 * (total + d), 0.5 * (total - d)
    if not (t1 > 0 and t2 > 0):
        raise InfeasibleError(f"moment equations give theta1={t1:.6g}, theta2={t2:.6g}")
    est = ModelParams(phi, p, math.sqrt(th), t1, t2, delta=delta)
    ll = -neg_loglik(z, est)
    return FitResult(
        method="YW",
        estimates=est,
        std_errors=None,
        loglik=ll,
        criteria=info_criteria(ll, 5, len(z)),
        delta_used=delta,
        converged=True,
        iterations=0,
        n_used=len(z),
        warnings=notes,
    )


# --- CML -------------------------------------------------------------------

_U_BOUNDS = [
    (-12.0, 12.0),  # logit phi
    (-12.0, 12.0),  # logit p
    (math.log(1e-2), math.log(50.0)),  # log beta; 2 beta stays within the series range of specfun
    (math.log(1e-3), math.log(1e3)),  # log theta1
    (math.log(1e-3), math.log(1e3)),  # log theta2
]


def _to_u(omega):
    return np.array([logit(omega[0]), logit(omega[1]), math.log(omega[2]), math.log(omega[3]), math.log(omega[4])])


def _from_u(u):
    return np.array([expit(u[0]), expit(u[1]), math.exp(u[2]), math.exp(u[3]), math.exp(u[4])])


def _jacobian_diag(omega):
    return np.array([omega[0] * (1 - omega[0]), omega[1] * (1 - omega[1]), omega[2], omega[3], omega[4]])


def _clip_u(u):
    return np.array([min(max(v, lo), hi) for v, (lo, hi) in zip(u, _U_BOUNDS)])


def _moment_start(z, delta):
    """Starting point from marginal moments: mixture weight from the ACF, innovations from mean/variance."""
    try:
        mom = sample_moments(z)
        r1, mean, var = mom.acf1, mom.mean, mom.variance
    except UndefinedStatisticError:
        r1, mean, var = 0.0, float(np.mean(z)), 1.0
    p0 = 0.5
    phi0 = min(max(delta * r1 / p0, 0.05), 0.95)
    var = max(var, abs(mean) + 0.2)
    t1 = max(0.5 * (var + mean), 0.1)
    t2 = max(0.5 * (var - mean), 0.1)
    return np.array([phi0, p0, 1.5, t1, t2])


def fit_cml(series, delta=None, options=None, starts=None):
    """Conditional maximum likelihood fit of MESINAR(1).

    ``delta`` defaults to the sign of the lag-one autocorrelation. The first
    start is the moment-based centre, the remaining ``n_starts - 1`` are
    jittered around it in the unconstrained coordinates (``starts`` may
    override the list of natural-scale starting vectors). The best converged
    local optimum wins, ties going to the lowest start index.

    Raises
    ------
    ConvergenceError
        If no start converges; ``best`` carries the best point found.
    """
    options = options or FitOptions()
    z = _as_values(series)
    if z.size < 10:
        raise DomainError("series needs at least 10 observations for CML", name="series")
    if delta is None:
        delta = detect_delta(z)
    n_trans = z.size - 1

    def objective(u):
        omega = _from_u(u)
        try:
            ll, g = loglik_and_score(z, ModelParams.from_vector(omega, delta))
        except DomainError:
            return math.inf, np.zeros(5)
        if not np.isfinite(ll):
            return math.inf, np.zeros(5)
        return -ll / n_trans, -(g * _jacobian_diag(omega)) / n_trans

    if starts is None:
        center = _clip_u(_to_u(_moment_start(z, delta)))
        rng = np.random.default_rng(options.seed)
        u_starts = [center] + [_clip_u(center + rng.normal(0.0, 0.75, 5)) for _ in range(options.n_starts - 1)]
    else:
        u_starts = [_clip_u(_to_u(np.asarray(s, dtype=float))) for s in starts]

    runs = []
    for i, u0 in enumerate(u_starts):
        res = minimize(
            objective,
            u0,
            jac=True,
            method="L-BFGS-B",
            bounds=_U_BOUNDS,
            options={"maxiter": options.max_iterations, "gtol": options.gradient_tolerance, "ftol": 1e-15},
        )
        pg = _projected_gradient(res.x, res.jac)
        ok = bool(np.isfinite(res.fun) and (res.success or pg < 10 * options.gradient_tolerance))
        runs.append((res, ok, i, objective(u0)[0]))
        logger.debug("start %d: f=%.10g converged=%s nit=%d pg=%.3g", i, res.fun, ok, res.nit, pg)

    good = [r for r in runs if r[1]]
    pool = good if good else [r for r in runs if np.isfinite(r[0].fun)]
    if not pool:
        raise ConvergenceError("likelihood is not finite at any start", best=None)
    best_res, converged, _, _ = min(pool, key=lambda r: (r[0].fun, r[2]))
    omega = _from_u(best_res.x)
    est = ModelParams.from_vector(omega, delta)
    ll = -best_res.fun * n_trans
    iterations = sum(r[0].nit for r in runs)
    if not converged:
        raise ConvergenceError("no start converged", best=est)

    notes = []
    try:
        ses = standard_errors(observed_information(z, est), n_trans)
    except SingularInformationError as exc:
        ses = None
        notes.append(str(exc))
    return FitResult(
        method="CML",
        estimates=est,
        std_errors=ses,
        loglik=ll,
        criteria=info_criteria(ll, 5, z.size),
        delta_used=delta,
        converged=True,
        iterations=iterations,
        n_used=z.size,
        warnings=notes,
    )


def _projected_gradient(u, g):
    pg = np.array(g, dtype=float)
    for i, (lo, hi) in enumerate(_U_BOUNDS):
        if u[i] <= lo and pg[i] > 0:
            pg[i] = 0.0
        if u[i] >= hi and pg[i] < 0:
            pg[i] = 0.0
    return float(np.max(np.abs(pg)))


# --- PDINAR(1) comparator --------------------------------------------------

PDINAR_NAMES = ("alpha", "theta1", "theta2")


def pdinar_neg_loglik(series, params):
    """Negative conditional log-likelihood of PDINAR(1)."""
    prev, nxt = _transitions(series)
    logp = pdinar_log_transitions(prev, nxt, params.alpha, params.theta, params.innovation, params.delta)
    total = -float(logp.sum())
    return total if np.isfinite(total) else math.inf


def fit_pdinar(series, delta=None, options=None):
    """Conditional maximum likelihood fit of the PDINAR(1) comparator (three parameters)."""
    options = options or FitOptions()
    z = _as_values(series)
    if z.size < 10:
        raise DomainError("series needs at least 10 observations", name="series")
    if delta is None:
        delta = detect_delta(z)
    n_trans = z.size - 1

    def unpack(u):
        return PDINARParams(float(expit(u[0])), math.exp(u[1]), math.exp(u[2]), delta=delta)

    def objective(u):
        try:
            return pdinar_neg_loglik(z, unpack(u)) / n_trans
        except DomainError:
            return math.inf

    start = _moment_start(z, delta)
    alpha0 = min(max(abs(start[0] * start[1]), 0.05), 0.9)
    center = np.array([logit(alpha0), math.log(start[3] * (1 - alpha0)), math.log(start[4] * (1 - alpha0))])
    rng = np.random.default_rng(options.seed)
    u_starts = [center] + [center + rng.normal(0.0, 0.5, 3) for _ in range(options.n_starts - 1)]
    bounds = [(-10.0, 10.0), (math.log(1e-3), math.log(1e3)), (math.log(1e-3), math.log(1e3))]
    runs = []
    for i, u0 in enumerate(u_starts):
        u0 = np.clip(u0, [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(objective, u0, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": options.max_iterations, "ftol": 1e-13})
        runs.append((res, i))
    finite = [r for r in runs if np.isfinite(r[0].fun)]
    if not finite:
        raise ConvergenceError("PDINAR likelihood is not finite at any start")
    best, _ = min(finite, key=lambda r: (r[0].fun, r[1]))
    est = unpack(best.x)
    ll = -best.fun * n_trans
    return FitResult(
        method="CML",
        estimates=est,
        std_errors=None,
        loglik=ll,
        criteria=info_criteria(ll, 3, z.size),
        delta_used=delta,
        converged=bool(best.success),
        iterations=sum(r[0].nit for r in runs),
        n_used=z.size,
        model="pdinar",
        param_names=PDINAR_NAMES,
    )
