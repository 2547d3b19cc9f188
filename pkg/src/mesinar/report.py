"""Plain-text and key-value renderings of descriptive statistics, fits and studies."""

import numpy as np

from mesinar.errors import DomainError
from mesinar.mcstudy import METHOD_PARAMS

__all__ = ["describe", "describe_text", "fit_record", "fit_text", "study_record", "study_text", "compare_text", "compare_record"]

DESCRIBE_KEYS = ("n", "mean", "variance", "minimum", "median", "maximum", "range")


def describe(series):
    """Count, mean, variance (divisor ``n - 1``; NaN for one value), min, median, max and range."""
    z = np.asarray(series, dtype=float)
    if z.size == 0:
        raise DomainError("cannot describe an empty series", name="series")
    return {
        "n": int(z.size),
        "mean": float(z.mean()),
        "variance": float(z.var(ddof=1)) if z.size > 1 else float("nan"),
        "minimum": int(z.min()),
        "median": float(np.median(z)),
        "maximum": int(z.max()),
        "range": int(z.max() - z.min()),
    }


def describe_text(stats):
    head = "".join(f"{k:>10}" for k in DESCRIBE_KEYS)
    row = "".join(f"{stats[k]:>10.4f}" if isinstance(stats[k], float) else f"{stats[k]:>10d}" for k in DESCRIBE_KEYS)
    return head + "\n" + row + "\n"


def fit_record(fit):
    rec = {"model": fit.model, "method": fit.method, "delta": fit.delta_used}
    ses = fit.std_errors
    for i, name in enumerate(fit.param_names):
        rec[name] = float(getattr(fit.estimates, name))
        if ses is not None:
            rec[f"se_{name}"] = float(ses[i])
    # signed thinning weight, matching tables that fold delta into it
    weight = "p" if fit.model == "mesinar" else "alpha"
    rec[f"{weight}_signed"] = fit.delta_used * float(getattr(fit.estimates, weight))
    rec.update(
        loglik=float(fit.loglik),
        k=fit.k,
        aic=float(fit.criteria.aic),
        bic=float(fit.criteria.bic),
        hqic=float(fit.criteria.hqic),
        converged=fit.converged,
        iterations=fit.iterations,
        n_used=fit.n_used,
    )
    for i, w in enumerate(fit.warnings):
        rec[f"warning_{i}"] = w
    return rec


def fit_text(fit):
    label = f"{fit.model.upper()}{'+' if fit.delta_used > 0 else '-'}(1), {fit.method}"
    lines = [label, f"  delta = {fit.delta_used:+d}   n = {fit.n_used}   converged = {fit.converged}"]
    for i, name in enumerate(fit.param_names):
        v = getattr(fit.estimates, name)
        se = f"  (se {fit.std_errors[i]:.4f})" if fit.std_errors is not None else ""
        lines.append(f"  {name:<8} {v:12.4f}{se}")
    weight = "p" if fit.model == "mesinar" else "alpha"
    lines.append(f"  signed {weight} = {fit.delta_used * getattr(fit.estimates, weight):.4f}")
    c = fit.criteria
    lines.append(f"  loglik = {fit.loglik:.4f}   AIC = {c.aic:.4f}   BIC = {c.bic:.4f}   HQIC = {c.hqic:.4f}")
    lines.extend(f"  warning: {w}" for w in fit.warnings)
    return "\n".join(lines) + "\n"


def compare_record(fits):
    rec = {}
    for rank, fit in enumerate(sorted(fits, key=lambda f: f.criteria.aic), start=1):
        pre = f"{rank}.{fit.model}"
        rec[f"{pre}.k"] = fit.k
        rec[f"{pre}.loglik"] = float(fit.loglik)
        rec[f"{pre}.aic"] = float(fit.criteria.aic)
        rec[f"{pre}.bic"] = float(fit.criteria.bic)
        rec[f"{pre}.hqic"] = float(fit.criteria.hqic)
    return rec


def compare_text(fits):
    lines = [f"{'model':<10}{'k':>3}{'loglik':>14}{'AIC':>12}{'BIC':>12}{'HQIC':>12}"]
    for fit in sorted(fits, key=lambda f: f.criteria.aic):
        c = fit.criteria
        lines.append(f"{fit.model:<10}{fit.k:>3}{fit.loglik:>14.4f}{c.aic:>12.4f}{c.bic:>12.4f}{c.hqic:>12.4f}")
    return "\n".join(lines) + "\n"


def _columns(report):
    cols = []
    for method in report.config.methods:
        for name in METHOD_PARAMS[method]:
            cols.append((method, name))
    return cols


def study_text(report):
    """Mean rows followed by MSE rows for each sample size, one column per (parameter, method)."""
    cols = _columns(report)
    head = f"{'N':<6}" + "".join(f"{name + '_' + m.lower():>14}" for m, name in cols)
    t = report.config.truth
    lines = [f"truth: phi={t.phi:g} p={t.p:g} beta={t.beta:.6g} theta1={t.theta1:g} theta2={t.theta2:g} delta={t.delta:+d}", head]
    for n in report.config.sample_sizes:
        means, mses = [], []
        for m, name in cols:
            cell = report.cell(int(n), m)
            j = cell.names.index(name)
            means.append(cell.mean[j])
            mses.append(cell.mse[j])
        lines.append(f"{int(n):<6}" + "".join(f"{v:>14.4f}" for v in means))
        lines.append(f"{'MSE':<6}" + "".join(f"{v:>14.4f}" for v in mses))
    fails = [f"{m}@{int(n)}={report.cell(int(n), m).failures}" for n in report.config.sample_sizes for m in report.config.methods]
    lines.append("failures: " + " ".join(fails))
    return "\n".join(lines) + "\n"


def study_record(report):
    rec = {}
    for (n, method), cell in sorted(report.cells.items()):
        pre = f"{method.lower()}.{n}"
        rec[f"{pre}.converged"] = cell.n_ok
        rec[f"{pre}.failures"] = cell.failures
        for j, name in enumerate(cell.names):
            rec[f"{pre}.{name}.mean"] = float(cell.mean[j])
            rec[f"{pre}.{name}.mse"] = float(cell.mse[j])
    return rec
