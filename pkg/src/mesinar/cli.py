"""Command-line interface.

Subcommands: ``simulate``, ``diff``, ``describe``, ``fit``, ``mcstudy`` and
``compare``. Exit status is 0 on success, 2 for invalid input or
configuration and 3 when an optimiser fails to converge.
"""

import argparse
import logging
import os
import sys
from importlib import resources

import numpy as np

from mesinar import io as sio
from mesinar import report
from mesinar.errors import ConvergenceError, DomainError, InfeasibleError, UndefinedStatisticError
from mesinar.estimate import FitOptions, detect_delta, fit_cml, fit_pdinar, fit_yw
from mesinar.mcstudy import MCConfig, run_study
from mesinar.model import IntSeries, ModelParams, simulate

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 2, 3

MODELS = ("mesinar", "pdinar")

_MC_KEYS = {
    "phi": float,
    "p": float,
    "beta": float,
    "theta1": float,
    "theta2": float,
    "delta": int,
    "sample_sizes": lambda s: tuple(int(x) for x in s.replace(",", " ").split()),
    "replications": int,
    "seed": int,
    "methods": lambda s: tuple(x.upper() for x in s.replace(",", " ").split()),
    "burn_in": int,
    "max_iterations": int,
    "gradient_tolerance": float,
    "n_starts": int,
    "workers": int,
}
_FIT_KEYS = ("max_iterations", "gradient_tolerance", "n_starts", "seed")


class UsageError(Exception):
    pass


def _emit(text, args):
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(args, record, text):
    return sio.format_kv(record) if args.format == "machine" else text


def _load_series(path, min_len=1):
    try:
        series = sio.read_series(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if len(series) < min_len:
        raise UsageError(f"{path}: need at least {min_len} observation(s), found {len(series)}")
    return series


# --- subcommands -----------------------------------------------------------


def cmd_simulate(args):
    params = ModelParams(args.phi, args.p, args.beta, args.theta1, args.theta2, delta=args.delta)
    if args.n < 1:
        raise DomainError("n must be >= 1", name="n")
    series = simulate(params, args.n, burn_in=args.burn_in, rng=np.random.default_rng(args.seed))
    _emit(sio.series_csv(series), args)
    return EXIT_OK


def cmd_diff(args):
    series = _load_series(args.input, min_len=2)
    diffed = IntSeries(np.diff(series.values), series.labels[1:] if series.labels else None)
    _emit(sio.series_csv(diffed), args)
    return EXIT_OK


def cmd_describe(args):
    stats = report.describe(_load_series(args.input))
    _emit(_render(args, stats, report.describe_text(stats)), args)
    return EXIT_OK


def _fit_options(args):
    values = {}
    if getattr(args, "config", None):
        cfg = sio.read_kv(args.config)
        for key, raw in cfg.items():
            if key not in _FIT_KEYS:
                raise UsageError(f"{args.config}: unknown key {key!r}")
            try:
                values[key] = float(raw) if key == "gradient_tolerance" else int(raw)
            except ValueError:
                raise UsageError(f"{args.config}: bad value for {key!r}: {raw!r}") from None
    for key, attr in (("max_iterations", "max_iter"), ("gradient_tolerance", "tol"), ("n_starts", "starts")):
        if getattr(args, attr, None) is not None:
            values[key] = getattr(args, attr)
    values.setdefault("seed", args.seed)
    return FitOptions(**values)


def _fit_one(series, model, method, delta, options):
    if model == "pdinar":
        if method != "cml":
            raise UsageError("the pdinar comparator is fitted by cml only")
        return fit_pdinar(series, delta=delta, options=options)
    cml = fit_cml(series, delta=delta, options=options)
    if method == "yw":
        return fit_yw(series, cml.estimates.p, cml.estimates.theta, cml.delta_used)
    return cml


def _delta(args, series):
    return args.delta if args.delta is not None else detect_delta(series)


def cmd_fit(args):
    series = _load_series(args.input, min_len=10)
    options = _fit_options(args)
    delta = _delta(args, series)
    try:
        fit = _fit_one(series, args.model, args.method, delta, options)
    except ConvergenceError as exc:
        rec = {"model": args.model, "method": args.method, "delta": delta, "converged": False}
        if isinstance(exc.best, ModelParams):
            rec.update(exc.best.as_dict())
        _emit(sio.format_kv(rec), args)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    _emit(_render(args, report.fit_record(fit), report.fit_text(fit)), args)
    return EXIT_OK


def bundled_config(name):
    """Path of a config shipped with the package (``omega1`` .. ``omega4``, ``smoke``)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    ref = resources.files("mesinar") / "configs" / f"{stem}.cfg"
    return str(ref) if ref.is_file() else None


def load_mc_config(path, workers=None):
    if not os.path.exists(path):
        path = bundled_config(path) or path
    try:
        raw = sio.read_kv(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    values = {}
    for key, text in raw.items():
        if key not in _MC_KEYS:
            raise UsageError(f"{path}: unknown key {key!r}")
        try:
            values[key] = _MC_KEYS[key](text)
        except ValueError:
            raise UsageError(f"{path}: bad value for {key!r}: {text!r}") from None
    missing = [k for k in ("phi", "p", "beta", "theta1", "theta2") if k not in values]
    if missing:
        raise UsageError(f"{path}: missing key(s) {', '.join(missing)}")
    truth = ModelParams(*(values.pop(k) for k in ("phi", "p", "beta", "theta1", "theta2")), delta=values.pop("delta", 1))
    fit_kw = {k: values.pop(k) for k in ("max_iterations", "gradient_tolerance", "n_starts") if k in values}
    if workers is not None:
        values["workers"] = workers
    return MCConfig(truth=truth, fit_options=FitOptions(**fit_kw), **values)


def cmd_mcstudy(args):
    config = load_mc_config(args.config, workers=args.workers)
    rep = run_study(config)
    _emit(_render(args, report.study_record(rep), report.study_text(rep)), args)
    return EXIT_OK


def cmd_compare(args):
    models = [m.strip().lower() for m in args.models.split(",") if m.strip()]
    unknown = [m for m in models if m not in MODELS]
    if not models or unknown:
        raise UsageError(f"unknown model(s): {', '.join(unknown) or '(none given)'}; choose from {', '.join(MODELS)}")
    series = _load_series(args.input, min_len=10)
    options = _fit_options(args)
    delta = _delta(args, series)
    fits = []
    for m in models:
        try:
            fits.append(_fit_one(series, m, "cml", delta, options))
        except ConvergenceError as exc:
            print(f"error: {m}: {exc}", file=sys.stderr)
            return EXIT_NONCONVERGED
    _emit(_render(args, report.compare_record(fits), report.compare_text(fits)), args)
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nonneg_int, default=0, help="random seed (default 0)")
    common.add_argument("--output", help="write output to this path instead of stdout")
    common.add_argument("--format", choices=("text", "machine"), default="text", help="report format")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    fitopts = argparse.ArgumentParser(add_help=False)
    fitopts.add_argument("--max-iter", type=int, help="optimiser iteration cap per start")
    fitopts.add_argument("--tol", type=float, help="gradient tolerance")
    fitopts.add_argument("--starts", type=int, help="number of optimiser starts")
    fitopts.add_argument("--delta", type=int, choices=(1, -1), help="autocorrelation sign (default: from the ACF)")
    fitopts.add_argument("--config", help="fit-options file (max_iterations, gradient_tolerance, n_starts, seed)")

    parser = argparse.ArgumentParser(prog="mesinar", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a MESINAR(1) series to CSV")
    for name in ("phi", "p", "beta", "theta1", "theta2"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burn-in", type=_nonneg_int, default=500)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diff", parents=[common], help="lag-one difference of a series")
    p.add_argument("input")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("describe", parents=[common], help="descriptive statistics")
    p.add_argument("input")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("fit", parents=[common, fitopts], help="fit a model to a series")
    p.add_argument("input")
    p.add_argument("--model", choices=MODELS, default="mesinar")
    p.add_argument("--method", choices=("cml", "yw"), default="cml")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("mcstudy", parents=[common], help="Monte Carlo study from a config file")
    p.add_argument("config", help="config file, or the name of a bundled one (omega1..omega4, smoke)")
    p.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    p.set_defaults(func=cmd_mcstudy)

    p = sub.add_parser("compare", parents=[common, fitopts], help="compare models by information criteria")
    p.add_argument("input")
    p.add_argument("--models", default="mesinar,pdinar", help="comma-separated subset of mesinar,pdinar")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, InfeasibleError, UndefinedStatisticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
