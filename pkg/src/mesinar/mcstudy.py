"""Monte Carlo replication engine for estimator mean/MSE tables.

Every replication ``r`` at sample size ``n`` draws from its own stream,
``SeedSequence(seed, spawn_key=(n, r))``, so results do not depend on the
order or process in which replications run. Replications whose fit fails
are counted per cell and left out of the means.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mesinar.errors import DomainError, MesinarError
from mesinar.estimate import FitOptions, fit_cml, fit_yw
from mesinar.model import PARAM_NAMES, ModelParams, simulate

logger = logging.getLogger(__name__)

__all__ = ["MCConfig", "MCReport", "CellSummary", "run_study", "run_replication", "METHOD_PARAMS"]

# reported quantities per method; YW leaves p and beta at their CML plug-ins
METHOD_PARAMS = {
    "CML": PARAM_NAMES,
    "YW": ("phi", "theta1", "theta2", "theta_diff"),
}


@dataclass(frozen=True)
class MCConfig:
    truth: ModelParams
    sample_sizes: tuple = (200, 400, 800, 4000)
    replications: int = 100
    seed: int = 0
    methods: tuple = ("CML", "YW")
    burn_in: int = 500
    fit_options: FitOptions = FitOptions()
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be >= 1", name="replications")
        if not self.sample_sizes or any(int(n) < 10 for n in self.sample_sizes):
            raise DomainError("sample_sizes must be nonempty, each >= 10", name="sample_sizes")
        if self.seed < 0:
            raise DomainError("seed must be >= 0", name="seed")
        if not self.methods or any(m not in METHOD_PARAMS for m in self.methods):
            raise DomainError("methods must be a nonempty subset of {CML, YW}", name="methods")
        if self.burn_in < 0:
            raise DomainError("burn_in must be >= 0", name="burn_in")
        if self.workers < 1:
            raise DomainError("workers must be >= 1", name="workers")


@dataclass
class CellSummary:
    n: int
    method: str
    names: tuple
    estimates: np.ndarray  # (converged replications, len(names))
    truth: np.ndarray
    failures: int

    @property
    def n_ok(self):
        return self.estimates.shape[0]

    @property
    def mean(self):
        if self.n_ok == 0:
            return np.full(len(self.names), np.nan)
        return self.estimates.mean(axis=0)

    @property
    def mse(self):
        if self.n_ok == 0:
            return np.full(len(self.names), np.nan)
        return ((self.estimates - self.truth) ** 2).mean(axis=0)


@dataclass
class MCReport:
    config: MCConfig
    cells: dict = field(default_factory=dict)  # (n, method) -> CellSummary

    def cell(self, n, method):
        return self.cells[(n, method)]


def _truth_vector(truth, method):
    values = truth.as_dict()
    values["theta_diff"] = truth.theta1 - truth.theta2
    return np.array([values[k] for k in METHOD_PARAMS[method]])


def run_replication(config, n, r):
    """Simulate and fit one replication; returns ``{method: estimates or None}``."""
    ss = np.random.SeedSequence(config.seed, spawn_key=(int(n), int(r)))
    sim_seq, fit_seq = ss.spawn(2)
    series = simulate(config.truth, int(n), burn_in=config.burn_in, rng=np.random.default_rng(sim_seq))
    opts = FitOptions(
        max_iterations=config.fit_options.max_iterations,
        gradient_tolerance=config.fit_options.gradient_tolerance,
        n_starts=config.fit_options.n_starts,
        seed=int(fit_seq.generate_state(1)[0]),
    )
    out = {m: None for m in config.methods}
    delta = config.truth.delta
    try:
        cml = fit_cml(series, delta=delta, options=opts)
    except MesinarError as exc:
        logger.info("n=%d r=%d: CML failed: %s", n, r, exc)
        return out
    if "CML" in out:
        out["CML"] = cml.estimates.vector()
    if "YW" in out:
        try:
            yw = fit_yw(series, cml.estimates.p, cml.estimates.theta, delta).estimates
            out["YW"] = np.array([yw.phi, yw.theta1, yw.theta2, yw.theta1 - yw.theta2])
        except MesinarError as exc:
            logger.info("n=%d r=%d: YW failed: %s", n, r, exc)
    return out


def _run_task(args):
    config, n, r = args
    return n, r, run_replication(config, n, r)


def run_study(config, progress=None):
    """Run every (sample size, replication) and aggregate per method.

    ``progress`` is an optional callable receiving ``(done, total)``.
    """
    tasks = [(config, int(n), r) for n in config.sample_sizes for r in range(config.replications)]
    results = {}
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for i, (n, r, res) in enumerate(pool.map(_run_task, tasks, chunksize=4)):
                results[(n, r)] = res
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            n, r, res = _run_task(task)
            results[(n, r)] = res
            if progress:
                progress(i + 1, len(tasks))

    report = MCReport(config)
    for n in config.sample_sizes:
        n = int(n)
        for method in config.methods:
            names = METHOD_PARAMS[method]
            rows = [results[(n, r)][method] for r in range(config.replications)]
            ok = [row for row in rows if row is not None]
            est = np.array(ok) if ok else np.empty((0, len(names)))
            report.cells[(n, method)] = CellSummary(
                n, method, names, est, _truth_vector(config.truth, method), len(rows) - len(ok)
            )
    return report
