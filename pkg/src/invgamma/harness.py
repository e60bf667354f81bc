"""Seeded Monte-Carlo experiment runner.

Draws truth parameters and samples per (size, simulation) from a
splittable seed tree, runs the configured estimators on the shared
sample, and records KL(truth || estimate), parameter bias, iteration
counts and per-fit wall-clock time.  Emission is order-normalized CSV so
identical configs produce identical files (runtime column excepted).
"""

import math
import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .distribution import InvGammaParams, kl_divergence, sample
from .estimators import (
    ConvergenceConfig,
    PolyShapePrior,
    ScaleGammaPrior,
    ShapePriorABC,
    SufficientStats,
    bl1_log_posterior_curve,
    compute_stats,
    fit_bl1,
    fit_bl2,
    fit_ml1,
    fit_ml2,
    fit_mm,
    scale_posterior,
)
from .specfun import inv_digamma

ESTIMATORS = ("MM", "ML1", "ML2", "BL1", "BL2")
_ESTIMATOR_INDEX = {name: i for i, name in enumerate(ESTIMATORS)}

RECORDS_CSV_HEADER = ("N,sim,estimator,alpha_true,beta_true,alpha_hat,beta_hat,"
                      "kl,bias_alpha,bias_beta,iterations,converged,runtime_s")
BIAS_CSV_HEADER = ("N,estimator,n_used,n_failed,mean_bias_alpha,std_bias_alpha,"
                   "mean_bias_beta,std_bias_beta")
CURVES_CSV_HEADER = "variant,alpha,log_prior,log_posterior,alpha_true,alpha_hat"

DEFAULT_CURVE_VARIANTS = (
    ShapePriorABC.with_a(1.0, 0.01, 0.01),
    ShapePriorABC.with_a(1.0, 1.0, 1.0),
    ShapePriorABC.with_a(2.0, 0.5, 0.5),
    ShapePriorABC.with_a(0.5, 2.0, 2.0),
)


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple[int, ...] = (500, 2500, 5000)
    sims_per_size: int = 500
    base_seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    shape_prior: ShapePriorABC = ShapePriorABC()
    scale_prior: ScaleGammaPrior = ScaleGammaPrior()
    poly_prior: PolyShapePrior = PolyShapePrior()
    alpha_range: tuple[float, float] = (2.5, 15.0)
    beta_range: tuple[float, float] = (1.0, 50.0)
    conv: ConvergenceConfig = ConvergenceConfig()

    def __post_init__(self):
        if self.sims_per_size < 1:
            raise ValueError("sims_per_size must be >= 1")
        if not all(n >= 1 for n in self.sizes):
            raise ValueError("sizes must be >= 1")
        for name, (lo, hi) in (("alpha_range", self.alpha_range),
                               ("beta_range", self.beta_range)):
            if not (0.0 < lo < hi):
                raise ValueError(f"{name} must satisfy 0 < low < high")
        # Moment initialization needs a finite variance for every truth.
        if self.alpha_range[0] <= 2.0:
            raise ValueError("alpha_range low bound must be > 2")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")


@dataclass(frozen=True)
class SimulationRecord:
    N: int
    sim: int
    estimator: str
    alpha_true: float
    beta_true: float
    alpha_hat: float
    beta_hat: float
    kl: float
    bias_alpha: float
    bias_beta: float
    iterations: int
    converged: bool
    runtime_s: float


@dataclass(frozen=True)
class BiasAggregate:
    N: int
    estimator: str
    n_used: int
    n_failed: int
    mean_bias_alpha: float
    std_bias_alpha: float
    mean_bias_beta: float
    std_bias_beta: float


def child_rng(base_seed: int, size: int, sim: int) -> np.random.Generator:
    """Per-simulation generator; independent of enumeration order."""
    return np.random.default_rng(
        np.random.SeedSequence(base_seed, spawn_key=(size, sim)))


def _fit_one(name: str, stats, cfg: ExperimentConfig):
    if name == "MM":
        return fit_mm(stats)
    if name == "ML1":
        return fit_ml1(stats, cfg.conv)
    if name == "ML2":
        return fit_ml2(stats, cfg.conv)
    if name == "BL1":
        return fit_bl1(stats, cfg.shape_prior, cfg.scale_prior, cfg.conv)
    if name == "BL2":
        return fit_bl2(stats, cfg.poly_prior, cfg.scale_prior, cfg.conv)
    raise ValueError(f"unknown estimator {name!r}")


def _simulate_one(cfg: ExperimentConfig, size: int, sim: int) -> list[SimulationRecord]:
    rng = child_rng(cfg.base_seed, size, sim)
    alpha_true = rng.uniform(*cfg.alpha_range)
    beta_true = rng.uniform(*cfg.beta_range)
    truth = InvGammaParams(alpha_true, beta_true)
    stats = compute_stats(sample(truth, size, rng))
    records = []
    for name in cfg.estimators:
        t0 = time.perf_counter()
        try:
            report = _fit_one(name, stats, cfg)
        except Exception:
            report = None
        runtime = time.perf_counter() - t0
        if report is None:
            ah = bh = kl = ba = bb = math.nan
            iterations, converged = 0, False
        else:
            ah, bh = report.params.alpha, report.params.beta
            kl = kl_divergence(truth, report.params)
            ba, bb = ah - alpha_true, bh - beta_true
            iterations, converged = report.iterations, report.converged
        records.append(SimulationRecord(size, sim, name, alpha_true, beta_true,
                                        ah, bh, kl, ba, bb, iterations,
                                        converged, runtime))
    return records


def run_kl_experiment(cfg: ExperimentConfig) -> list[SimulationRecord]:
    """All simulation records, sorted by (N, sim, estimator).

    Estimator failures become converged=False rows with NaN estimates;
    the sweep itself never aborts.
    """
    records = []
    for size in cfg.sizes:
        for sim in range(cfg.sims_per_size):
            records.extend(_simulate_one(cfg, size, sim))
    records.sort(key=lambda r: (r.N, r.sim, _ESTIMATOR_INDEX[r.estimator]))
    return records


def aggregate_bias(records: list[SimulationRecord]) -> list[BiasAggregate]:
    """Mean and n-1 standard deviation of the bias per estimator and N.

    Rows with NaN estimates are excluded and counted as failed.
    """
    groups: dict[tuple[int, str], list[SimulationRecord]] = {}
    for r in records:
        groups.setdefault((r.N, r.estimator), []).append(r)
    out = []
    for (size, name) in sorted(groups, key=lambda k: (k[0], _ESTIMATOR_INDEX[k[1]])):
        rows = groups[(size, name)]
        ba = np.array([r.bias_alpha for r in rows])
        bb = np.array([r.bias_beta for r in rows])
        ok = np.isfinite(ba) & np.isfinite(bb)
        used = int(ok.sum())
        std_a = float(np.std(ba[ok], ddof=1)) if used >= 2 else math.nan
        std_b = float(np.std(bb[ok], ddof=1)) if used >= 2 else math.nan
        mean_a = float(np.mean(ba[ok])) if used else math.nan
        mean_b = float(np.mean(bb[ok])) if used else math.nan
        out.append(BiasAggregate(size, name, used, len(rows) - used,
                                 mean_a, std_a, mean_b, std_b))
    return out


def run_bias_experiment(cfg: ExperimentConfig) -> tuple[list[BiasAggregate],
                                                        list[SimulationRecord]]:
    """Bias study: the KL sweep's raw records plus per-(estimator, N)
    aggregates for the error-bar summaries."""
    records = run_kl_experiment(cfg)
    return aggregate_bias(records), records


def _midranks(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fractional ranks (ties get the group mean) and tie-group sizes."""
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(values.size, dtype=np.float64)
    tie_sizes = []
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        tie_sizes.append(j - i + 1)
        i = j + 1
    return ranks, np.array(tie_sizes, dtype=np.float64)


def wilcoxon_rank_sum(xs, ys) -> tuple[float, float]:
    """Two-sided rank-sum (Mann-Whitney) test via the tie-corrected,
    continuity-corrected normal approximation.

    Returns (U statistic of ``xs``, two-sided p-value).  Requires a
    combined sample of at least 10 values.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be nonempty")
    m = x.size + y.size
    if m < 10:
        raise ValueError(
            f"combined size {m} too small for the normal approximation")
    ranks, ties = _midranks(np.concatenate([x, y]))
    n1, n2 = x.size, y.size
    u1 = float(ranks[:n1].sum()) - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    tie_term = float(np.sum(ties ** 3 - ties)) / (m * (m - 1.0))
    sigma2 = (n1 * n2 / 12.0) * ((m + 1.0) - tie_term)
    if sigma2 <= 0.0:
        return u1, 1.0
    diff = u1 - mu
    if diff > 0.0:
        z = (diff - 0.5) / math.sqrt(sigma2)
    elif diff < 0.0:
        z = (diff + 0.5) / math.sqrt(sigma2)
    else:
        z = 0.0
    return u1, min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def kl_by_estimator(records: list[SimulationRecord],
                    size: int) -> dict[str, np.ndarray]:
    """Finite KL values per estimator at one sample size."""
    out: dict[str, list[float]] = {}
    for r in records:
        if r.N == size:
            out.setdefault(r.estimator, []).append(r.kl)
    return {name: np.array([v for v in vals if math.isfinite(v)])
            for name, vals in out.items()}


def emit_prior_posterior_curves(stats: SufficientStats,
                                shape_priors,
                                scale_prior: ScaleGammaPrior,
                                alpha_grid,
                                alpha_true: float) -> list[tuple]:
    """Log-prior/log-posterior curve rows over an alpha grid.

    The scale estimate is the posterior mean seeded by the moment shape
    estimate and is shared by every hyperparameter variant; ``alpha_hat``
    is the posterior maximizer invdigamma((-log a_hat + c_hat log
    beta_hat) / b_hat).  With no data (n = 0) prior and posterior rows
    coincide.
    """
    grid = np.asarray(alpha_grid, dtype=np.float64)
    if stats.n == 0:
        beta_hat = scale_prior.d / scale_prior.e
    else:
        mm_alpha = fit_mm(stats).params.alpha
        _, _, beta_hat = scale_posterior(stats, scale_prior, mm_alpha)
    prior_stats = SufficientStats.empty()
    rows = []
    for sp in shape_priors:
        label = (f"a={math.exp(sp.log_a):.6g};b={sp.b:.6g};c={sp.c:.6g}")
        log_prior = bl1_log_posterior_curve(prior_stats, sp, scale_prior,
                                            grid, beta_hat=beta_hat)
        log_post = bl1_log_posterior_curve(stats, sp, scale_prior,
                                           grid, beta_hat=beta_hat)
        log_a_hat = sp.log_a + stats.sum_log
        alpha_hat = inv_digamma(
            (-log_a_hat + (sp.c + stats.n) * math.log(beta_hat))
            / (sp.b + stats.n))
        for a, lp, lq in zip(grid, log_prior, log_post):
            rows.append((label, float(a), float(lp), float(lq),
                         float(alpha_true), alpha_hat))
    return rows


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_to_csv(records: list[SimulationRecord]) -> str:
    lines = [RECORDS_CSV_HEADER]
    for r in records:
        lines.append(",".join([
            str(r.N), str(r.sim), r.estimator,
            _fmt(r.alpha_true), _fmt(r.beta_true),
            _fmt(r.alpha_hat), _fmt(r.beta_hat), _fmt(r.kl),
            _fmt(r.bias_alpha), _fmt(r.bias_beta),
            str(r.iterations), "true" if r.converged else "false",
            _fmt(r.runtime_s),
        ]))
    return "\n".join(lines) + "\n"


def write_records_csv(records: list[SimulationRecord], path: str) -> None:
    _atomic_write(path, records_to_csv(records))


def read_records_csv(path: str) -> list[SimulationRecord]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != RECORDS_CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    records = []
    for line in lines[1:]:
        f = line.split(",")
        records.append(SimulationRecord(
            int(f[0]), int(f[1]), f[2], float(f[3]), float(f[4]), float(f[5]),
            float(f[6]), float(f[7]), float(f[8]), float(f[9]), int(f[10]),
            f[11] == "true", float(f[12])))
    return records


def write_bias_csv(aggregates: list[BiasAggregate], path: str) -> None:
    lines = [BIAS_CSV_HEADER]
    for a in aggregates:
        lines.append(",".join([
            str(a.N), a.estimator, str(a.n_used), str(a.n_failed),
            _fmt(a.mean_bias_alpha), _fmt(a.std_bias_alpha),
            _fmt(a.mean_bias_beta), _fmt(a.std_bias_beta),
        ]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_curves_csv(rows: list[tuple], path: str) -> None:
    lines = [CURVES_CSV_HEADER]
    for (label, alpha, lp, lq, at, ah) in rows:
        lines.append(",".join([label, _fmt(alpha), _fmt(lp), _fmt(lq),
                               _fmt(at), _fmt(ah)]))
    _atomic_write(path, "\n".join(lines) + "\n")
