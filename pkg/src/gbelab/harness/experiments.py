"""Experiment registry.

Each experiment maps an :class:`ExperimentConfig` to a :class:`ResultTable`.
Tables contain only quantities determined by ``(config, seed)``; wall time
and the library version go to the JSON sidecar.
"""
from __future__ import annotations

import math
import time

import numpy as np

from .. import __version__
from ..density import dos, dos_table
from ..jacobi import Model
from ..stats.estimate import Estimate
from ..stats.linear import clt_experiment, global_moments, limit_moments, sigma2_integral
from ..stats.local import local_law, poisson_diagnostics, sample_local_processes
from ..stats.localization import green_decay, minami_check, wegner_check
from .config import ExperimentConfig, config_to_dict
from .results import Check, ResultTable

SCHEMAS = {
    "dos-table": ("E", "dos", "theta_E", "dos_via_truncation"),
    "global-law": ("k", "moment", "moment_se", "limit", "abs_error"),
    "clt": ("n", "alpha", "replicas", "mean", "mean_se", "variance", "variance_se",
            "skewness", "kurtosis", "bound", "bound_se", "ks_statistic", "ks_pvalue",
            "exact_variance"),
    "sigma2-identity": ("u", "sigma2", "sigma2_se"),
    "local-law": ("n", "alpha", "E", "sigma", "tau", "xi_mean", "xi_se", "pi_dos",
                  "density", "density_se", "dos"),
    "bulk-poisson": ("lo", "hi", "count_mean", "count_mean_se", "count_variance",
                     "dispersion", "dispersion_se", "expected"),
    "wegner-minami": ("wegner_estimate", "wegner_se", "wegner_site", "wegner_bound",
                      "p_first", "p_first_se", "p_second", "p_second_se", "ratio", "ratio_se"),
    "green-decay": ("x", "moment", "log_se"),
}


def _dos_table(c: ExperimentConfig) -> ResultTable:
    k = int(math.floor((c.emax - c.emin) / c.step + 1e-9))
    grid = c.emin + c.step * np.arange(k + 1)
    rows = dos_table(c.alpha, grid, c.N, c.eta)
    checks = [Check("|dos - truncation| < 5e-3",
                    bool(np.max(np.abs(rows[:, 1] - rows[:, 3])) < 5e-3),
                    f"max {np.max(np.abs(rows[:, 1] - rows[:, 3])):.3g}")]
    if c.alpha > 0:
        dev = float(np.max(np.abs(rows[:, 2] / rows[:, 1] - 1.0)))
        checks.append(Check("|theta_E / dos - 1| < 1e-3", dev < 1e-3, f"max {dev:.3g}"))
    return ResultTable("dos-table", SCHEMAS["dos-table"], rows, checks=checks)


def _global_law(c: ExperimentConfig) -> ResultTable:
    est = global_moments(c.n, c.alpha, c.kmax, c.replicas, c.seed, c.workers)
    lim = limit_moments(c.alpha, c.kmax)[1:]
    rows = [(k + 1, e.value, e.se, lim[k], abs(e.value - lim[k])) for k, e in enumerate(est)]
    checks = [Check(f"moment {k + 1} within 2%", abs(e.value - lim[k]) <= 0.02 * max(1.0, abs(lim[k])),
                    f"{e.value:.5g} vs {lim[k]:.5g}") for k, e in enumerate(est)]
    return ResultTable("global-law", SCHEMAS["global-law"], rows, checks=checks)


def exact_clt_variance(function: str, n: int, alpha: float) -> float:
    """Closed-form ``n Var<L_n, f>`` at ``beta = 2 alpha / n`` where known."""
    if function == "x":
        return 1.0
    if function == "x^2":
        return 2.0 + 2.0 * alpha * (n - 1) / n
    return math.nan


def _clt(c: ExperimentConfig) -> ResultTable:
    s = clt_experiment(c.n, c.alpha, c.function, c.replicas, c.seed, c.workers)
    exact = exact_clt_variance(s.function, c.n, c.alpha)
    row = (c.n, c.alpha, s.replicas, s.mean.value, s.mean.se, s.variance.value, s.variance.se,
           s.skewness.value, s.kurtosis.value, s.bound.value, s.bound.se,
           s.normality.statistic, s.normality.pvalue, exact)
    slack = 3.0 * math.hypot(s.variance.se, s.bound.se)
    checks = [Check("variance <= gradient bound", s.variance.value <= s.bound.value + slack,
                    f"{s.variance.value:.4g} vs {s.bound.value:.4g}")]
    if not math.isnan(exact):
        checks.insert(0, Check("variance matches exact value within 3 se",
                               s.variance.within(exact), f"{s.variance:.4g} vs {exact:.4g}"))
    return ResultTable("clt", SCHEMAS["clt"], [row], {"skipped_replicas": s.skipped}, checks)


def _sigma2_identity(c: ExperimentConfig) -> ResultTable:
    lhs = clt_experiment(c.n, c.alpha, c.function, c.replicas, c.seed, c.workers).variance
    rhs = sigma2_integral(c.alpha, c.function, c.grid_size, c.n_iid, c.replicas_iid,
                          c.seed + 1, c.workers)
    rows = [(u, e.value, e.se) for u, e in zip(rhs.nodes, rhs.node_values)]
    band = 3.0 * math.hypot(lhs.se, rhs.value.se)
    meta = {"lhs": lhs.value, "lhs_se": lhs.se, "rhs": rhs.value.value, "rhs_se": rhs.value.se}
    checks = [Check("n Var equals the integral within 3 combined se",
                    abs(lhs.value - rhs.value.value) <= band,
                    f"{lhs:.4g} vs {rhs.value:.4g}")]
    return ResultTable("sigma2-identity", SCHEMAS["sigma2-identity"], rows, meta, checks)


def _local_law(c: ExperimentConfig) -> ResultTable:
    r = local_law(c.n, c.alpha, c.E, c.zeta, c.replicas, c.seed, c.bin_width / c.n, c.workers)
    d = dos(c.alpha, c.E)
    # f_zeta integrates to pi, so a flat density d gives pi * d
    target = math.pi * d
    row = (c.n, c.alpha, c.E, c.sigma, c.tau, r.xi_mean.value, r.xi_mean.se, target,
           r.density.value, r.density.se, d)
    checks = [Check("E[xi(f_zeta)] = pi dos within 5%", abs(r.xi_mean.value / target - 1) <= 0.05,
                    f"{r.xi_mean:.4g} vs {target:.4g}"),
              Check("mean density = dos within 5%", abs(r.density.value / d - 1) <= 0.05,
                    f"{r.density:.4g} vs {d:.4g}")]
    return ResultTable("local-law", SCHEMAS["local-law"], [row],
                       {"skipped_replicas": r.skipped}, checks)


def _bulk_poisson(c: ExperimentConfig) -> ResultTable:
    theta = dos(c.alpha, c.E)
    samples = sample_local_processes(c.n, c.alpha, c.E, c.W, c.replicas, c.seed, c.workers)
    diag = poisson_diagnostics(samples, theta, c.intervals)
    rows = []
    checks = []
    for i, (lo, hi) in enumerate(diag.intervals):
        m, v, disp = diag.count_mean[i], diag.count_variance[i], diag.dispersion(i)
        exp = diag.expected(i)
        rows.append((lo, hi, m.value, m.se, v.value, disp.value, disp.se, exp))
        checks.append(Check(f"count mean on [{lo:g},{hi:g}) within 4%",
                            abs(m.value / exp - 1) <= 0.04, f"{m:.4g} vs {exp:.4g}"))
        checks.append(Check(f"dispersion on [{lo:g},{hi:g}) in [0.9, 1.1]",
                            0.9 <= disp.value <= 1.1, f"{disp.value:.4g}"))
    meta = {"theta": theta, "gap_ks_statistic": diag.gap_ks.statistic,
            "gap_ks_pvalue": diag.gap_ks.pvalue, "gaps": int(diag.gaps.size)}
    if len(diag.intervals) >= 2:
        cov = diag.covariance[0][1]
        meta.update(covariance=cov.value, covariance_se=cov.se)
        checks.append(Check("cross-interval covariance within 3 se of 0", cov.within(0.0),
                            f"{cov:.3g}"))
    checks.append(Check("gap KS p-value > 0.01", diag.gap_ks.pvalue > 0.01,
                        f"p = {diag.gap_ks.pvalue:.3g}"))
    return ResultTable("bulk-poisson", SCHEMAS["bulk-poisson"], rows, meta, checks)


def _wegner_minami(c: ExperimentConfig) -> ResultTable:
    z = complex(*(c.z or (0.5, 0.01)))
    w = wegner_check(Model("gbe", c.n, c.alpha), z, c.replicas, c.seed, c.workers)
    m = minami_check(Model("gbe", c.minami_n, c.alpha), c.E, c.minami_intervals,
                     c.block_length, c.minami_replicas, c.seed + 1, c.workers)
    nan = Estimate(math.nan, math.nan)
    p1 = m.probabilities[0]
    p2 = m.probabilities[1] if len(m.probabilities) > 1 else nan
    ratio = m.ratio() if p2.value > 0 else nan
    row = (w.estimate.value, w.estimate.se, w.site, w.bound, p1.value, p1.se, p2.value, p2.se,
           ratio.value, ratio.se)
    checks = [Check("Wegner estimate <= bound + 3 se", w.passed,
                    f"{w.estimate:.4g} vs {w.bound:.4g}"),
              Check("Minami ratio in [3, 5]", 3.0 <= ratio.value <= 5.0, f"{ratio:.3g}")]
    return ResultTable("wegner-minami", SCHEMAS["wegner-minami"], [row],
                       {"blocks": m.blocks}, checks)


def _green_decay(c: ExperimentConfig) -> ResultTable:
    z = complex(*(c.z or (0.0, 0.001)))
    g = green_decay(Model("gbe", c.n, c.alpha), z, c.s, c.replicas, c.max_distance, c.seed,
                    c.fit_range, c.workers)
    rows = np.column_stack([g.distances, g.moments, g.log_se])
    meta = {"intercept": g.intercept, "slope": g.slope, "r2": g.r2, "M_s": g.M_s,
            "gamma_s": g.gamma_s}
    checks = [Check("fitted slope < 0", g.slope < 0, f"{g.slope:.4g}"),
              Check("R^2 > 0.95", g.r2 > 0.95, f"{g.r2:.4f}")]
    return ResultTable("green-decay", SCHEMAS["green-decay"], rows, meta, checks)


REGISTRY = {
    "dos-table": _dos_table,
    "global-law": _global_law,
    "clt": _clt,
    "sigma2-identity": _sigma2_identity,
    "local-law": _local_law,
    "bulk-poisson": _bulk_poisson,
    "wegner-minami": _wegner_minami,
    "green-decay": _green_decay,
}


def run_experiment(config: ExperimentConfig, write: bool = True, stem: str | None = None) -> ResultTable:
    """Run one experiment; optionally write ``<out>/<stem>.csv`` and its JSON sidecar."""
    t0 = time.perf_counter()
    table = REGISTRY[config.experiment](config)
    table.metadata.update(config=config_to_dict(config), seed=config.seed,
                          wall_time_s=time.perf_counter() - t0, version=__version__)
    table.metadata.setdefault("skipped_replicas", 0)
    if write:
        table.write(config.out, stem)
    return table


def schema_help() -> str:
    lines = ["CSV schemas (one header row, then numeric rows):"]
    for name, cols in SCHEMAS.items():
        lines.append(f"  {name}: {','.join(cols)}")
    return "\n".join(lines)
