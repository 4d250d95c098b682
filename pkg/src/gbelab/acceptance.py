"""The acceptance suite: twelve desk-scale checks with fixed seeds.

Each check returns a :class:`CheckResult`.  Seeds are ``1000 + number`` and
were fixed before any check was run.
"""
from __future__ import annotations

import functools
import math
import tempfile
import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .density import dos, dos_via_truncation, theta_E
from .harness.config import parse_config
from .harness.experiments import run_experiment
from .jacobi import Model, sample_gbe, sample_iid
from .randsrc import RandomStream
from .stats.linear import clt_experiment, sigma2_integral
from .stats.local import local_law, poisson_diagnostics, sample_local_processes
from .stats.localization import WEGNER_BOUND, green_decay, minami_check, wegner_check
from .tridiag import dense_eigh_oracle, eigenvalues, spectral_weights

DOS_1_0 = 2.0 / (math.pi * math.sqrt(2.0 * math.pi))
ENERGY_GRID = np.arange(-4.0, 4.0 + 1e-9, 0.25)
ALPHAS = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return (f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.name}: "
                f"{self.detail} ({self.seconds:.1f} s)")


def _seed(k: int) -> int:
    return 1000 + k


def check_eigensolver(workers=None):
    """200 random matrices of size <= 8 against the dense rotation oracle."""
    t0 = time.perf_counter()
    worst_l = worst_w = 0.0
    for r in range(200):
        stream = RandomStream(_seed(1), r)
        n = 1 + r % 8
        J = sample_gbe(n, 2.0 / n, stream) if r % 2 == 0 else sample_iid(n, 1.0, stream)
        lam = eigenvalues(J)
        w = spectral_weights(J, lam)
        ol, ow = dense_eigh_oracle(J)
        worst_l = max(worst_l, float(np.max(np.abs(lam - ol))))
        worst_w = max(worst_w, float(np.max(np.abs(w - ow))))
    dt = time.perf_counter() - t0
    ok = worst_l < 1e-10 and worst_w < 1e-8 and dt < 5.0
    return ok, f"max eigenvalue error {worst_l:.2e}, max weight error {worst_w:.2e}"


def check_density(workers=None):
    t0 = time.perf_counter()
    sup = 0.0
    norm_err = 0.0
    g = np.linspace(-12.0, 12.0, 4801)
    for a in ALPHAS:
        sup = max(sup, float(np.max(np.abs(dos(a, ENERGY_GRID)
                                           - dos_via_truncation(a, ENERGY_GRID, 5000, 1e-3)))))
        norm_err = max(norm_err, abs(float(simpson(dos(a, g), x=g)) - 1.0))
    anchor = abs(dos(1.0, 0.0) - DOS_1_0)
    dt = time.perf_counter() - t0
    ok = sup < 5e-3 and norm_err < 1e-6 and anchor < 1e-8 and dt < 60.0
    return ok, f"sup |dos - truncation| {sup:.2e}, |int dos - 1| {norm_err:.1e}, anchor error {anchor:.1e}"


def check_theta(workers=None):
    t0 = time.perf_counter()
    dev = 0.0
    for a in ALPHAS:
        d = dos(a, ENERGY_GRID)
        th = np.array([theta_E(a, e) for e in ENERGY_GRID])
        dev = max(dev, float(np.max(np.abs(th / d - 1.0))))
    dt = time.perf_counter() - t0
    return dev < 1e-3 and dt < 60.0, f"max |theta_E / dos - 1| {dev:.2e}"


def check_clt_linear(workers=None):
    t0 = time.perf_counter()
    s = clt_experiment(200, 1.0, "x", 20000, _seed(4), workers)
    dt = time.perf_counter() - t0
    ok = (s.variance.within(1.0) and abs(s.skewness.value) < 0.05
          and abs(s.kurtosis.value) < 0.1 and dt < 60.0)
    return ok, (f"n Var {s.variance:.4f}, skewness {s.skewness.value:+.4f}, "
                f"excess kurtosis {s.kurtosis.value:+.4f}")


@functools.lru_cache(maxsize=None)
def _clt_square(workers=None):
    return clt_experiment(200, 1.0, "x^2", 20000, _seed(5), workers)


def check_clt_square(workers=None):
    s = _clt_square(workers)
    exact = 2.0 + 2.0 * 199 / 200
    bound_ok = s.variance.value <= s.bound.value + 3.0 * math.hypot(s.variance.se, s.bound.se)
    ok = s.variance.within(exact) and bound_ok and s.normality.pvalue > 0.01
    return ok, (f"n Var {s.variance:.4f} vs {exact:.4f}, bound {s.bound:.4f}, "
                f"normality KS p = {s.normality.pvalue:.3g}")


def check_sigma2_identity(workers=None):
    t0 = time.perf_counter()
    lhs = _clt_square(workers).variance
    rhs = sigma2_integral(1.0, "x^2", 11, 500, 5000, _seed(6), workers).value
    dt = time.perf_counter() - t0
    band = 3.0 * math.hypot(lhs.se, rhs.se)
    ok = abs(lhs.value - rhs.value) <= band and rhs.within(4.0) and dt < 600.0
    return ok, f"lhs {lhs:.4f}, rhs {rhs:.4f} (anchor 4.0)"


def check_local_law(workers=None):
    t0 = time.perf_counter()
    r = local_law(2000, 1.0, 0.0, 1j, 10000, _seed(7), 0.5 / 2000, workers)
    dt = time.perf_counter() - t0
    target = math.pi * DOS_1_0
    e1 = r.xi_mean.value / target - 1.0
    e2 = r.density.value / DOS_1_0 - 1.0
    ok = abs(e1) <= 0.05 and abs(e2) <= 0.05 and dt < 900.0
    return ok, (f"E[xi] {r.xi_mean:.4f} vs {target:.4f} ({e1:+.1%}), "
                f"density {r.density:.4f} vs {DOS_1_0:.4f} ({e2:+.1%})")


def check_bulk_poisson(workers=None):
    t0 = time.perf_counter()
    samples = sample_local_processes(2000, 1.0, 0.0, 10.0, 5000, _seed(8), workers)
    d = poisson_diagnostics(samples, DOS_1_0, [(-2.0, 0.0), (0.0, 2.0)])
    dt = time.perf_counter() - t0
    m = d.count_mean[1]
    disp = d.dispersion(1)
    cov = d.covariance[0][1]
    ok_mean = abs(m.value / (2 * DOS_1_0) - 1.0) <= 0.04
    ok = ok_mean and 0.9 <= disp.value <= 1.1 and cov.within(0.0) and d.gap_ks.pvalue > 0.01 \
        and dt < 1200.0
    return ok, (f"count mean {m:.4f} vs {2 * DOS_1_0:.4f}, variance/mean {disp.value:.3f}, "
                f"covariance {cov:.4f}, gap KS p = {d.gap_ks.pvalue:.3g}")


def check_wegner(workers=None):
    w = wegner_check(Model("gbe", 200, 1.0), 0.5 + 0.01j, 10000, _seed(9), workers)
    return w.passed, f"max_x E[Im G] {w.estimate:.4f} at x = {w.site}, bound {WEGNER_BOUND:.4f}"


def check_minami(workers=None):
    m = minami_check(Model("gbe", 128, 1.0), 0.0, [(0.0, 1.0), (0.0, 0.5)], 64, 50000,
                     _seed(10), workers)
    r = m.ratio()
    p1, p2 = m.probabilities
    return 3.0 <= r.value <= 5.0, (f"P(>=2) {p1.value:.2e} vs {p2.value:.2e}, ratio {r:.3f} "
                                   f"over {m.blocks} blocks")


def check_green_decay(workers=None):
    g = green_decay(Model("gbe", 400, 1.0), 0.001j, 0.2, 10000, 100, _seed(11), (10, 100), workers)
    return g.slope < 0 and g.r2 > 0.95, f"slope {g.slope:.4f}, R^2 {g.r2:.4f}"


def check_determinism(workers=None):
    docs = [
        '{"experiment": "clt", "alpha": 1, "n": 100, "replicas": 600, "function": "x^3"}',
        '{"experiment": "bulk-poisson", "alpha": 1, "n": 500, "replicas": 600}',
        '{"experiment": "green-decay", "alpha": 1, "n": 150, "replicas": 600, "max_distance": 50,'
        ' "fit_range": [5, 50]}',
    ]
    same = []
    with tempfile.TemporaryDirectory() as tmp:
        for doc in docs:
            csv = []
            for w in (1, 3):
                c = parse_config(doc, {"seed": _seed(12), "workers": w, "out": f"{tmp}/w{w}"})
                csv.append(run_experiment(c, write=True).to_csv())
                with open(f"{tmp}/w{w}/{c.experiment}.csv") as fh:
                    csv.append(fh.read())
            same.append(len(set(csv)) == 1)
    return all(same), f"{sum(same)}/{len(same)} experiments bit-identical across 1 and 3 workers"


CHECKS = (
    (1, "eigensolver oracle equivalence", check_eigensolver),
    (2, "density cross-validation", check_density),
    (3, "theta_E identity", check_theta),
    (4, "exact CLT anchor f(x) = x", check_clt_linear),
    (5, "derived CLT anchor f(x) = x^2", check_clt_square),
    (6, "variance integral identity", check_sigma2_identity),
    (7, "local law", check_local_law),
    (8, "Poisson bulk statistics", check_bulk_poisson),
    (9, "Wegner bound", check_wegner),
    (10, "Minami scaling", check_minami),
    (11, "Green's-function decay", check_green_decay),
    (12, "determinism across worker counts", check_determinism),
)


def run_check(number: int, workers=None) -> CheckResult:
    num, name, fn = CHECKS[number - 1]
    t0 = time.perf_counter()
    try:
        ok, detail = fn(workers)
    except Exception as e:  # a crashing check is a failed check
        ok, detail = False, f"{type(e).__name__}: {e}"
    return CheckResult(num, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(numbers=None, workers=None, echo=print):
    out = []
    for num, _, _ in CHECKS:
        if numbers and num not in numbers:
            continue
        r = run_check(num, workers)
        if echo:
            echo(r.line())
        out.append(r)
    return out
