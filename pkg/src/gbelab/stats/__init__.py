"""Statistical estimators: linear statistics, local statistics, localization."""
from .estimate import Estimate
from .ks import KSResult, ks_statistic, ks_two_sample
from .linear import (CltSummary, TestFunction, clt_experiment, get_test_function, linear_stat,
                     sigma2_iid, sigma2_integral)
from .local import (LocalProcessSample, PoissonDiagnostics, local_law, local_process,
                    mean_density_estimate, poisson_diagnostics, xi_f_zeta)
from .localization import green_decay, minami_check, wegner_check

__all__ = ["Estimate", "KSResult", "ks_statistic", "ks_two_sample", "CltSummary", "TestFunction",
           "clt_experiment", "get_test_function", "linear_stat", "sigma2_iid", "sigma2_integral",
           "LocalProcessSample", "PoissonDiagnostics", "local_law", "local_process",
           "mean_density_estimate", "poisson_diagnostics", "xi_f_zeta", "green_decay",
           "minami_check", "wegner_check"]
