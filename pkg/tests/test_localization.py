import math

import numpy as np
import pytest
from scipy import stats

from gbelab import InvalidParameterError
from gbelab.jacobi import Model
from gbelab.stats.localization import (WEGNER_BOUND, green_decay, minami_check,
                                       poisson_two_or_more, wegner_check)
from gbelab.tridiag import resolvent_diagonal_batch


def test_wegner_bound_value():
    assert WEGNER_BOUND == pytest.approx(math.sqrt(math.pi / 2))


def test_wegner_large_imaginary_part():
    # Im G(x, x) <= 1 / Im z always
    w = wegner_check(Model("gbe", 50, 1.0), 10j, 200, 1)
    assert w.estimate.value <= 0.1 + 1e-12
    assert w.passed and 1 <= w.site <= 50
    est, bound, ok = w
    assert bound == WEGNER_BOUND and ok


def test_wegner_small_case():
    w = wegner_check(Model("gbe", 60, 1.0), 0.5 + 0.05j, 2000, 2)
    assert w.passed
    with pytest.raises(InvalidParameterError):
        wegner_check(Model("gbe", 10, 1.0), 0.5, 10, 0)


def test_poisson_two_or_more():
    for m in (1e-6, 0.1, 1.0, 7.0):
        assert poisson_two_or_more(m, 1.0) == pytest.approx(stats.poisson.sf(1, m), rel=1e-9)


def test_minami_empty_interval_and_errors():
    m = minami_check(Model("gbe", 40, 1.0), 0.0, [(0.0, 0.0), (0.0, 1.0)], 20, 100, 3)
    assert m.probabilities[0].value == 0.0
    assert m.blocks == 200 and m.block_length == 20
    with pytest.raises(InvalidParameterError):
        minami_check(Model("gbe", 40, 1.0), 0.0, [(0.0, 1.0)], 5, 10, 3)
    with pytest.raises(InvalidParameterError):
        minami_check(Model("gbe", 40, 1.0), 0.0, [(0.0, 1.0)], 50, 10, 3)


def test_minami_monotone_in_interval():
    m = minami_check(Model("gbe", 64, 1.0), 0.0, [(0.0, 4.0), (0.0, 2.0)], 32, 4000, 4)
    assert m.probabilities[0].value >= m.probabilities[1].value > 0


def test_green_decay_errors():
    for s in (0.0, 0.5, 0.7):
        with pytest.raises(InvalidParameterError):
            green_decay(Model("gbe", 20, 1.0), 0.01j, s, 10, 10, 0, (2, 10))
    with pytest.raises(InvalidParameterError):
        green_decay(Model("gbe", 20, 1.0), -0.01j, 0.2, 10, 10, 0, (2, 10))


def test_green_decay_first_site_is_m_function_moment():
    model, z, s = Model("gbe", 80, 1.0), 0.3 + 0.01j, 0.3
    g = green_decay(model, z, s, 300, 40, 5, (5, 40), workers=1)
    A, B2 = model.sample_batch(5, range(300))
    m = resolvent_diagonal_batch(A, B2, z)[:, 0]
    assert g.moments[0] == pytest.approx(np.mean(np.abs(m) ** s), rel=1e-9)
    assert g.slope < 0 and g.gamma_s == -g.slope and g.M_s == pytest.approx(math.exp(g.intercept))
    assert g.distances[0] == 1 and g.distances.size == 40


def test_green_decay_real_axis():
    g = green_decay(Model("gbe", 60, 1.0), 0.0, 0.2, 200, 60, 6, (5, 60))
    assert np.all(np.isfinite(g.moments)) and g.slope < 0
