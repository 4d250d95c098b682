import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gbelab import InvalidParameterError
from gbelab.jacobi import (JacobiMatrix, Model, associated_hermite, gbe_offdiag_dof, restrict,
                           sample_gbe, sample_iid)
from gbelab.randsrc import RandomStream
from gbelab.tridiag import dense_eig_oracle


def test_validation():
    with pytest.raises(InvalidParameterError):
        JacobiMatrix([], [])
    with pytest.raises(InvalidParameterError):
        JacobiMatrix([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        JacobiMatrix([0.0, 0.0], [0.0])
    with pytest.raises(InvalidParameterError):
        JacobiMatrix([np.inf, 0.0], [1.0])


def test_immutable():
    J = JacobiMatrix([1.0, 2.0], [0.5])
    with pytest.raises(ValueError):
        J.diag[0] = 3.0


def test_csv_round_trip():
    J = sample_gbe(5, 0.3, RandomStream(1))
    text = J.to_csv()
    assert text.splitlines()[0] == "diag,offdiag"
    assert text.splitlines()[-1].endswith(",")
    assert JacobiMatrix.from_csv(text) == J


def test_gbe_size_one():
    J = sample_gbe(1, 1.0, RandomStream(0))
    assert J.n == 1 and J.offdiag.size == 0


def test_gbe_frozen_draw():
    J = sample_gbe(3, 1.0, RandomStream(42, 0))
    assert J.diag.tolist() == [-1.1043995228921153, 0.1891281100736375, 0.04600092882122236]
    assert J.offdiag.tolist() == [1.3918751414375263, 0.6587863285196034]


@pytest.mark.parametrize("n, beta", [(0, 1.0), (3, 0.0), (2.5, 1.0)])
def test_gbe_rejects(n, beta):
    with pytest.raises(InvalidParameterError):
        sample_gbe(n, beta, RandomStream(0))


def test_iid_rejects():
    with pytest.raises(InvalidParameterError):
        sample_iid(3, 0.0, RandomStream(0))


def test_gbe_trace_square_small():
    # E Tr T^2 = n + beta n (n - 1) / 2 = 10 for n = 4, beta = 1
    A, B2 = Model("gbe", 4, 2.0, beta=1.0).sample_batch(7, range(10**5))
    t = (A ** 2).sum(axis=1) + 2 * B2.sum(axis=1)
    assert abs(t.mean() - 10.0) < 0.1


def test_gbe_global_second_moment():
    n, alpha = 100, 1.0
    A, B2 = Model("gbe", n, alpha).sample_batch(8, range(2000))
    m2 = ((A ** 2).sum(axis=1) + 2 * B2.sum(axis=1)) / n
    assert abs(m2.mean() - 1.99) < 0.02


def test_gbe_offdiag_second_moments():
    n, alpha = 20, 1.0
    beta = 2 * alpha / n
    A, B2 = Model("gbe", n, alpha).sample_batch(9, range(20000))
    target = gbe_offdiag_dof(n, beta) / 2
    se = np.sqrt(target / 20000)  # Gam(k) variance is k
    assert np.all(np.abs(B2.mean(axis=0) - target) < 5 * se)


def test_iid_entry_moments():
    n, alpha = 50, 1.0
    A, B2 = Model("iid", n, alpha).sample_batch(10, range(2000))
    assert abs(B2.mean() - 1.0) < 0.01
    tr = ((A ** 2).sum(axis=1) + 2 * B2.sum(axis=1)) / n
    assert abs(tr.mean() - (1 + 2 * alpha * (n - 1) / n)) < 0.05


def test_diagonal_laws_match_between_models():
    a = Model("gbe", 30, 1.0).sample_batch(11, range(3000))[0].ravel()
    b = Model("iid", 30, 1.0).sample_batch(12, range(3000))[0].ravel()
    assert abs(a.mean() - b.mean()) < 0.01 and abs(a.var() - b.var()) < 0.02


def test_sample_squared_matches_sample():
    m = Model("gbe", 6, 1.0)
    J = m.sample(RandomStream(3, 2))
    a, b2 = m.sample_squared(RandomStream(3, 2))
    assert np.array_equal(J.diag, a)
    assert np.allclose(J.offdiag ** 2, b2, rtol=1e-14)


def test_iid_alpha_zero_batch():
    A, B2 = Model("iid", 5, 0.0).sample_batch(1, range(3))
    assert np.all(B2 == 0.0)


def test_associated_hermite_examples():
    J = associated_hermite(2, 0.0)
    assert J.diag.tolist() == [0.0, 0.0] and J.offdiag.tolist() == [1.0]
    J = associated_hermite(3, 1.0)
    assert np.allclose(J.offdiag, [math.sqrt(2), math.sqrt(3)])


@given(st.integers(2, 30), st.floats(0.0, 50.0))
def test_associated_hermite_properties(n, alpha):
    J = associated_hermite(n, alpha)
    assert np.all(np.diff(J.offdiag) > 0)
    assert math.isclose((J.to_dense() @ J.to_dense())[0, 0], alpha + 1, rel_tol=1e-12)


def test_restrict_examples():
    J = sample_gbe(6, 0.5, RandomStream(2))
    assert restrict(J, 1, 6) == J
    R = restrict(J, 3, 3)
    assert R.n == 1 and R.diag[0] == J.diag[2]
    with pytest.raises(IndexError):
        restrict(J, 0, 3)
    with pytest.raises(IndexError):
        restrict(J, 4, 7)


@given(st.integers(0, 500))
def test_restrict_interlaces(seed):
    J = sample_iid(6, 1.0, RandomStream(seed))
    lam = dense_eig_oracle(J)
    for u, v in ((1, 5), (2, 6)):
        mu = dense_eig_oracle(restrict(J, u, v))
        assert np.all(lam[:-1] <= mu + 1e-12) and np.all(mu <= lam[1:] + 1e-12)
