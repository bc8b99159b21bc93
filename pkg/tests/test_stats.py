import numpy as np
import pytest
from scipy import stats as sps

from tqlab.paths import CadlagPath, DomainError
from tqlab.stats import (empirical_cov2, ks_critical, normal_cdf, one_sample_ks, standard_error,
                         sup_dev_from_line, theoretical_cov2, two_sample_ks, variance_order)


@pytest.mark.parametrize("seed", range(10))
def test_two_sample_ks_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=rng.integers(5, 300))
    b = rng.normal(0.2, 1.1, size=rng.integers(5, 300))
    if seed % 2:
        a = np.round(a, 1)  # ties
        b = np.round(b, 1)
    assert two_sample_ks(a, b) == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_one_sample_ks_matches_scipy(seed):
    x = np.random.default_rng(seed).normal(size=200)
    assert one_sample_ks(x, normal_cdf(1.0)) == pytest.approx(sps.kstest(x, "norm").statistic, abs=1e-12)


def test_ks_hand_example():
    assert two_sample_ks([1, 2, 3], [4, 5, 6]) == 1.0
    assert two_sample_ks([1, 2], [1, 2]) == 0.0


def test_ks_rejects_bad_input():
    with pytest.raises(DomainError):
        two_sample_ks([], [1.0])
    with pytest.raises(DomainError):
        one_sample_ks([np.nan], normal_cdf(1.0))


def test_ks_critical_values():
    assert ks_critical(10 ** 4, 10 ** 4) == pytest.approx(0.0230, abs=1e-4)
    assert ks_critical(2000, 2000) == pytest.approx(0.05148, abs=1e-4)
    assert ks_critical(5000) == pytest.approx(1.628 / np.sqrt(5000))
    assert ks_critical(100, alpha=0.05) == pytest.approx(0.1358)


def test_covariance_helpers():
    np.testing.assert_allclose(theoretical_cov2(1.0, 1.0, 2.0), [[1, 1], [1, 2]])
    x = np.random.default_rng(0).normal(size=(50, 2))
    np.testing.assert_allclose(empirical_cov2(x), np.cov(x.T))
    with pytest.raises(DomainError):
        empirical_cov2(np.zeros((5, 3)))
    with pytest.raises(DomainError):
        theoretical_cov2(1.0, 2.0, 1.0)


def test_sup_dev_from_line_counts_left_limits():
    p = CadlagPath.step([1.0, 2.0], horizon=3.0)
    # t - A(t) reaches 1 just before each jump
    assert sup_dev_from_line(p, 1.0, 3.0) == pytest.approx(1.0)
    assert sup_dev_from_line(p, 1.0, 0.5) == pytest.approx(0.5)


def test_variance_order_and_standard_error():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    assert variance_order(x, np.var(x, ddof=1)) == pytest.approx(1.0)
    assert standard_error(x) == pytest.approx(np.std(x, ddof=1) / 2)
