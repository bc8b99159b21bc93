import numpy as np
import pytest

from tqlab.models import ArrivalModel, ModelError, ServiceModel, heavy_traffic_gap, stream
from tqlab.stats import one_sample_ks

ARRIVALS = [ArrivalModel.exponential(1.0), ArrivalModel.exponential(2.5), ArrivalModel.uniform(2.0),
            ArrivalModel.triangular(2.0), ArrivalModel.triangular(0.7)]


@pytest.mark.parametrize("spec", ["exp:1", "exp:2.5", "unif:0,2", "tri:0,2"])
def test_arrival_spec_round_trip(spec):
    assert ArrivalModel.parse(spec).spec == spec


@pytest.mark.parametrize("spec", ["exp:1", "det:2", "gamma:2,0.5", "unif:0.5,1.5"])
def test_service_spec_round_trip(spec):
    assert ServiceModel.parse(spec).spec == spec


@pytest.mark.parametrize("bad", ["weibull:1", "exp:", "exp:-1", "unif:1,2", "exp:a"])
def test_arrival_parse_errors(bad):
    with pytest.raises(ModelError):
        ArrivalModel.parse(bad)


@pytest.mark.parametrize("bad", ["exp:0", "gamma:1", "unif:2,1", "det:1,2", "pareto:1"])
def test_service_parse_errors(bad):
    with pytest.raises(ModelError):
        ServiceModel.parse(bad)


def test_exponential_constants():
    a = ArrivalModel.parse("exp:1")
    assert a.density_at_zero == 1.0 and a.density_slope_at_zero == -1.0


def test_triangular_constants():
    a = ArrivalModel.parse("tri:0,2")
    assert a.density_at_zero == 1.0 and a.density_slope_at_zero == -0.5
    assert ArrivalModel.parse("unif:0,2").density_slope_at_zero == 0.0


@pytest.mark.parametrize("a", ARRIVALS, ids=lambda a: a.spec)
def test_constants_match_finite_differences(a):
    h = 1e-5
    f0 = (a.cdf(h) - a.cdf(0.0)) / h
    assert f0 == pytest.approx(a.density_at_zero, abs=1e-4)
    f0p = (a.cdf(h) - a.density_at_zero * h) * 2 / h ** 2
    assert f0p == pytest.approx(a.density_slope_at_zero, abs=1e-4)


@pytest.mark.parametrize("a", ARRIVALS, ids=lambda a: a.spec)
def test_ppf_inverts_cdf(a):
    u = np.linspace(0.001, 0.999, 101)
    np.testing.assert_allclose(a.cdf(a.ppf(u)), u, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("a", ARRIVALS[:4], ids=lambda a: a.spec)
def test_sample_matches_cdf(a):
    x = a.sample(10 ** 6, stream(7, 1))
    assert np.all(np.diff(x) >= 0)
    assert one_sample_ks(x, a.cdf) < 0.002


@pytest.mark.parametrize("a", ARRIVALS[:4], ids=lambda a: a.spec)
def test_window_sampling_matches_truncation(a):
    # conditional law given T <= w, and the Binomial(n, F(w)) count
    w, n, reps = 0.3, 200, 4000
    rng = stream(3, 2)
    counts = np.array([a.sample_window(n, w, rng).size for _ in range(reps)])
    p = a.cdf(w)
    assert abs(counts.mean() - n * p) < 4 * np.sqrt(n * p * (1 - p) / reps)
    x = a.sample_window(10 ** 6, w, rng)
    assert x.max() <= w
    assert one_sample_ks(x, lambda t: a.cdf(t) / p) < 0.003


def test_deterministic_service():
    np.testing.assert_array_equal(ServiceModel.deterministic(2.0).sample(3, stream(0)), [2.0, 2.0, 2.0])


@pytest.mark.parametrize("spec,mean,second", [("exp:2", 0.5, 0.5), ("det:3", 3.0, 9.0), ("gamma:2,0.5", 1.0, 1.5),
                                               ("unif:0,3", 1.5, 3.0)])
def test_service_moments(spec, mean, second):
    s = ServiceModel.parse(spec)
    assert s.mean == pytest.approx(mean)
    assert s.second_moment == pytest.approx(second)
    assert s.variance == pytest.approx(second - mean ** 2)


def test_gamma_second_moment_by_sampling():
    x = ServiceModel.gamma(2.0, 0.5).sample(10 ** 5, stream(11))
    assert np.mean(x ** 2) == pytest.approx(1.5, rel=0.02)


def test_heavy_traffic_gap():
    assert heavy_traffic_gap(ArrivalModel.exponential(1), ServiceModel.exponential(1)) == 0.0
    assert heavy_traffic_gap(ArrivalModel.uniform(2), ServiceModel.deterministic(1)) == pytest.approx(-0.5)
    # relabeling that keeps E[S] and f_T(0) keeps the gap
    pairs = [(ArrivalModel.exponential(2), ServiceModel.deterministic(0.5)),
             (ArrivalModel.uniform(0.5), ServiceModel.gamma(5, 0.1)),
             (ArrivalModel.triangular(1.0), ServiceModel.uniform(0.0, 1.0))]
    assert all(abs(heavy_traffic_gap(a, s)) < 1e-15 for a, s in pairs)


def test_streams_reproducible_and_distinct():
    a = stream(5, 1, 10, 3).random(4)
    np.testing.assert_array_equal(a, stream(5, 1, 10, 3).random(4))
    assert not np.array_equal(a, stream(5, 1, 10, 4).random(4))
    assert not np.array_equal(a, stream(6, 1, 10, 3).random(4))
