import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from crowdspoof.detector import (Decision, decide, decide_many, detect, predicted_pd,
                                 sample_variance, thresholds)
from crowdspoof.statmodels import chi2_cdf, chi2_inv

positive = st.floats(1e-3, 1e6)
eps_st = st.floats(1e-4, 1.0)


def test_sample_variance_examples():
    assert sample_variance(np.zeros(10)) == 0.0
    assert sample_variance([3.0, -3.0]) == 18.0
    # no mean subtraction
    assert sample_variance([5.0, 5.0]) == 50.0
    with pytest.raises(ValueError):
        sample_variance([1.0])


def test_sample_variance_of_gaussian_draws():
    rng = np.random.default_rng(0)
    vals = [sample_variance(rng.normal(0, 3.0, 10_000)) for _ in range(20)]
    assert np.mean(vals) == pytest.approx(9.0 * 10_000 / 9_999, rel=0.02)


def test_threshold_ratios_at_twenty_receivers():
    th = thresholds(1.0, 20, 0.01)
    assert th.gamma1 == pytest.approx(stats.chi2.ppf(0.005, 20) / 20, rel=1e-9)
    assert th.gamma2 == pytest.approx(stats.chi2.ppf(0.995, 20) / 20, rel=1e-9)
    assert th.gamma1 == pytest.approx(0.37, abs=0.005)
    assert th.gamma2 == pytest.approx(2.00, abs=0.005)


def test_thresholds_meet_at_the_median_when_epsilon_is_one():
    th = thresholds(7.0, 30, 1.0)
    assert th.gamma1 == th.gamma2 == pytest.approx(7.0 / 30 * chi2_inv(0.5, 30))


@settings(max_examples=100)
@given(positive, st.integers(2, 300), eps_st)
def test_thresholds_scale_linearly(s2, M, eps):
    a, b = thresholds(s2, M, eps), thresholds(2 * s2, M, eps)
    assert b.gamma1 == pytest.approx(2 * a.gamma1, rel=1e-12)
    assert b.gamma2 == pytest.approx(2 * a.gamma2, rel=1e-12)
    assert a.gamma1 <= a.gamma2


@pytest.mark.parametrize("args", [(0.0, 20, 0.01), (1.0, 1, 0.01), (1.0, 20, 0.0), (1.0, 20, 1.5)])
def test_threshold_validation(args):
    with pytest.raises(ValueError):
        thresholds(*args)


def test_decision_examples():
    th = thresholds(100.0, 20, 0.01)
    assert decide(0.0, th) is Decision.H1
    assert decide((th.gamma1 + th.gamma2) / 2, th) is Decision.H0
    assert decide(2 * th.gamma2, th) is Decision.H2
    # boundaries belong to H0
    assert decide(th.gamma1, th) is Decision.H0 and decide(th.gamma2, th) is Decision.H0


@settings(max_examples=200)
@given(st.floats(0, 1e4), st.floats(0, 1e4), positive, st.integers(2, 200), eps_st)
def test_decision_is_monotone(x, y, s2, M, eps):
    th = thresholds(s2, M, eps)
    lo, hi = sorted((x, y))
    assert decide(lo, th).rank <= decide(hi, th).rank


@settings(max_examples=200)
@given(st.floats(0, 1e4), positive, st.integers(2, 200), eps_st, st.sampled_from([0.5, 2.0, 4.0, 0.25]))
def test_decision_is_scale_invariant(x, s2, M, eps, c):
    # powers of two keep the scaled comparisons exact
    assert decide(c * x, thresholds(c * s2, M, eps)) is decide(x, thresholds(s2, M, eps))


def test_vectorized_decisions_match_scalar_rule():
    th = thresholds(50.0, 25, 0.05)
    xs = np.linspace(0, 150, 1001)
    order = [Decision.H1, Decision.H0, Decision.H2]
    assert [order[k] for k in decide_many(xs, th)] == [decide(x, th) for x in xs]


def test_predicted_pd_limits():
    th = thresholds(100.0, 50, 0.002)
    pd1, _ = predicted_pd(th, 1e-9, 100.0)
    assert pd1 == pytest.approx(1.0)
    _, pd2 = predicted_pd(th, 1.0, 100.0)
    assert pd2 == pytest.approx(0.001, rel=1e-8)
    with pytest.raises(ValueError):
        predicted_pd(th, 0.0, 1.0)


def test_false_alarm_rate_of_the_ideal_chi_squared_statistic():
    # when M sigma_hat^2 / sigma^2 really is chi-squared with M dof the rule is calibrated
    rng = np.random.default_rng(1)
    M, s2, n = 20, 40.0, 100_000
    stat = s2 * rng.chisquare(M, n) / M
    for eps in (0.1, 0.01):
        rate = np.mean(decide_many(stat, thresholds(s2, M, eps)) != 1)
        assert abs(rate - eps) <= 3 * np.sqrt(eps * (1 - eps) / n)


def test_detect_report_fields():
    rng = np.random.default_rng(2)
    samples = rng.normal(0, 10, 380)
    rep = detect(samples, 100.0, 0.01, 20, region_id=3, sigma2_h1=4.0)
    assert rep.region_id == 3 and rep.decision is Decision.H0
    assert rep.predicted_pd_h2 is None
    assert rep.predicted_pd_h1 == pytest.approx(chi2_cdf(20 * rep.thresholds.gamma1 / 4.0, 20))
    row = rep.row()
    assert list(row) == ["region_id", "variance_m2", "gamma1", "gamma2", "decision",
                         "pd_h1_pred", "pd_h2_pred"]
    assert row["pd_h2_pred"] == ""


@pytest.mark.slow
def test_predicted_fully_spoofed_detection_matches_simulation():
    from crowdspoof.geometry import sky12
    from crowdspoof.harness.config import ExperimentSpec
    from crowdspoof.harness.runner import run_experiment
    from crowdspoof.scenario import RoiBounds, ScenarioConfig, SpooferConfig
    from crowdspoof.statmodels import variance_h0, variance_h1
    D, M, eps = 1000.0, 100, 0.002
    cfg = ScenarioConfig(roi=RoiBounds.square(D), n_receivers=M,
                         spoofer=SpooferConfig(spoofed_fraction=1.0))
    (row,) = run_experiment(ExperimentSpec(cfg, "d2ps", {"fa": [eps]}, 1000, 31), sky12())
    th = thresholds(variance_h0(D, D, sky12()).sigma2, M, eps)
    pd1, _ = predicted_pd(th, variance_h1(5.0).sigma2, 1.0)
    assert abs(row.pd_h1 - pd1) <= 0.03
