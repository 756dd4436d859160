import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate, special
from scipy import stats as sps

from crowdspoof.geometry import SatelliteLOS, SkyView, geometry_coefficients, sky12
from crowdspoof.scenario import RoiBounds
from crowdspoof.statmodels import (CROSS_TERM_READINGS, Hypothesis, chi2_cdf, chi2_inv,
                                   gammainc_lower, offset_spread_1d, sum_pdf, triangle_pdf,
                                   variance_h0, variance_h1, variance_h2, variance_h2_mixture,
                                   variance_mixed, variance_partial_sats)

widths = st.floats(0.05, 50.0)


def conv_oracle(h, a, b):
    lo, hi = max(-a, h - b), min(a, h + b)
    if lo >= hi:
        return 0.0
    pts = [p for p in (0.0, h - b, h, h + b) if lo < p < hi]
    return integrate.quad(lambda x: triangle_pdf(x, a) * triangle_pdf(h - x, b), lo, hi,
                          points=pts or None, epsabs=1e-12, epsrel=1e-11, limit=200)[0]


def moments(a, b):
    R = a + b
    knots = sorted({-R, -abs(a - b), -a, -b, 0.0, b, a, abs(a - b), R})
    segs = [(lo, hi) for lo, hi in zip(knots, knots[1:]) if hi > lo]
    m0 = sum(integrate.quad(lambda h: sum_pdf(h, a, b), lo, hi, epsabs=1e-12)[0] for lo, hi in segs)
    m2 = sum(integrate.quad(lambda h: h * h * sum_pdf(h, a, b), lo, hi, epsabs=1e-12)[0]
             for lo, hi in segs)
    return m0, m2


# -- triangle and sum densities -------------------------------------------------

def test_triangle_peak_edges_and_mass():
    assert triangle_pdf(0.0, 2.0) == 0.5
    assert triangle_pdf(2.0, 2.0) == 0.0 and triangle_pdf(-2.0, 2.0) == 0.0
    mass = integrate.quad(lambda x: triangle_pdf(x, 2.0), -2, 2, points=[0])[0]
    assert abs(mass - 1.0) <= 1e-10


def test_sum_density_example_against_convolution():
    a, b = 1.0, 0.7
    grid = np.linspace(-1.8, 1.8, 10_001)
    closed = sum_pdf(grid, a, b)
    numeric = np.array([conv_oracle(h, a, b) for h in grid[::50]])
    assert np.max(np.abs(closed[::50] - numeric)) <= 1e-6
    m0, m2 = moments(a, b)
    assert abs(m0 - 1.0) <= 1e-8
    assert abs(m2 - (1 + 0.49) / 6) <= 1e-6


@pytest.mark.parametrize("a,b", [(1.0, 0.2), (0.2, 1.0), (3.0, 1.0), (1.0, 1.0), (2.0, 1.0)])
def test_sum_density_outside_the_printed_branch_layout(a, b):
    hs = np.linspace(-(a + b), a + b, 61)
    numeric = np.array([conv_oracle(h, a, b) for h in hs])
    assert np.max(np.abs(sum_pdf(hs, a, b) - numeric)) <= 1e-9


def test_printed_first_branch_does_not_integrate_to_one():
    # the corrected first branch is what makes the density normalize
    X, Y = 1.0, 0.7
    def printed(h):
        h = abs(h)
        if h < X - Y:
            p = h**3 / 3 - 3 * h**2 * Y + (3 * X - Y) / 3 * Y**2
            return p / (X * Y) ** 2
        return sum_pdf(h, X, Y)
    mass = 2 * sum(integrate.quad(printed, lo, hi)[0]
                   for lo, hi in ((0, X - Y), (X - Y, Y), (Y, X), (X, X + Y)))
    assert abs(mass - 1.0) > 1e-3
    assert abs(2 * integrate.quad(lambda h: sum_pdf(h, X, Y), 0, X - Y)[0]
               + 2 * integrate.quad(lambda h: sum_pdf(h, X, Y), X - Y, X + Y,
                                    points=[Y, X])[0] - 1.0) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(widths, widths)
def test_sum_density_properties(a, b):
    assert sum_pdf(a + b + 1e-9, a, b) == 0.0
    hs = np.linspace(-(a + b), a + b, 41)
    vals = sum_pdf(hs, a, b)
    assert np.all(vals >= 0.0)
    np.testing.assert_allclose(vals, sum_pdf(-hs, a, b), rtol=0, atol=1e-15)
    np.testing.assert_allclose(vals, sum_pdf(hs, b, a), rtol=1e-9, atol=1e-12 / (a * b))


@settings(max_examples=15, deadline=None)
@given(widths, widths)
def test_sum_density_moments(a, b):
    m0, m2 = moments(a, b)
    assert abs(m0 - 1.0) <= 1e-8
    assert abs(m2 - (a * a + b * b) / 6.0) <= 1e-6 * max(1.0, (a * a + b * b) / 6.0)


# -- variance predictions -------------------------------------------------------

def test_h0_trivial_cases():
    assert variance_h0(0.0, 0.0, sky12()).sigma2 == 0.0
    one_pair = SkyView((SatelliteLOS(1, 90, 0), SatelliteLOS(2, 0, 0)))
    assert variance_h0(0.0, 100.0, one_pair).sigma2 == pytest.approx(100**2 / 6, rel=1e-12)


def test_h0_matches_direct_pair_average():
    rng = np.random.default_rng(0)
    sky = sky12()
    e = sky.unit_vectors()
    i, j = np.triu_indices(12, 1)
    g = e[i] - e[j]
    n = 200_000
    dx = rng.uniform(0, 80, n) - rng.uniform(0, 80, n)
    dy = rng.uniform(0, 120, n) - rng.uniform(0, 120, n)
    emp = np.mean([(g[:, 0] * x + g[:, 1] * y) ** 2 for x, y in zip(dx[:5000], dy[:5000])])
    pred = variance_h0(80, 120, sky).sigma2
    assert emp == pytest.approx(pred, rel=0.05)


def test_h0_noise_floor_is_optional():
    sky = sky12()
    base = variance_h0(100, 100, sky, sigma_rho=5, K=5).sigma2
    assert variance_h0(100, 100, sky, sigma_rho=5, K=5, include_noise=True).sigma2 == \
        pytest.approx(base + 20.0)


def test_h1_values():
    assert variance_h1(5.0).sigma2 == 100.0
    assert variance_h1(0.0).sigma2 == 0.0
    assert variance_h1(5.0, 5).sigma2 == pytest.approx(20.0)
    assert variance_h1(5.0).hypothesis is Hypothesis.H1


@settings(max_examples=50)
@given(st.floats(-3000, 3000), st.floats(-1000, 0), st.floats(1, 2000))
def test_offset_spread_equals_mixture_second_moment(c, lo, width):
    hi = lo + width
    # +-(c - u) with u ~ U(lo, hi), each sign with probability 1/2
    dens = lambda v: 0.5 / width * (((c - hi) < v < (c - lo)) + ((lo - c) < v < (hi - c)))
    pts = sorted({c - hi, c - lo, lo - c, hi - c})
    m2 = sum(integrate.quad(lambda v: v * v * dens(v), a, b, epsabs=0, epsrel=1e-12)[0]
             for a, b in zip(pts, pts[1:]) if b > a)
    assert abs(offset_spread_1d(c, lo, hi) - m2) <= 1e-9 * max(1.0, m2)


def test_mixed_spread_uses_region_offsets():
    sky = sky12()
    roi = RoiBounds.square(100.0)
    g = geometry_coefficients(sky)
    s = variance_mixed(roi, (0.0, 0.0, 0.0), sky)
    assert s == pytest.approx((g.sum_ex2 + g.sum_ey2) * (100**2 / 12) / g.n_pairs)


def test_h2_limits_are_exact():
    sky = sky12()
    roi = RoiBounds.square(500.0)
    for reading in CROSS_TERM_READINGS:
        assert variance_h2(0.0, roi, (750, 0, 0), sky, 5.0, cross_term=reading).sigma2 == \
            variance_h0(500.0, 500.0, sky).sigma2
        assert variance_h2(1.0, roi, (750, 0, 0), sky, 5.0, cross_term=reading).sigma2 == 100.0


def test_h2_rejects_bad_inputs():
    roi = RoiBounds.square(10)
    with pytest.raises(ValueError):
        variance_h2(1.5, roi, (0, 0, 0), sky12(), 5)
    with pytest.raises(ValueError):
        variance_h2(0.5, roi, (0, 0, 0), sky12(), 5, cross_term="other")


@pytest.mark.parametrize("reading", CROSS_TERM_READINGS)
def test_h2_continuous_in_alpha(reading):
    sky = sky12()
    roi = RoiBounds.square(500.0)
    f = lambda x: variance_h2(x, roi, (400, 300, 0), sky, 5.0, cross_term=reading).sigma2
    coarse = np.array([f(x) for x in np.linspace(0, 1, 501)])
    fine = np.array([f(x) for x in np.linspace(0, 1, 1001)])
    assert np.all(np.isfinite(fine))
    # a jump would keep the largest step size fixed under refinement
    ratio = np.abs(np.diff(fine)).max() / np.abs(np.diff(coarse)).max()
    assert ratio < 0.55


def test_mixture_limits():
    sky = sky12()
    roi = RoiBounds.square(500.0)
    assert variance_h2_mixture(0.0, roi, (0, 0, 0), sky, 5.0) == \
        pytest.approx(variance_h0(500, 500, sky).sigma2 + 100.0)
    assert variance_h2_mixture(1.0, roi, (0, 0, 0), sky, 5.0) == pytest.approx(100.0)


def test_partial_satellite_limits():
    assert variance_partial_sats(0, 12, 1234.0, 5.0).sigma2 == 1234.0
    assert variance_partial_sats(1, 12, 1234.0, 5.0).sigma2 == 1234.0
    assert variance_partial_sats(12, 12, 1234.0, 5.0).sigma2 == 100.0
    with pytest.raises(ValueError):
        variance_partial_sats(13, 12, 1.0, 1.0)


# -- chi-squared ----------------------------------------------------------------

def chi2_cdf_quadrature(x, M):
    k = M / 2.0
    c = -k * math.log(2) - math.lgamma(k)
    return integrate.quad(lambda t: math.exp(c + (k - 1) * math.log(t) - t / 2) if t > 0 else 0.0,
                          0, x, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def test_chi2_cdf_examples():
    assert chi2_cdf(0.0, 4) == 0.0
    assert chi2_cdf(2 * math.log(2), 2) == pytest.approx(0.5, abs=1e-15)
    assert abs(chi2_cdf(18.307, 10) - chi2_cdf_quadrature(18.307, 10)) <= 1e-10
    assert abs(chi2_cdf(18.307, 10) - 0.95) <= 5e-4


def test_chi2_inv_examples():
    assert abs(chi2_inv(0.5, 2) - 2 * math.log(2)) <= 1e-8
    for p in (0.0005, 0.9995):
        x = chi2_inv(p, 20)
        assert abs(chi2_cdf_quadrature(x, 20) - p) <= 1e-10
        ref = sps.chi2.ppf(p, 20)
        assert abs(x / ref - 1) <= 1e-6


@settings(max_examples=200)
@given(st.floats(0.01, 400.0), st.floats(0.0, 1000.0))
def test_gammainc_matches_reference(a, x):
    assert abs(gammainc_lower(a, x) - special.gammainc(a, x)) <= 1e-12


@settings(max_examples=200)
@given(st.floats(1e-3, 500.0), st.integers(1, 200))
def test_chi2_round_trip(x, M):
    p = chi2_cdf(x, M)
    if 1e-12 < p < 1 - 1e-12:
        back = chi2_inv(p, M)
        # conditioning: dx = dp / pdf
        pdf = sps.chi2.pdf(x, M)
        assert abs(back - x) <= max(1e-8, 1e-13 / pdf)


@settings(max_examples=100)
@given(st.integers(1, 200), st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_chi2_inv_strictly_increasing(M, p, q):
    # probabilities a few ulps apart are below the root finder's resolution
    assume(q - p > 1e-12 * q)
    assert chi2_inv(p, M) < chi2_inv(q, M)


@settings(max_examples=100)
@given(st.integers(1, 200), st.floats(0, 800), st.floats(0, 800))
def test_chi2_cdf_monotone(M, x, y):
    lo, hi = min(x, y), max(x, y)
    assert chi2_cdf(lo, M) <= chi2_cdf(hi, M)


def test_chi2_rejects_bad_arguments():
    for bad in (lambda: chi2_cdf(-1, 3), lambda: chi2_cdf(1, 0), lambda: chi2_inv(0.0, 3),
                lambda: chi2_inv(1.0, 3), lambda: chi2_inv(0.5, 0)):
        with pytest.raises(ValueError):
            bad()


@pytest.mark.parametrize("reading", CROSS_TERM_READINGS)
def test_h2_has_no_branch_jumps(reading):
    sky = sky12()
    roi = RoiBounds.square(500.0)
    f = lambda x: variance_h2(x, roi, (400, 300, 0), sky, 5.0, cross_term=reading).sigma2
    for a in np.linspace(0.001, 0.999, 999):
        left, right = f(a - 1e-15), f(a + 1e-15)
        assert abs(right - left) <= 1e-9 * abs(f(a))


# -- Monte Carlo oracles ----------------------------------------------------------

def simulated_mean_variance(scenario, sweep, trials, seed):
    from crowdspoof.harness.config import ExperimentSpec
    from crowdspoof.harness.runner import run_experiment
    rows = run_experiment(ExperimentSpec(scenario, "d2ps", {"fa": [0.001], **sweep}, trials, seed),
                          sky12())
    return {tuple(r.params.items()): r.mean_stat for r in rows}


@pytest.mark.slow
def test_h0_prediction_matches_noise_free_simulation():
    from crowdspoof.scenario import NoiseConfig, ScenarioConfig
    cfg = ScenarioConfig(roi=RoiBounds.square(100.0), n_receivers=200,
                         noise=NoiseConfig(sigma_rho=0.0))
    (emp,) = simulated_mean_variance(cfg, {}, 100, 21).values()
    assert emp == pytest.approx(variance_h0(100, 100, sky12()).sigma2, rel=0.05)


def test_h1_prediction_with_epoch_averaging():
    from crowdspoof.scenario import ScenarioConfig, SpooferConfig
    cfg = ScenarioConfig(n_receivers=30, epochs=5, spoofer=SpooferConfig(spoofed_fraction=1.0))
    (emp,) = simulated_mean_variance(cfg, {}, 300, 22).values()
    assert emp == pytest.approx(variance_h1(5.0, 5).sigma2, rel=0.10)


@pytest.mark.slow
def test_partial_satellite_prediction_at_nine_of_twelve():
    from crowdspoof.scenario import ScenarioConfig, SpooferConfig
    cfg = ScenarioConfig(roi=RoiBounds.square(100.0), n_receivers=50,
                         spoofer=SpooferConfig(spoofed_fraction=1.0, spoofed_satellite_count=9))
    (emp,) = simulated_mean_variance(cfg, {}, 300, 23).values()
    auth = variance_h0(100, 100, sky12()).sigma2 + 100.0
    pred = variance_partial_sats(9, 12, auth, 5.0).sigma2
    assert emp == pytest.approx(pred, rel=0.15)
