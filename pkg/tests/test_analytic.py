import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import integrate, stats

from sparse_ula import analytic
from sparse_ula.analytic import (AnalyticScenario, TwoLobeModel, collision_prob_collocated,
                                 collision_prob_exact, collision_prob_gap,
                                 collision_prob_numeric, crossover_thresholds, fit_residual,
                                 fit_two_lobe, lobe_collision_prob, band_edge_g_main,
                                 per_lobe_prob, rate_cdf_binomial, rate_cdf_gaussian,
                                 rate_cdf_jumps, rate_cdf_sup_distance, two_lobe_gain)
from sparse_ula.array import ArrayConfig, beam_gain
from sparse_ula.errors import ParameterError

deg = math.radians
REFERENCE_MODEL = TwoLobeModel(1.6, band_edge_g_main(32), 5e-3)


def mc_collision(eta, M, alpha, theta_max, n=400_000, seed=0):
    """Brute-force pair sampling: the fraction of pairs inside any lobe band."""
    g = np.random.default_rng(seed)
    s = math.sin(theta_max)
    x = g.uniform(-s, s, size=(2, n))
    d = x[0] - x[1]
    t = alpha / (M * eta)
    centres = 2 * np.arange(-math.floor(eta), math.floor(eta) + 1) / eta
    hit = np.any(np.abs(d[:, None] - centres) < t, axis=1)
    return hit.mean(), math.sqrt(hit.mean() * (1 - hit.mean()) / n)


# -- model and fit ----------------------------------------------------------

def test_model_validation():
    with pytest.raises(ParameterError):
        TwoLobeModel(2.5, 0.5, 0.01)
    with pytest.raises(ParameterError):
        TwoLobeModel(1.6, 0.5, 0.6)
    with pytest.raises(ParameterError):
        TwoLobeModel(1.6, 0.0, 0.0)
    with pytest.raises(ParameterError):
        AnalyticScenario(0, ArrayConfig(8), 0.1, 10)


def test_band_edge_g_main_is_pattern_at_band_edge():
    for M in (8, 16, 32):
        assert band_edge_g_main(M) == pytest.approx(beam_gain(ArrayConfig(M, 2), 0.8 / (2 * M)))


def test_two_lobe_gain_levels():
    arr = ArrayConfig(32, 4)
    t = REFERENCE_MODEL.half_width(arr)
    g = two_lobe_gain(REFERENCE_MODEL, arr, np.array([0.0, 0.99 * t, 1.01 * t, 0.5, 0.5 + 1.01 * t]))
    np.testing.assert_allclose(g, [REFERENCE_MODEL.g_main] * 2 + [5e-3, REFERENCE_MODEL.g_main, 5e-3])


@pytest.mark.parametrize("eta", [1.0, 4.0])
def test_fit_reproduces_reported_values(eta):
    model = fit_two_lobe(ArrayConfig(32, eta))
    assert 1.35 <= model.alpha <= 1.85
    assert 2.5e-3 <= model.g_side <= 1e-2
    assert model.g_main == band_edge_g_main(32)


def test_fit_residual_and_grid_guard():
    arr = ArrayConfig(16, 2)
    model = fit_two_lobe(arr)
    r = fit_residual(model, arr)
    assert r >= 0
    # the fitted alpha beats nearby alternatives on the dB objective it minimizes
    assert fit_residual(TwoLobeModel(0.2, model.g_main, model.g_side), arr) > 0
    with pytest.raises(ParameterError):
        fit_two_lobe(arr, grid_points=100)


# -- collision probability --------------------------------------------------

def test_collocated_matches_general_formula_at_eta_one():
    for tm in np.linspace(deg(1), deg(89), 50):
        assert analytic._collision_prob_general(1.0, 32, 1.6, tm) == pytest.approx(
            collision_prob_collocated(32, 1.6, tm), abs=1e-14)


def test_tiny_spread_always_collides():
    assert lobe_collision_prob(4, 32, 1.6, deg(0.01)) == 1.0
    assert collision_prob_collocated(32, 1.6, deg(0.01)) == 1.0


@pytest.mark.parametrize("eta,M,tm", [(1, 32, 10), (4, 32, 10), (2.5, 16, 40), (8, 16, 7.4375)])
def test_exact_sum_against_pair_sampling(eta, M, tm):
    p, se = mc_collision(eta, M, 1.6, deg(tm))
    assert collision_prob_exact(eta, M, 1.6, deg(tm)) == pytest.approx(p, abs=5 * se)


@given(st.sampled_from([1.0, 1.5, 2.0, 4.0, 5.5, 8.0]), st.sampled_from([8, 16, 32]),
       st.floats(1.0, 80.0), st.floats(0.5, 2.0))
def test_exact_sum_equals_numeric_integral(eta, M, tm_deg, alpha):
    exact = collision_prob_exact(eta, M, alpha, deg(tm_deg))
    numeric = collision_prob_numeric(eta, M, alpha, deg(tm_deg))
    assert exact == pytest.approx(numeric, abs=1e-6)


@given(st.sampled_from([2.0, 4.0, 5.5, 8.0]), st.sampled_from([16, 32]), st.floats(2.0, 60.0))
def test_closed_form_exact_away_from_straddles(eta, M, tm_deg):
    alpha = 1.6
    frac_dist = abs(eta * math.sin(deg(tm_deg)) - round(eta * math.sin(deg(tm_deg))))
    assume(frac_dist > alpha / (2 * M) + 1e-9)
    assert lobe_collision_prob(eta, M, alpha, deg(tm_deg)) == pytest.approx(
        collision_prob_exact(eta, M, alpha, deg(tm_deg)), abs=1e-12)


def test_numeric_with_nonuniform_density():
    eta, M, alpha, tm = 3.0, 16, 1.6, deg(30)
    s, t = math.sin(tm), alpha / (M * eta)

    def pdf(x):
        return (s - np.abs(x)) / s ** 2

    centres = 2 * np.arange(-3, 4) / eta
    ref = sum(integrate.dblquad(lambda y, x: pdf(x) * pdf(y), -s, s,
                                lambda x, c=c: min(s, max(-s, x + c - t)),
                                lambda x, c=c: min(s, max(-s, x + c + t)),
                                epsabs=1e-11)[0]
              for c in centres)
    assert collision_prob_numeric(eta, M, alpha, tm, pdf) == pytest.approx(ref, abs=1e-6)


def test_numeric_rejects_unnormalized_pdf():
    with pytest.raises(ParameterError):
        collision_prob_numeric(2, 16, 1.6, deg(10), pdf=lambda x: np.ones_like(x))


def test_per_lobe_index_checked():
    with pytest.raises(ParameterError):
        per_lobe_prob(5, 4.0, 32, 1.6, deg(10))
    assert per_lobe_prob(4, 4.0, 32, 1.6, deg(10)) == 0.0


# -- crossover ----------------------------------------------------------------

def test_crossover_worked_example():
    th = crossover_thresholds(5.5, 16, 1.6)
    assert 0.4 <= math.degrees(th.theta_lower) <= 0.6
    assert 76 <= math.degrees(th.theta_upper) <= 78


def test_crossover_requires_sparse():
    with pytest.raises(ParameterError):
        crossover_thresholds(1.0, 16, 1.6)
    with pytest.raises(ParameterError):
        collision_prob_gap(1.0, 16, 1.6, 0.1)


GUARD_DEG = 2.0


@given(st.sampled_from([(5.5, 16), (4.0, 32), (2.0, 16), (8.0, 32), (3.3, 8)]),
       st.floats(0.0, 1.0))
def test_gap_sign_pattern(case, u):
    eta, M = case
    alpha = 1.6
    th = crossover_thresholds(eta, M, alpha)
    lo, hi = th.theta_lower, th.theta_upper
    # below the lower threshold both arrays always collide
    t0 = lo * (0.05 + 0.9 * u)
    assert collision_prob_gap(eta, M, alpha, t0) == 0.0
    # inside, away from the upper end where flooring shifts the sign change, sparse wins
    top = hi - deg(GUARD_DEG)
    if top > lo:
        t1 = lo + (top - lo) * (0.001 + 0.998 * u)
        assert collision_prob_gap(eta, M, alpha, t1) > 0
    # above the upper threshold the collocated array wins
    if hi < math.pi / 2 - 1e-9:
        t2 = hi + (math.pi / 2 - hi) * (0.001 + 0.999 * u)
        assert collision_prob_gap(eta, M, alpha, t2) <= 0


def test_sign_change_close_to_upper_threshold():
    th = crossover_thresholds(5.5, 16, 1.6)
    grid = np.linspace(th.theta_lower + 1e-4, math.pi / 2, 20000)
    gap = np.array([collision_prob_gap(5.5, 16, 1.6, t) for t in grid])
    first_neg = grid[np.argmax(gap <= 0)]
    assert abs(math.degrees(first_neg - th.theta_upper)) <= GUARD_DEG


# -- rate distribution ----------------------------------------------------------

def scenario(K, eta=4.0, M=32, tm=10, snr_db=20):
    return AnalyticScenario(K, ArrayConfig(M, eta), deg(tm), 10 ** (snr_db / 10))


@given(st.integers(0, 60), st.one_of(st.just(0.0), st.floats(1e-12, 1)))
def test_binomial_pmf_against_scipy(n, p):
    np.testing.assert_allclose(analytic.binomial_pmf(n, p), stats.binom.pmf(np.arange(n + 1), n, p),
                               atol=1e-13)


def enumeration_cdf(sc, model, p, rates):
    """Sum over every hit/miss pattern of the K-1 interferers."""
    n = sc.K - 1
    out = np.zeros_like(rates)
    for bits in itertools.product((0, 1), repeat=n):
        h = sum(bits)
        prob = p ** h * (1 - p) ** (n - h)
        rho = h * model.g_main + (n - h) * model.g_side
        r = math.log2(1 + 1 / (rho + 1 / (sc.snr * sc.array.M)))
        out += prob * (r <= rates)
    return out


@pytest.mark.parametrize("K", [1, 2, 4, 6])
@pytest.mark.parametrize("p", [0.0, 0.07, 0.5, 1.0])
def test_binomial_cdf_against_enumeration(K, p):
    sc = scenario(K)
    # include the jump rates themselves, where the atom must be counted
    rates = np.sort(np.concatenate([np.linspace(0.01, 12, 50), rate_cdf_jumps(sc, REFERENCE_MODEL)]))
    np.testing.assert_allclose(rate_cdf_binomial(sc, REFERENCE_MODEL, rates, p),
                               enumeration_cdf(sc, REFERENCE_MODEL, p, rates), atol=1e-12)


def test_binomial_cdf_limits_and_monotone():
    sc = scenario(18)
    r = np.linspace(0, 15, 400)
    F = rate_cdf_binomial(sc, REFERENCE_MODEL, r)
    assert F[0] == 0.0 and F[-1] == 1.0
    assert np.all(np.diff(F) >= 0)
    assert rate_cdf_binomial(sc, REFERENCE_MODEL, 0.0) == 0.0


def test_jumps_are_where_binomial_steps():
    sc = scenario(6)
    jumps = rate_cdf_jumps(sc, REFERENCE_MODEL)
    F = rate_cdf_binomial(sc, REFERENCE_MODEL, np.concatenate([jumps * (1 - 1e-6), jumps]))
    below, at = F[:len(jumps)], F[len(jumps):]
    assert np.all(at - below > 0)
    # right-continuous: the value at the jump equals the limit from above
    np.testing.assert_array_equal(at, rate_cdf_binomial(sc, REFERENCE_MODEL, jumps * (1 + 1e-6)))
    np.testing.assert_array_equal(rate_cdf_binomial(sc, REFERENCE_MODEL, jumps, strict=True), below)


def test_gaussian_cdf_shape():
    sc = scenario(40)
    r = np.linspace(0.01, 12, 300)
    F = rate_cdf_gaussian(sc, REFERENCE_MODEL, r)
    # the normal tail below zero interference keeps the top short of 1
    assert np.all(np.diff(F) >= -1e-15) and F[0] < 1e-6 and 0.9 < F[-1] <= 1
    with pytest.raises(ParameterError):
        rate_cdf_gaussian(scenario(1), REFERENCE_MODEL, 1.0)
    # zero variance degenerates to a step at the mean interference level
    step = rate_cdf_gaussian(sc, REFERENCE_MODEL, r, p=0.0)
    assert set(np.unique(step)) <= {0.0, 0.5, 1.0}


@pytest.mark.parametrize("K", [18, 40, 88])
def test_sup_distance_bounds_dense_grid(K):
    sc = scenario(K)
    r = np.linspace(1e-3, 12, 200_001)
    grid = np.max(np.abs(rate_cdf_binomial(sc, REFERENCE_MODEL, r) - rate_cdf_gaussian(sc, REFERENCE_MODEL, r)))
    exact = rate_cdf_sup_distance(sc, REFERENCE_MODEL)
    assert grid <= exact + 1e-12
    assert exact - grid < 5e-3
