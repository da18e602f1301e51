import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cubfuzz.cub import (
    CLAMP, CubParams, CubShelterParams, FitOptions, cub_pmf, cub_shelter_pmf, fit_cub,
    fit_cub_shelter, loglik, lr_test, pmf_vector, select_model, shelter_pmf_weights,
    shifted_binomial, simulate, std_errors,
)
from cubfuzz.ratings import RatingSample, reverse_sample

from oracles import binom_term_exact, cub_pmf_ref, grid_max_loglik, shelter_pmf_ref
from conftest import WORKED_FREQ


# -- pmf ---------------------------------------------------------------------

def test_binomial_term_exact():
    ref = binom_term_exact(7, Fraction(3, 10), 5)
    assert ref == 15 * Fraction(9, 100) * Fraction(7, 10) ** 4
    assert shifted_binomial(7, 0.3, 5) == pytest.approx(float(ref), rel=1e-14)


@pytest.mark.parametrize("xi,r", [(0.0, 7), (1.0, 1)])
def test_binomial_boundary_mass(xi, r):
    assert shifted_binomial(7, xi, r) == 1.0


@pytest.mark.parametrize("r", [0, 8])
def test_r_out_of_range(r):
    with pytest.raises(ValueError):
        cub_pmf(CubParams(0.5, 0.5), 7, r)


def test_cub_pmf_examples():
    assert all(cub_pmf(CubParams(0.0, 0.4), 7, r) == pytest.approx(1 / 7) for r in range(1, 8))
    assert cub_pmf(CubParams(1.0, 0.0), 7, 7) == 1.0
    exact = Fraction(7, 10) * binom_term_exact(7, Fraction(3, 10), 5) + Fraction(3, 10) / 7
    assert cub_pmf(CubParams(0.7, 0.3), 7, 5) == pytest.approx(float(exact), rel=1e-14)


def test_pmf_matches_scipy_reference():
    for m in (5, 7, 10):
        for pi, xi in [(0.2, 0.1), (0.8, 0.65), (0.5, 0.5)]:
            np.testing.assert_allclose(pmf_vector(CubParams(pi, xi), m), cub_pmf_ref(pi, xi, m), atol=1e-15)
    np.testing.assert_allclose(
        pmf_vector(CubShelterParams(0.8, 0.2, 0.15, 7), 7), shelter_pmf_ref(0.8, 0.2, 0.15, 7, 7), atol=1e-15
    )


def test_shelter_examples():
    base = CubParams(0.6, 0.3)
    for r in range(1, 8):
        assert cub_shelter_pmf(CubShelterParams(0.6, 0.3, 0.0, 2), 7, r) == cub_pmf(base, 7, r)
    assert cub_shelter_pmf(CubShelterParams(0.6, 0.3, 1.0, 2), 7, 2) == 1.0
    p = CubShelterParams(0.8, 0.2, 0.15, 7)
    np.testing.assert_allclose(pmf_vector(p, 7), shelter_pmf_weights(p.pi1, p.pi2, 0.2, 7, 7), atol=1e-12)
    with pytest.raises(ValueError):
        cub_shelter_pmf(CubShelterParams(0.6, 0.3, 0.1, 9), 7, 1)


def test_from_weights_roundtrip():
    p = CubShelterParams(0.8, 0.2, 0.15, 7)
    q = CubShelterParams.from_weights(p.pi1, p.pi2, p.xi, p.c)
    assert q.pi_star == pytest.approx(0.8) and q.delta == pytest.approx(0.15)
    assert p.pi1 + p.pi2 + p.delta == pytest.approx(1.0, abs=1e-15)


# -- log-likelihood ------------------------------------------------------------

def test_loglik_examples(worked_sample):
    p = CubParams(0.7, 0.3)
    one = RatingSample(np.array([5]), 7)
    assert loglik(one, p) == pytest.approx(math.log(cub_pmf(p, 7, 5)))
    many = RatingSample(np.full(9, 3), 7)
    assert loglik(many, p) == pytest.approx(9 * math.log(cub_pmf(p, 7, 3)))
    ref = sum(f * math.log(q) for f, q in zip(WORKED_FREQ, cub_pmf_ref(0.7, 0.3, 7)))
    assert loglik(worked_sample, p) == pytest.approx(ref, rel=1e-13)


def test_loglik_zero_probability_names_category():
    s = RatingSample(np.array([1, 7]), 7)
    with pytest.raises(ValueError, match="category 1"):
        loglik(s, CubParams(1.0, 0.0))


# -- fitting -------------------------------------------------------------------

def test_fit_beats_grid(worked_sample):
    fit = fit_cub(worked_sample)
    assert fit.loglik >= grid_max_loglik(WORKED_FREQ, 7) - 1e-6
    assert fit.bic == pytest.approx(-2 * fit.loglik + 2 * math.log(20))


def test_recovery():
    s = simulate(CubParams(0.8, 0.2), 7, 5000, 1)
    fit = fit_cub(s)
    assert abs(fit.params.pi - 0.8) <= 0.05
    assert abs(fit.params.xi - 0.2) <= 0.02
    assert fit.converged and not fit.boundary


def test_uniform_sample_hits_lower_clamp():
    s = RatingSample.from_freq([10] * 7)
    fit = fit_cub(s)
    assert fit.params.pi == CLAMP
    assert fit.boundary and fit.std_errors == {}
    assert fit.loglik >= grid_max_loglik([10] * 7, 7) - 1e-6


def test_em_monotone_trace():
    s = simulate(CubParams(0.4, 0.7), 7, 300, 3)
    for fit in (fit_cub(s), fit_cub_shelter(s, c=2)):
        assert np.all(np.diff(fit.trace) >= -1e-10)


def test_degenerate_sample():
    s = RatingSample(np.full(30, 4), 7)
    with pytest.raises(ValueError, match="identical"):
        fit_cub(s)
    fit = fit_cub(s, opts=FitOptions(allow_boundary=True))
    assert fit.boundary
    with pytest.raises(ValueError, match="at least 2"):
        fit_cub(RatingSample(np.array([3]), 7))


def test_non_convergence_reported():
    s = simulate(CubParams(0.5, 0.3), 7, 400, 2)
    fit = fit_cub(s, opts=FitOptions(max_iter=2))
    assert not fit.converged and fit.n_iter == 2


def test_reversed_sample_mirrors_fit():
    s = simulate(CubParams(0.6, 0.25), 7, 800, 11)
    a = fit_cub(s, opts=FitOptions(init=(0.5, 0.3)))
    b = fit_cub(reverse_sample(s), opts=FitOptions(init=(0.5, 0.7)))
    assert b.params.xi == pytest.approx(1 - a.params.xi, abs=1e-6)
    assert b.params.pi == pytest.approx(a.params.pi, abs=1e-6)


# -- shelter -------------------------------------------------------------------

def test_shelter_recovery_auto():
    s = simulate(CubShelterParams(0.8, 0.2, 0.2, 7), 7, 5000, 5)
    fit = fit_cub_shelter(s, c="auto")
    assert fit.params.c == 7
    assert abs(fit.params.delta - 0.2) <= 0.05
    assert {"pi_star", "xi", "delta", "pi1", "pi2"} <= set(fit.std_errors)
    assert fit.bic == pytest.approx(-2 * fit.loglik + 3 * math.log(5000))


@pytest.mark.parametrize("seed", range(5))
def test_shelter_on_delta_zero_data(seed):
    s = simulate(CubParams(0.7, 0.3), 7, 5000, seed)
    base = fit_cub(s)
    sh = fit_cub_shelter(s, c="auto")
    assert sh.params.delta <= 0.03
    assert abs(sh.params.pi_star - base.params.pi) <= 0.03
    assert abs(sh.params.xi - base.params.xi) <= 0.03
    # nested: never below the baseline likelihood
    for c in range(1, 8):
        assert fit_cub_shelter(s, c=c).loglik >= base.loglik - 1e-9


def test_shelter_all_mass_at_c():
    s = RatingSample(np.full(50, 6), 7)
    fit = fit_cub_shelter(s, c=6, opts=FitOptions(allow_boundary=True))
    assert fit.params.delta == 1 - CLAMP and fit.boundary


def test_shelter_bad_c(worked_sample):
    with pytest.raises(ValueError, match="outside"):
        fit_cub_shelter(worked_sample, c=8)


# -- LR test -------------------------------------------------------------------

def _fake(ll, n=100):
    from cubfuzz.cub import CubFit
    return CubFit(CubParams(0.5, 0.5), ll, 1, n, 7, True)


def test_lr_test_values():
    assert lr_test(_fake(-100.0), _fake(-100.0)) == (0.0, 1.0)
    stat, p = lr_test(_fake(-100.0), _fake(-100.0 + 3.841 / 2))
    assert p == pytest.approx(0.05, abs=5e-4)
    stat, p = lr_test(_fake(-100.0), _fake(-90.0))
    assert stat == pytest.approx(20.0) and p < 1e-4
    with pytest.raises(ValueError, match="negative"):
        lr_test(_fake(-100.0), _fake(-100.1))
    with pytest.raises(ValueError, match="different size"):
        lr_test(_fake(-1.0, 10), _fake(-1.0, 11), 10)


def test_select_model_keeps_real_shelter():
    s = simulate(CubShelterParams(0.8, 0.2, 0.2, 7), 7, 2000, 4)
    ch = select_model(s, 7, "auto")
    assert ch.retained and ch.chosen is ch.shelter and ch.n_candidates == 7
    assert ch.pi1 == pytest.approx(ch.shelter.params.pi1)
    none = select_model(s, 7, "none")
    assert none.shelter is None and none.chosen is none.base


# -- standard errors -----------------------------------------------------------

def test_se_sqrt_n_scaling():
    s = simulate(CubParams(0.7, 0.3), 7, 500, 6)
    s4 = RatingSample.from_freq(s.freq * 4)
    a, b = fit_cub(s).std_errors, fit_cub(s4).std_errors
    for k in ("pi", "xi"):
        assert b[k] / a[k] == pytest.approx(0.5, rel=0.05)


def test_se_boundary_error():
    s = RatingSample.from_freq([10] * 7)
    with pytest.raises(ValueError):
        std_errors(fit_cub(s), s)


def test_se_against_bootstrap():
    s = simulate(CubParams(0.8, 0.2), 7, 2000, 9)
    fit = fit_cub(s)
    se = fit.std_errors["pi"]
    assert 0.005 <= se <= 0.05
    rng = np.random.default_rng(9)
    p = s.freq / s.n
    boots = [fit_cub(RatingSample.from_freq(rng.multinomial(s.n, p))).params.pi for _ in range(200)]
    boot_se = float(np.std(boots, ddof=1))
    assert 0.005 <= boot_se <= 0.05
    assert se == pytest.approx(boot_se, rel=0.25)


# -- simulation ----------------------------------------------------------------

def test_simulate_examples():
    assert set(simulate(CubParams(1.0, 0.0), 7, 200, 0).ratings) == {7}
    a = simulate(CubParams(0.4, 0.6), 7, 100, 42)
    b = simulate(CubParams(0.4, 0.6), 7, 100, 42)
    np.testing.assert_array_equal(a.ratings, b.ratings)
    with pytest.raises(ValueError):
        simulate(CubParams(0.4, 0.6), 7, 0, 1)


@pytest.mark.parametrize("params", [CubParams(0.3, 0.8), CubShelterParams(0.7, 0.4, 0.25, 2)])
def test_simulate_lln(params):
    s = simulate(params, 7, 100_000, 123)
    assert np.max(np.abs(s.freq / s.n - pmf_vector(params, 7))) <= 0.02


# -- properties ----------------------------------------------------------------

unit = st.floats(0.0, 1.0, allow_nan=False)


@given(unit, unit, st.sampled_from([5, 6, 7, 9, 10, 11]))
def test_prop_normalized_and_reversible(pi, xi, m):
    p = pmf_vector(CubParams(pi, xi), m)
    assert abs(p.sum() - 1) < 1e-12
    q = pmf_vector(CubParams(pi, 1 - xi), m)
    np.testing.assert_allclose(p, q[::-1], atol=1e-14)


@given(unit, unit, st.floats(0.0, 0.999), st.integers(1, 7))
def test_prop_shelter_forms_agree(ps, xi, d, c):
    p = CubShelterParams(ps, xi, d, c)
    a = pmf_vector(p, 7)
    np.testing.assert_allclose(a, shelter_pmf_weights(p.pi1, p.pi2, xi, c, 7), atol=1e-12)
    r = pmf_vector(CubShelterParams(ps, 1 - xi, d, 8 - c), 7)
    np.testing.assert_allclose(a, r[::-1], atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 40), min_size=7, max_size=7).filter(lambda f: sum(1 for x in f if x) >= 2))
def test_prop_em_monotone_and_near_grid(freq):
    s = RatingSample.from_freq(freq)
    fit = fit_cub(s)
    assert np.all(np.diff(fit.trace) >= -1e-10)
    assert fit.loglik >= grid_max_loglik(freq, 7) - 1e-6
