import math

import numpy as np
import pytest

from ngnopt import (
    ProblemSpec,
    TheoryInputs,
    build_problem,
    decaying_weights,
    estimate_sigmas,
    gammahat_range,
    least_squares_problem,
    ngn_d_bound,
    ngn_m_bound,
    ngn_m_bound_decaying,
    ngn_m_params,
)


# --- NGN-M constants --------------------------------------------------------

def test_ngn_m_params_unit_case():
    rho, lam, beta = ngn_m_params(1.0, 1.0)
    assert rho == pytest.approx(1.0 / 6.0)
    assert lam == pytest.approx(1.0 / 12.0)
    assert beta == pytest.approx(1.0 / 13.0)


def test_ngn_m_params_small_c_lambda_branch():
    # with cL < 0.5/((1+cL)(1+2cL)) the cap is cL itself
    c, L = 0.1, 1.0
    rho, lam, beta = ngn_m_params(c, L)
    assert rho == pytest.approx(c / (1.1 * 1.2))
    assert lam == pytest.approx(0.1)
    assert beta == pytest.approx(0.1 / 1.1)


def test_ngn_m_params_validation():
    with pytest.raises(ValueError):
        ngn_m_params(0.0, 1.0)
    with pytest.raises(ValueError):
        ngn_m_params(1.0, -1.0)


# --- fixed step-size bound ----------------------------------------------------

def test_ngn_m_bound_noiseless_pinned():
    t = TheoryInputs(c=1.0, L=1.0, K=100, dist0_sq=1.0)
    # dist0^2 (1+2cL)^2 / (cK) = 9/100
    assert ngn_m_bound(t) == pytest.approx(0.09)


def test_ngn_m_bound_with_noise_terms():
    t = TheoryInputs(c=1.0, L=1.0, K=100, dist0_sq=1.0,
                     sigma_int_sq=0.5, sigma_pos_sq=0.25)
    # + 8cL(1+2cL)^2 sigma_int^2 = 8*9*0.5 = 36
    # + 2cL max(2cL-1, 0) sigma_pos^2 = 2*1*0.25 = 0.5
    assert ngn_m_bound(t) == pytest.approx(0.09 + 36.0 + 0.5)


def test_ngn_m_bound_small_c_drops_positive_part():
    t = TheoryInputs(c=0.25, L=1.0, K=100, dist0_sq=1.0, sigma_pos_sq=10.0)
    # 2cL - 1 = -0.5 <= 0: the sigma_pos term vanishes
    base = 1.0 * (1.5 ** 2) / (0.25 * 100)
    assert ngn_m_bound(t) == pytest.approx(base)


def test_ngn_m_bound_requires_K():
    with pytest.raises(ValueError):
        ngn_m_bound(TheoryInputs(c=1.0, L=1.0, dist0_sq=1.0))


# --- decaying step-size bound ---------------------------------------------------

def test_ngn_m_bound_decaying_noiseless_pinned():
    # 5 (1+c0L)(1+2c0L) dist0^2 / (4 c0 sqrt(K)) = 5*2*3/(4*10) = 0.75
    assert ngn_m_bound_decaying(1.0, 1.0, 100, 1.0) == pytest.approx(0.75)


def test_ngn_m_bound_decaying_with_noise_terms():
    lg = math.log(102.0)
    expected = (0.75
                + 10.0 * 1.0 * 1.0 * 2.0 * 3.0 * 0.5 * lg / 10.0
                + 5.0 * 1.0 * 1.0 * 2.0 * (lg / 20.0) * 1.0 * 0.25)
    got = ngn_m_bound_decaying(1.0, 1.0, 100, 1.0,
                               sigma_int_sq=0.5, sigma_pos_sq=0.25)
    assert got == pytest.approx(expected, rel=1e-12)


def test_ngn_m_bound_decaying_small_c_drops_positive_part():
    expected = 5.0 * 1.4 * 1.8 * 2.0 / (4.0 * 0.4 * 8.0)
    got = ngn_m_bound_decaying(0.4, 1.0, 64, 2.0, sigma_pos_sq=5.0)
    assert got == pytest.approx(expected, rel=1e-12)


def test_ngn_m_bound_decaying_validation():
    with pytest.raises(ValueError):
        ngn_m_bound_decaying(0.0, 1.0, 10, 1.0)
    with pytest.raises(ValueError):
        ngn_m_bound_decaying(1.0, 1.0, 0, 1.0)


def test_decaying_weights_normalized():
    w = decaying_weights(1.0, 1.0, 50)
    assert w.shape == (50,)
    assert np.all(w > 0)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-12)
    # rho(c) peaks at c = 1/sqrt(2); past k=0 every c_k sits below the
    # peak, so the weights decay from there on
    assert np.all(np.diff(w[1:]) < 0)


def test_decaying_weights_hand_check():
    # K=3, c0=1, L=1: c_k = 1/sqrt(k+1); rho_k = c_k/((1+c_k)(1+2c_k))
    cs = np.array([1.0, 1.0 / math.sqrt(2.0), 1.0 / math.sqrt(3.0)])
    rho = cs / ((1.0 + cs) * (1.0 + 2.0 * cs))
    expected = rho / rho.sum()
    assert np.allclose(decaying_weights(1.0, 1.0, 3), expected, rtol=1e-14)


# --- diagonal-rule bounds ---------------------------------------------------------

def test_ngn_d_bound_nonconvex_hand_value():
    c_coord = np.array([0.2, 0.1])
    L_coord = np.array([1.0, 2.0])
    sigma = np.array([0.3, 0.4])
    t = TheoryInputs(K=100, f0_gap=2.0, c_coord=c_coord, L_coord=L_coord,
                     sigma_coord=sigma)
    c_min = 0.1
    noise = (18.0 * 1.0 * 0.04 * 0.09 + 18.0 * 2.0 * 0.01 * 0.16) / c_min
    expected = 12.0 * 2.0 / (c_min * 100) + noise
    assert ngn_d_bound(t, "nonconvex") == pytest.approx(expected, rel=1e-12)


def test_ngn_d_bound_rejects_large_steps():
    t = TheoryInputs(K=10, f0_gap=1.0, c_coord=np.array([0.6]),
                     L_coord=np.array([1.0]), sigma_coord=np.array([0.0]))
    with pytest.raises(ValueError):
        ngn_d_bound(t, "nonconvex")  # needs c_j <= 1/(2 L_j) = 0.5


def test_ngn_d_bound_pl_hand_value():
    c_coord = np.array([0.2])
    L_coord = np.array([1.0])
    sigma = np.array([0.5])
    t = TheoryInputs(K=10, f0_gap=4.0, mu=1.0, c_coord=c_coord,
                     L_coord=L_coord, sigma_coord=sigma)
    rate = (1.0 - 1.0 * 0.2 / 6.0) ** 10
    noise = (9.0 / (1.0 * 0.2)) * (1.0 * 0.04 * 0.25)
    assert ngn_d_bound(t, "pl") == pytest.approx(rate * 4.0 + noise, rel=1e-12)


def test_ngn_d_bound_pl_step_cap_includes_mu():
    # c_j <= min{1/(2L_j), 6/mu}; mu = 100 makes 6/mu = 0.06 the binding cap
    t = TheoryInputs(K=10, f0_gap=1.0, mu=100.0, c_coord=np.array([0.1]),
                     L_coord=np.array([1.0]), sigma_coord=np.array([0.0]))
    with pytest.raises(ValueError):
        ngn_d_bound(t, "pl")


def test_ngn_d_bound_requires_fields():
    with pytest.raises(ValueError):
        ngn_d_bound(TheoryInputs(K=10, f0_gap=1.0), "nonconvex")
    t = TheoryInputs(K=10, f0_gap=1.0, c_coord=np.array([0.1]),
                     L_coord=np.array([1.0]), sigma_coord=np.array([0.0]))
    with pytest.raises(ValueError):
        ngn_d_bound(t, "pl")  # pl needs mu
    with pytest.raises(ValueError):
        ngn_d_bound(t, "other")


# --- effective step-size ratio window ----------------------------------------------

def test_gammahat_range_pinned():
    lo, hi, thresh = gammahat_range(1.0)
    assert lo == pytest.approx(0.25)
    assert hi == pytest.approx(2.0)
    assert thresh == pytest.approx(0.36)


def test_gammahat_range_zero_growth():
    lo, hi, thresh = gammahat_range(0.0)
    assert lo == pytest.approx(0.5)
    assert hi == pytest.approx(2.0)
    assert thresh == pytest.approx(1.0 / 9.0)


def test_gammahat_range_validation():
    with pytest.raises(ValueError):
        gammahat_range(-0.5)


# --- noise estimation ----------------------------------------------------------------

def test_estimate_sigmas_exact_enumeration():
    # two samples a=1, b=(1,-1): f*(x)=min over x of mean loss is at x=0
    A = np.array([[1.0], [1.0]])
    b = np.array([1.0, -1.0])
    p = least_squares_problem(A, b)
    x_star = p.metadata.x_star
    assert np.allclose(x_star, [0.0])
    s_int, s_pos = estimate_sigmas(p, batch_size=1)
    # each single-sample loss at x*=0 is 0.5; min over x of each is 0
    assert s_int == pytest.approx(0.5)
    assert s_pos == pytest.approx(0.0, abs=1e-15)


def test_estimate_sigmas_full_batch():
    A = np.array([[1.0], [1.0]])
    b = np.array([1.0, -1.0])
    p = least_squares_problem(A, b)
    s_int, s_pos = estimate_sigmas(p, batch_size=2)
    assert s_int == pytest.approx(0.0, abs=1e-30)
    # full-batch positive part is f(x*) itself = 0.5
    assert s_pos == pytest.approx(0.5)


def test_estimate_sigmas_interpolating_problem_is_noise_free_at_optimum():
    p = build_problem(ProblemSpec(kind="least_squares", dim=3, n_samples=6,
                                  seed=0, interpolating=True))
    s_int, s_pos = estimate_sigmas(p, batch_size=2)
    assert s_int <= 1e-18
    assert s_pos <= 1e-12


def test_estimate_sigmas_monte_carlo_path():
    # n_samples=30, batch_size=15 has C(30,15) > 1e4: exercises sampling
    p = build_problem(ProblemSpec(kind="least_squares", dim=3, n_samples=30, seed=1))
    s_int, s_pos = estimate_sigmas(p, batch_size=15, n_mc=200, seed=0)
    assert s_int >= 0.0
    assert s_pos >= 0.0
    assert math.isfinite(s_int) and math.isfinite(s_pos)


def test_estimate_sigmas_validation():
    p = build_problem(ProblemSpec(kind="least_squares", dim=2, n_samples=4, seed=0))
    with pytest.raises(ValueError):
        estimate_sigmas(p, batch_size=0)
    with pytest.raises(ValueError):
        estimate_sigmas(p, batch_size=5)


# --- input container ----------------------------------------------------------------

def test_theory_inputs_validation():
    with pytest.raises(ValueError):
        TheoryInputs(dist0_sq=-1.0)
    with pytest.raises(ValueError):
        TheoryInputs(sigma_int_sq=-0.1)
    with pytest.raises(ValueError):
        TheoryInputs(sigma_pos_sq=-0.1)
    with pytest.raises(ValueError):
        TheoryInputs(f0_gap=-2.0)
    # missing c/L/K surfaces at evaluation time, not at construction
    with pytest.raises(ValueError):
        ngn_m_bound(TheoryInputs(dist0_sq=1.0))
    with pytest.raises(ValueError):
        ngn_m_bound(TheoryInputs(c=1.0, L=1.0, K=0, dist0_sq=1.0))
