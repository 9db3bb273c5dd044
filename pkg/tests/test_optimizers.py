import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ngnopt
from ngnopt import (
    OptimizerSpec,
    ProblemSpec,
    StepSample,
    apply_step,
    build_problem,
    evaluate,
    init_state,
    ngn_gamma,
    precond_update,
    schedule_c,
)
from ngnopt.problems import Batch

DUMMY_BATCH = Batch(np.array([0]))


def make_sample(loss, grad):
    return StepSample(float(loss), np.asarray(grad, dtype=float), DUMMY_BATCH)


# --- the step-size formula ----------------------------------------------------

def test_ngn_gamma_reference_value():
    # c=1, f=2, ||g||^2=4: gamma = 2*1*2 / (2*2 + 1*4) = 0.5
    assert ngn_gamma(1.0, 2.0, 4.0) == pytest.approx(0.5)


def test_ngn_gamma_zero_gradient_returns_c():
    assert ngn_gamma(0.7, 3.0, 0.0) == 0.7
    assert ngn_gamma(0.7, 0.0, 0.0) == 0.7  # 0/0 case is division-safe


def test_ngn_gamma_zero_loss_positive_gradient():
    assert ngn_gamma(1.0, 0.0, 4.0) == 0.0


def test_ngn_gamma_vector_matches_scalar():
    c = np.array([0.5, 1.0, 2.0])
    gs = np.array([0.0, 4.0, 1.0])
    out = ngn_gamma(c, 2.0, gs)
    expected = [ngn_gamma(ci, 2.0, gi) for ci, gi in zip(c, gs)]
    assert np.allclose(out, expected, rtol=0, atol=0)
    assert out[0] == 0.5


def test_ngn_gamma_rejects_invalid():
    with pytest.raises(ValueError):
        ngn_gamma(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ngn_gamma(1.0, -0.1, 1.0)
    with pytest.raises(ValueError):
        ngn_gamma(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        ngn_gamma(1.0, math.inf, 1.0)
    with pytest.raises(ValueError):
        ngn_gamma(np.array([1.0, -1.0]), 1.0, np.array([1.0, 1.0]))


@settings(max_examples=200, deadline=None)
@given(c=st.floats(1e-8, 1e8), loss=st.floats(0.0, 1e12),
       gs=st.floats(0.0, 1e12))
def test_ngn_gamma_always_in_unit_interval_of_c(c, loss, gs):
    g = ngn_gamma(c, loss, gs)
    assert 0.0 <= g <= c


def test_ngn_gamma_cap_holds_when_denominator_rounds_down():
    # with a tiny gradient the rounded quotient can land one ulp above
    # the cap unless it is clamped; these inputs used to do exactly that
    c = 26843546.410672996
    loss = 5.0
    gs = 3.0964001530201247e-200
    assert ngn_gamma(c, loss, gs) <= c
    vec = ngn_gamma(np.full(2, c), loss, np.full(2, gs))
    assert np.all(vec <= c)


@settings(max_examples=100, deadline=None)
@given(c=st.floats(1e-6, 1e6), loss=st.floats(1e-12, 1e12),
       gs=st.floats(0.0, 1e12), factor=st.floats(1.0 + 1e-9, 1e6))
def test_ngn_gamma_monotone_in_gradient(c, loss, gs, factor):
    assert ngn_gamma(c, loss, gs * factor) <= ngn_gamma(c, loss, gs)


def test_ngn_gamma_smoothness_lower_bound():
    # with ||g||^2 <= 2 L f, gamma >= c/(1+cL)
    c, L = 1.7, 3.0
    for f in (1e-8, 0.5, 10.0, 1e6):
        gs = 2.0 * L * f
        assert ngn_gamma(c, f, gs) >= c / (1.0 + c * L) * (1 - 1e-12)


# --- schedules and preconditioner ----------------------------------------------

def test_schedules():
    assert schedule_c("constant", 2.0, 99) == 2.0
    assert schedule_c("inv_sqrt_k", 2.0, 5, total_steps=100) == pytest.approx(0.2)
    assert schedule_c("inv_sqrt_step", 2.0, 3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        schedule_c("inv_sqrt_k", 2.0, 5)
    with pytest.raises(ValueError):
        schedule_c("nope", 2.0, 5)


def test_precond_update_bias_correction():
    v0 = np.zeros(2)
    g = np.array([3.0, 4.0])
    beta2 = 0.9
    v1, d = precond_update(v0, g, beta2, k=0, eps=1e-8)
    # at k=0 the corrector (1 - beta2) cancels the (1 - beta2) weight
    assert np.allclose(v1, 0.1 * g * g)
    assert np.allclose(d, 1e-8 + np.abs(g))


# --- spec validation ------------------------------------------------------------

def test_optimizer_spec_validation():
    with pytest.raises(ValueError):
        OptimizerSpec(kind="nope", c=1.0)
    with pytest.raises(ValueError):
        OptimizerSpec(kind="ngn", c=0.0)
    with pytest.raises(ValueError):
        OptimizerSpec(kind="ngn", c=1.0, beta1=1.0)
    with pytest.raises(ValueError):
        OptimizerSpec(kind="ngn", c=1.0, schedule="inv_sqrt_k")
    with pytest.raises(ValueError):
        OptimizerSpec(kind="ngn_d", c=1.0, c_coord=np.array([1.0, -1.0]))


# --- one-step oracles, hand computed --------------------------------------------

def test_ngn_step_oracle():
    spec = OptimizerSpec(kind="ngn", c=1.0)
    state = init_state(np.array([1.0, 0.0]))
    sample = make_sample(2.0, [2.0, 0.0])
    new, rep = apply_step(state, sample, spec)
    # gamma = 2*1*2/(4+4) = 0.5; x' = (1,0) - 0.5*(2,0) = (0,0)
    assert rep.gamma_scalar == pytest.approx(0.5)
    assert np.allclose(new.x, [0.0, 0.0])
    assert np.array_equal(new.x_prev, state.x)
    assert new.k == 1


def test_ngn_m_v1_step_oracle():
    beta = 0.5
    spec = OptimizerSpec(kind="ngn_m_v1", c=1.0, beta1=beta)
    state = init_state(np.array([1.0]))
    state = ngnopt.OptimizerState(np.array([1.0]), np.array([2.0]),
                                  np.zeros(1), np.zeros(1), 1)
    sample = make_sample(2.0, [2.0])
    new, rep = apply_step(state, sample, spec)
    # gamma = 0.5; x' = 1 - 0.5*0.5*2 + 0.5*(1-2) = 1 - 0.5 - 0.5 = 0
    assert new.x[0] == pytest.approx(0.0)
    assert rep.gamma_scalar == pytest.approx(0.5)


def test_ngn_m_v2_step_oracle():
    beta = 0.5
    spec = OptimizerSpec(kind="ngn_m_v2", c=1.0, beta1=beta)
    state = init_state(np.array([1.0]))
    sample = make_sample(2.0, [2.0])
    new, _ = apply_step(state, sample, spec)
    # m' = 0.5*0 + 0.5*2 = 1; gamma = 2*2/(4+1) = 0.8; x' = 1 - 0.8*1 = 0.2
    assert new.x[0] == pytest.approx(0.2)
    assert np.allclose(new.m, [1.0])


def test_ngn_d_step_oracle():
    spec = OptimizerSpec(kind="ngn_d", c=1.0)
    state = init_state(np.array([0.0, 0.0]))
    sample = make_sample(2.0, [2.0, 0.0])
    new, rep = apply_step(state, sample, spec)
    # gamma_0 = 2*2/(4+4) = 0.5; gamma_1 = c = 1 (zero gradient coordinate)
    assert np.allclose(rep.gamma_coord, [0.5, 1.0])
    assert np.allclose(new.x, [-1.0, 0.0])
    assert rep.gamma_coord_min == 0.5
    assert rep.gamma_coord_max == 1.0


def test_ngn_d_c_coord_oracle():
    spec = OptimizerSpec(kind="ngn_d", c=1.0, c_coord=np.array([1.0, 2.0]))
    state = init_state(np.zeros(2))
    sample = make_sample(2.0, [2.0, 2.0])
    _, rep = apply_step(state, sample, spec)
    # gamma_j = 2 c_j f / (2f + c_j g_j^2): [4/8, 8/12]
    assert np.allclose(rep.gamma_coord, [0.5, 2.0 / 3.0])
    assert np.allclose(rep.c_coord_used, [1.0, 2.0])


def test_ngn_d_c_coord_shape_mismatch():
    spec = OptimizerSpec(kind="ngn_d", c=1.0, c_coord=np.array([1.0, 2.0, 3.0]))
    state = init_state(np.zeros(2))
    with pytest.raises(ValueError, match="shape"):
        apply_step(state, make_sample(1.0, [1.0, 1.0]), spec)


def test_ngn_md_v1_step_oracle():
    # identity preconditioner: reduces to the scalar heavy-ball rule
    spec = OptimizerSpec(kind="ngn_md_v1", c=1.0, beta1=0.0, precond_identity=True)
    state = init_state(np.array([1.0, 0.0]))
    sample = make_sample(2.0, [2.0, 0.0])
    new, rep = apply_step(state, sample, spec)
    assert rep.gamma_scalar == pytest.approx(0.5)
    assert np.allclose(new.x, [0.0, 0.0])


def test_ngn_md_v1_with_real_preconditioner():
    spec = OptimizerSpec(kind="ngn_md_v1", c=1.0, beta1=0.0, beta2=0.9, eps=1e-8)
    state = init_state(np.array([0.0]))
    g = 2.0
    sample = make_sample(2.0, [g])
    new, rep = apply_step(state, sample, spec)
    d = 1e-8 + abs(g)  # bias-corrected at k=0
    wsq = g * g / d
    gamma = 2.0 * 1.0 * 2.0 / (2.0 * 2.0 + 1.0 * wsq)
    assert rep.gamma_scalar == pytest.approx(gamma, rel=1e-12)
    assert new.x[0] == pytest.approx(-gamma * g / d, rel=1e-12)


def test_ngn_md_v2_step_oracle():
    spec = OptimizerSpec(kind="ngn_md_v2", c=1.0, beta1=0.0, precond_identity=True)
    state = init_state(np.zeros(2))
    sample = make_sample(2.0, [2.0, 0.0])
    new, rep = apply_step(state, sample, spec)
    assert np.allclose(rep.gamma_coord, [0.5, 1.0])
    assert np.allclose(new.x, [-1.0, 0.0])


def test_dec_ngn_mdv1_shrinks_weights():
    lam = 0.1
    spec = OptimizerSpec(kind="dec_ngn_mdv1", c=1.0, beta1=0.0, wd_lambda=lam,
                         precond_identity=True)
    state = init_state(np.array([2.0]))
    sample = make_sample(0.0, [0.0])  # zero gradient: pure decay step
    new, _ = apply_step(state, sample, spec)
    # x' = x - lam*c*x - 0 = 0.9 * 2
    assert new.x[0] == pytest.approx(1.8)


def test_ngn_mdv1w_zero_lambda_equals_plain():
    spec_w = OptimizerSpec(kind="ngn_mdv1w", c=1.0, beta1=0.3, wd_lambda=0.0)
    spec_p = OptimizerSpec(kind="ngn_md_v1", c=1.0, beta1=0.3)
    state = init_state(np.array([1.0, -2.0]))
    sample = make_sample(2.0, [2.0, 1.0])
    new_w, _ = apply_step(state, sample, spec_w)
    new_p, _ = apply_step(state, sample, spec_p)
    assert np.array_equal(new_w.x, new_p.x)


def test_ngn_mdv1w_negative_bracket_zeroes_gradient_term():
    # 2f - c lam g.x = 25 - 2*1*25 < 0 at x=5, f=12.5, g=5
    lam, c, beta = 1.0, 2.0, 0.25
    spec = OptimizerSpec(kind="ngn_mdv1w", c=c, beta1=beta, wd_lambda=lam,
                         precond_identity=True)
    x = np.array([5.0])
    state = init_state(x)
    sample = make_sample(12.5, [5.0])
    new, rep = apply_step(state, sample, spec)
    # gamma = 0: the update is the pure shrink x/(1 + lam c)
    assert rep.gamma_scalar == 0.0
    assert new.x[0] == pytest.approx(5.0 / 3.0, rel=1e-15)


def test_ngn_mdv1w_division_safe_at_origin():
    spec = OptimizerSpec(kind="ngn_mdv1w", c=2.0, beta1=0.0, wd_lambda=0.5,
                         precond_identity=True)
    state = init_state(np.array([0.0]))
    sample = make_sample(0.0, [0.0])
    new, rep = apply_step(state, sample, spec)
    assert rep.gamma_scalar == pytest.approx(2.0 / (1.0 + 0.5 * 2.0))
    assert new.x[0] == 0.0


def test_sgdm_is_undampened_heavy_ball():
    spec = OptimizerSpec(kind="sgdm", c=0.1, beta1=0.9)
    state = ngnopt.OptimizerState(np.array([1.0]), np.array([0.5]),
                                  np.zeros(1), np.zeros(1), 3)
    sample = make_sample(1.0, [2.0])
    new, rep = apply_step(state, sample, spec)
    # x' = 1 - 0.1*2 + 0.9*(1 - 0.5) = 1.25
    assert new.x[0] == pytest.approx(1.25)
    assert rep.gamma_scalar == pytest.approx(0.1)


def test_sgdm_equals_buffer_form():
    # x' = x - c m' with m' = beta m + g matches the two-point recursion
    p = build_problem(ProblemSpec(kind="least_squares", dim=3, n_samples=6, seed=0))
    c, beta = 1e-3, 0.9
    spec = OptimizerSpec(kind="sgdm", c=c, beta1=beta)
    state = init_state(p.x0_default)
    x = p.x0_default.copy()
    m = np.zeros_like(x)
    batch = p.full_batch()
    for _ in range(25):
        s = evaluate(p, state.x, batch)
        state, _ = apply_step(state, s, spec)
        s2 = evaluate(p, x, batch)
        m = beta * m + s2.grad
        x = x - c * m
        assert np.allclose(state.x, x, rtol=1e-12, atol=1e-14)


def test_adam_matches_reference_implementation():
    p = build_problem(ProblemSpec(kind="least_squares", dim=3, n_samples=6, seed=2))
    c, b1, b2, eps = 0.05, 0.9, 0.999, 1e-8
    spec = OptimizerSpec(kind="adam", c=c, beta1=b1, beta2=b2, eps=eps)
    state = init_state(p.x0_default)
    x = p.x0_default.copy()
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    batch = p.full_batch()
    for k in range(30):
        s = evaluate(p, state.x, batch)
        state, _ = apply_step(state, s, spec)
        s2 = evaluate(p, x, batch)
        m = b1 * m + (1 - b1) * s2.grad
        v = b2 * v + (1 - b2) * s2.grad ** 2
        mhat = m / (1 - b1 ** (k + 1))
        vhat = v / (1 - b2 ** (k + 1))
        x = x - c * mhat / (np.sqrt(vhat) + eps)
        assert np.allclose(state.x, x, rtol=1e-12, atol=1e-15)


# --- step-size schedule threading ----------------------------------------------

def test_inv_sqrt_step_schedule_threads_through_steps():
    p = build_problem(ProblemSpec(kind="least_squares", dim=2, n_samples=4, seed=0))
    spec = OptimizerSpec(kind="ngn", c=1.0, schedule="inv_sqrt_step")
    state = init_state(np.array([5.0, -3.0]))
    batch = p.full_batch()
    for k in range(5):
        s = evaluate(p, state.x, batch)
        c_k = 1.0 / math.sqrt(k + 1)
        expected = ngn_gamma(c_k, s.loss, float(np.sum(s.grad * s.grad)))
        state, rep = apply_step(state, s, spec)
        assert rep.gamma_scalar == pytest.approx(expected, rel=1e-15)


# --- gamma stays within [c/(1+cL), c] on smooth runs -----------------------------

@pytest.mark.parametrize("kind", ["ngn", "ngn_m_v1"])
def test_scalar_gamma_bounds_on_quadratic(kind):
    p = build_problem(ProblemSpec(kind="least_squares", dim=10, n_samples=20, seed=4))
    L = p.metadata.L
    c = 0.5
    spec = OptimizerSpec(kind=kind, c=c, beta1=0.7 if kind == "ngn_m_v1" else 0.0)
    state = init_state(p.x0_default + 1.0)
    batch = p.full_batch()
    lo = c / (1.0 + c * L)
    for _ in range(200):
        s = evaluate(p, state.x, batch)
        state, rep = apply_step(state, s, spec)
        assert lo - 1e-12 * c <= rep.gamma_scalar <= c + 1e-12 * c
