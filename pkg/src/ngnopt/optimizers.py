"""NGN step-size rules and update rules, plus SGDM and Adam baselines.

The scalar NGN step size is

    gamma = c / (1 + (c / (2 f_S(x))) ||g||^2)
          = 2 c f_S(x) / (2 f_S(x) + c ||g||^2),

computed in the second, division-safe form; it returns c when ||g||^2 = 0
(including the 0/0 corner f_S = 0, g = 0). Momentum uses the heavy-ball
form x' = x - (1-beta) gamma g + beta (x - x_prev), whose iterate-moving-
average twin is exercised by the verification layer. Diagonal variants
rescale either the squared gradient norm (V1) or the per-coordinate c
(V2) by an RMSprop-style preconditioner D = eps + sqrt(vhat).

Step functions are pure: given (state, sample, spec) they return a new
state and a report, never mutating their inputs. Squared gradient norms
are accumulated with np.sum(g*g), never BLAS dot, so that the documented
reduction identities (beta=0, D=I, lambda=0 collapses) hold bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .problems import StepSample

NGN = "ngn"
NGN_M_V1 = "ngn_m_v1"
NGN_M_V2 = "ngn_m_v2"
NGN_D = "ngn_d"
NGN_MD_V1 = "ngn_md_v1"
NGN_MD_V2 = "ngn_md_v2"
DEC_NGN_MDV1 = "dec_ngn_mdv1"
NGN_MDV1W = "ngn_mdv1w"
SGDM = "sgdm"
ADAM = "adam"

OPTIMIZER_KINDS = (
    NGN, NGN_M_V1, NGN_M_V2, NGN_D, NGN_MD_V1, NGN_MD_V2,
    DEC_NGN_MDV1, NGN_MDV1W, SGDM, ADAM,
)

SCHEDULE_CONSTANT = "constant"
SCHEDULE_INV_SQRT_K = "inv_sqrt_k"
SCHEDULE_INV_SQRT_STEP = "inv_sqrt_step"

SCHEDULES = (SCHEDULE_CONSTANT, SCHEDULE_INV_SQRT_K, SCHEDULE_INV_SQRT_STEP)


@dataclass(frozen=True, eq=False)
class OptimizerSpec:
    """Hyperparameters for one optimizer instance.

    beta1 is the momentum weight (beta in the heavy-ball updates), beta2
    the second-moment decay, wd_lambda the weight-decay strength for the
    decoupled/coupled variants. c_coord supplies per-coordinate c_j for
    NGN-D; precond_identity forces D = I in the diagonal variants (used
    by the reduction audits); ngn_d_precond switches NGN-D to the
    preconditioner-assisted c_j = c / D_j mode. total_steps is the
    horizon K required by the inv_sqrt_k schedule.
    """

    kind: str
    c: float
    beta1: float = 0.0
    beta2: float = 0.999
    eps: float = 1e-8
    wd_lambda: float = 0.0
    schedule: str = SCHEDULE_CONSTANT
    total_steps: Optional[int] = None
    c_coord: Optional[np.ndarray] = None
    precond_identity: bool = False
    ngn_d_precond: bool = False

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer kind {self.kind!r}; expected one of {OPTIMIZER_KINDS}")
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise ValueError("c must be positive and finite")
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError("beta1 must lie in [0, 1)")
        if not 0.0 <= self.beta2 < 1.0:
            raise ValueError("beta2 must lie in [0, 1)")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.wd_lambda < 0.0:
            raise ValueError("wd_lambda must be >= 0")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; expected one of {SCHEDULES}")
        if self.schedule == SCHEDULE_INV_SQRT_K and self.total_steps is None:
            raise ValueError("inv_sqrt_k schedule requires total_steps")
        if self.c_coord is not None:
            cc = np.asarray(self.c_coord, dtype=float)
            if cc.ndim != 1 or not np.all(np.isfinite(cc)) or not np.all(cc > 0.0):
                raise ValueError("c_coord must be a 1-D vector of positive finite values")
            object.__setattr__(self, "c_coord", cc)


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """Iterate, previous iterate, second-moment buffer, momentum buffer,
    and the 0-based step counter k."""

    x: np.ndarray
    x_prev: np.ndarray
    v: np.ndarray
    m: np.ndarray
    k: int


@dataclass(frozen=True, eq=False)
class StepReport:
    """Per-step diagnostics: the scalar step size (NaN for purely
    per-coordinate rules), statistics of the per-coordinate effective
    step sizes, the update norm, and the full per-coordinate step-size
    vector for coordinate-level audits."""

    gamma_scalar: float
    gamma_coord_min: float
    gamma_coord_max: float
    gamma_coord_mean: float
    update_norm: float
    gamma_coord: Optional[np.ndarray] = None
    c_coord_used: Optional[np.ndarray] = None


def init_state(x0: np.ndarray) -> OptimizerState:
    x0 = np.asarray(x0, dtype=float)
    return OptimizerState(x0.copy(), x0.copy(), np.zeros_like(x0), np.zeros_like(x0), 0)


def _sq_norm(g: np.ndarray) -> float:
    return float(np.sum(g * g))


def _weighted_sq_norm(g: np.ndarray, d: np.ndarray) -> float:
    """||g||^2_{D^-1} = sum_j g_j^2 / d_j."""
    return float(np.sum(g * g / d))


def ngn_gamma(c, loss, grad_sq):
    """gamma = 2 c loss / (2 loss + c grad_sq); c when grad_sq = 0.

    Accepts scalars or arrays (per-coordinate c_j and g_j^2 broadcast
    against a scalar loss). Always lies in [0, c], is non-increasing in
    grad_sq, and non-decreasing in loss.
    """
    if np.ndim(c) == 0 and np.ndim(grad_sq) == 0:
        c = float(c)
        loss = float(loss)
        gs = float(grad_sq)
        if not (math.isfinite(c) and math.isfinite(loss) and math.isfinite(gs)):
            raise ValueError("non-finite inputs to ngn_gamma")
        if c <= 0.0 or loss < 0.0 or gs < 0.0:
            raise ValueError("ngn_gamma requires c > 0, loss >= 0, grad_sq >= 0")
        if gs == 0.0:
            return c
        # the quotient can land one ulp above c when c*gs underflows
        # against 2*loss in the denominator; the cap is a hard contract
        return min(c, 2.0 * c * loss / (2.0 * loss + c * gs))
    c = np.asarray(c, dtype=float)
    gs = np.asarray(grad_sq, dtype=float)
    loss = float(loss)
    if not (np.all(np.isfinite(c)) and math.isfinite(loss) and np.all(np.isfinite(gs))):
        raise ValueError("non-finite inputs to ngn_gamma")
    if np.any(c <= 0.0) or loss < 0.0 or np.any(gs < 0.0):
        raise ValueError("ngn_gamma requires c > 0, loss >= 0, grad_sq >= 0")
    denom = 2.0 * loss + c * gs
    safe = np.where(denom > 0.0, denom, 1.0)
    return np.where(gs == 0.0, c, np.minimum(c, 2.0 * c * loss / safe))


def precond_update(v: np.ndarray, grad: np.ndarray, beta2: float, k: int, eps: float):
    """RMSprop-style second-moment update with bias correction.

    v' = beta2 v + (1 - beta2) g*g, D = eps + sqrt(v' / (1 - beta2^(k+1)))
    with k the 0-based step index, so the corrector is well defined from
    the first step on.
    """
    v_new = beta2 * v + (1.0 - beta2) * grad * grad
    bias = 1.0 - beta2 ** (k + 1)
    d = eps + np.sqrt(v_new / bias)
    return v_new, d


def schedule_c(schedule: str, c0: float, k: int, total_steps: Optional[int] = None) -> float:
    """Step-size hyperparameter at step k: c0, c0/sqrt(K), or c0/sqrt(k+1)."""
    if schedule == SCHEDULE_CONSTANT:
        return c0
    if schedule == SCHEDULE_INV_SQRT_K:
        if total_steps is None or total_steps < 1:
            raise ValueError("inv_sqrt_k schedule requires a positive total_steps")
        return c0 / math.sqrt(total_steps)
    if schedule == SCHEDULE_INV_SQRT_STEP:
        return c0 / math.sqrt(k + 1)
    raise ValueError(f"unknown schedule {schedule!r}")


def _scalar_report(gamma: float, x_new: np.ndarray, x: np.ndarray) -> StepReport:
    upd = x_new - x
    return StepReport(gamma, gamma, gamma, gamma, math.sqrt(_sq_norm(upd)))


def _coord_report(gamma_scalar: float, coord: np.ndarray, x_new: np.ndarray, x: np.ndarray,
                  c_coord_used: Optional[np.ndarray] = None) -> StepReport:
    upd = x_new - x
    return StepReport(
        gamma_scalar,
        float(np.min(coord)),
        float(np.max(coord)),
        float(np.mean(coord)),
        math.sqrt(_sq_norm(upd)),
        gamma_coord=coord,
        c_coord_used=c_coord_used,
    )


def _advance(state: OptimizerState, x_new: np.ndarray, **extra) -> OptimizerState:
    return replace(state, x=x_new, x_prev=state.x, k=state.k + 1, **extra)


def step_ngn(state: OptimizerState, sample: StepSample, spec: OptimizerSpec):
    """x' = x - gamma g with the scalar NGN step size."""
    c_k = schedule_c(spec.schedule, spec.c, state.k, spec.total_steps)
    g = sample.grad
    gamma = ngn_gamma(c_k, sample.loss, _sq_norm(g))
    x_new = state.x - gamma * g
    return _advance(state, x_new), _scalar_report(gamma, x_new, state.x)


def step_ngn_m(state: OptimizerState, sample: StepSample, spec: OptimizerSpec):
    """Momentum variants of NGN.

    V1 (heavy ball): gamma from the raw gradient,
        x' = x - (1-beta) gamma g + beta (x - x_prev).
    V2 (averaged direction): m' = beta m + (1-beta) g, gamma from m',
        x' = x - gamma m'. The buffer is used without bias correction.
    """
    c_k = schedule_c(spec.schedule, spec.c, state.k, spec.total_steps)
    g = sample.grad
    beta = spec.beta1
    if spec.kind == NGN_M_V1:
        gamma = ngn_gamma(c_k, sample.loss, _sq_norm(g))
        update = gamma * g
        x_new = state.x - (1.0 - beta) * update + beta * (state.x - state.x_prev)
        return _advance(state, x_new), _scalar_report(gamma, x_new, state.x)
    m_new = beta * state.m + (1.0 - beta) * g
    gamma = ngn_gamma(c_k, sample.loss, _sq_norm(m_new))
    x_new = state.x - gamma * m_new
    return _advance(state, x_new, m=m_new), _scalar_report(gamma, x_new, state.x)


def step_ngn_d(state: OptimizerState, sample: StepSample, spec: OptimizerSpec):
    """Per-coordinate NGN: gamma_j = ngn_gamma(c_j, f_S, g_j^2), x'_j = x_j - gamma_j g_j.

    c_j comes from spec.c_coord (rescaled by the schedule factor c_k/c),
    from the preconditioner as c / D_j when ngn_d_precond is set, or from
    broadcasting the scalar c.
    """
    c_k = schedule_c(spec.schedule, spec.c, state.k, spec.total_steps)
    g = sample.grad
    v_new = state.v
    if spec.ngn_d_precond:
        v_new, d = precond_update(state.v, g, spec.beta2, state.k, spec.eps)
        c_vec = c_k / d
    elif spec.c_coord is not None:
        if spec.c_coord.shape != g.shape:
            raise ValueError(f"c_coord has shape {spec.c_coord.shape}, gradient has {g.shape}")
        c_vec = spec.c_coord * (c_k / spec.c)
    else:
        c_vec = np.full_like(g, c_k)
    gamma = ngn_gamma(c_vec, sample.loss, g * g)
    x_new = state.x - gamma * g
    report = _coord_report(float("nan"), gamma, x_new, state.x, c_coord_used=np.asarray(c_vec, dtype=float))
    return _advance(state, x_new, v=v_new), report


def step_ngn_md(state: OptimizerState, sample: StepSample, spec: OptimizerSpec):
    """Diagonally preconditioned NGN with heavy-ball momentum.

    After D = eps + sqrt(vhat) (or D = I when precond_identity):
    V1: gamma = ngn_gamma(c, f_S, ||g||^2_{D^-1}), Sigma^-1 g = gamma D^-1 g.
    V2: gamma_j = ngn_gamma(c / D_j, f_S, g_j^2),  Sigma^-1 g = gamma_j g_j.
    Then x' = x - (1-beta1) Sigma^-1 g + beta1 (x - x_prev).
    """
    c_k = schedule_c(spec.schedule, spec.c, state.k, spec.total_steps)
    g = sample.grad
    beta1 = spec.beta1
    v_new, d = precond_update(state.v, g, spec.beta2, state.k, spec.eps)
    if spec.precond_identity:
        d = np.ones_like(g)
    if spec.kind == NGN_MD_V1:
        gamma = ngn_gamma(c_k, sample.loss, _weighted_sq_norm(g, d))
        sigma_inv_g = gamma * (g / d)
        x_new = state.x - (1.0 - beta1) * sigma_inv_g + beta1 * (state.x - state.x_prev)
        return _advance(state, x_new, v=v_new), _coord_report(gamma, gamma / d, x_new, state.x)
    c_vec = c_k / d
    gamma = ngn_gamma(c_vec, sample.loss, g * g)
    sigma_inv_g = gamma * g
    x_new = state.x - (1.0 - beta1) * sigma_inv_g + beta1 * (state.x - state.x_prev)
    report = _coord_report(float("nan"), gamma, x_new, state.x, c_coord_used=c_vec)
    return _advance(state, x_new, v=v_new), report


def step_ngn_md_wd(state: OptimizerState, sample: StepSample, spec: OptimizerSpec):
    """Weight-decay variants of the V1 diagonal rule (lambda = wd_lambda).

    Decoupled: x' = x - lambda c x - (1-beta1) gamma D^-1 g + beta1 (x - x_prev)
    with gamma exactly as in V1.

    Coupled: gamma = (c/(1+lambda c)) [2 f_S - c lambda g.x]_+ /
                     (2 f_S + (c/(1+lambda c)) ||g||^2_{D^-1}),
             x' = x/(1+lambda c) - (1-beta1) gamma D^-1 g + beta1 (x - x_prev),
    the division-safe form of the damped step size; when the whole
    denominator vanishes (f_S = 0 and g = 0) it returns c/(1+lambda c).
    Both reduce bit-exactly to the V1 rule at lambda = 0.
    """
    c_k = schedule_c(spec.schedule, spec.c, state.k, spec.total_steps)
    g = sample.grad
    beta1 = spec.beta1
    lam = spec.wd_lambda
    v_new, d = precond_update(state.v, g, spec.beta2, state.k, spec.eps)
    if spec.precond_identity:
        d = np.ones_like(g)
    if spec.kind == DEC_NGN_MDV1:
        gamma = ngn_gamma(c_k, sample.loss, _weighted_sq_norm(g, d))
        sigma_inv_g = gamma * (g / d)
        x_new = (state.x - (lam * c_k) * state.x
                 - (1.0 - beta1) * sigma_inv_g + beta1 * (state.x - state.x_prev))
        return _advance(state, x_new, v=v_new), _coord_report(gamma, gamma / d, x_new, state.x)
    one_plus = 1.0 + lam * c_k
    c_eff = c_k / one_plus
    gdsq = _weighted_sq_norm(g, d)
    gx = float(np.sum(g * state.x))
    denom = 2.0 * sample.loss + c_eff * gdsq
    if lam == 0.0:
        # route through the V1 step size so the collapse is bit-exact,
        # including its cap clamp
        gamma = ngn_gamma(c_k, sample.loss, gdsq)
    elif denom == 0.0:
        gamma = c_eff
    else:
        gamma = c_eff * max(0.0, 2.0 * sample.loss - (c_k * lam) * gx) / denom
    sigma_inv_g = gamma * (g / d)
    x_new = state.x / one_plus - (1.0 - beta1) * sigma_inv_g + beta1 * (state.x - state.x_prev)
    return _advance(state, x_new, v=v_new), _coord_report(gamma, gamma / d, x_new, state.x)


def step_baseline(state: OptimizerState, sample: StepSample, spec: OptimizerSpec):
    """SGDM as undampened heavy ball, x' = x - c g + beta (x - x_prev)
    (the buffer form m' = beta m + g, x' = x - c m'), and bias-corrected
    Adam."""
    c_k = schedule_c(spec.schedule, spec.c, state.k, spec.total_steps)
    g = sample.grad
    if spec.kind == SGDM:
        beta = spec.beta1
        x_new = state.x - c_k * g + beta * (state.x - state.x_prev)
        return _advance(state, x_new), _scalar_report(c_k, x_new, state.x)
    m_new = spec.beta1 * state.m + (1.0 - spec.beta1) * g
    v_new = spec.beta2 * state.v + (1.0 - spec.beta2) * g * g
    mhat = m_new / (1.0 - spec.beta1 ** (state.k + 1))
    vhat = v_new / (1.0 - spec.beta2 ** (state.k + 1))
    denom = np.sqrt(vhat) + spec.eps
    x_new = state.x - c_k * mhat / denom
    coord = c_k / denom
    return _advance(state, x_new, v=v_new, m=m_new), _coord_report(c_k, coord, x_new, state.x)


_STEP_FNS = {
    NGN: step_ngn,
    NGN_M_V1: step_ngn_m,
    NGN_M_V2: step_ngn_m,
    NGN_D: step_ngn_d,
    NGN_MD_V1: step_ngn_md,
    NGN_MD_V2: step_ngn_md,
    DEC_NGN_MDV1: step_ngn_md_wd,
    NGN_MDV1W: step_ngn_md_wd,
    SGDM: step_baseline,
    ADAM: step_baseline,
}


def apply_step(state: OptimizerState, sample: StepSample, spec: OptimizerSpec):
    """Dispatch one update; returns (new_state, StepReport)."""
    return _STEP_FNS[spec.kind](state, sample, spec)
