"""Non-negative stochastic test objectives with exact gradients.

Every objective is a finite-sum loss f(x) = mean_i f_i(x) with f_i >= 0.
A problem bundles a mini-batch loss/gradient oracle, deterministic batch
sampling that is a pure function of (seed, step), and analytic metadata
(smoothness constants, optima, per-batch minima) consumed by the theory
and verification layers.

Least-squares style problems use the per-sample convention
f_i(x) = (1/2)(a_i^T x - b_i)^2, so the full-batch loss is
(1/(2n))||Ax - b||^2 and L = lambda_max(A^T A), L_j = (A^T A)_jj are
smoothness upper bounds valid for every batch, not just the full one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

KIND_LEAST_SQUARES = "least_squares"
KIND_RIDGE = "ridge_quadratic"
KIND_ROSENBROCK = "rosenbrock"
KIND_MULTIMODAL = "multimodal_1d"
KIND_POLYNOMIAL = "polynomial_1d"
KIND_REGRESSION = "linear_regression_data"

PROBLEM_KINDS = (
    KIND_LEAST_SQUARES,
    KIND_RIDGE,
    KIND_ROSENBROCK,
    KIND_MULTIMODAL,
    KIND_POLYNOMIAL,
    KIND_REGRESSION,
)


@dataclass(frozen=True, eq=False)
class ObjectiveMetadata:
    """Analytic facts about an objective; None where no closed form exists.

    L is a global smoothness constant (lambda_max(A^T A) for quadratics),
    L_coord the per-coordinate constants (diag(A^T A)), mu the smallest
    positive eigenvalue of A^T A when the objective satisfies a PL-type
    inequality, and C_poly the growth constant C with
    C (1 + p(x)^2) >= x p(x) p'(x) for the scaled polynomial objective.
    """

    L: Optional[float] = None
    L_coord: Optional[np.ndarray] = None
    f_star: Optional[float] = None
    x_star: Optional[np.ndarray] = None
    mu: Optional[float] = None
    C_poly: Optional[float] = None


@dataclass(frozen=True, eq=False)
class Batch:
    """Indices of the samples participating in one stochastic evaluation."""

    indices: np.ndarray

    @property
    def size(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True, eq=False)
class StepSample:
    """One oracle evaluation: loss value, gradient vector, batch identity."""

    loss: float
    grad: np.ndarray
    batch: Batch


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative problem descriptor, picklable and cheap to rebuild from.

    Fields not meaningful for a kind are ignored by it. `coeffs` are the
    ascending coefficients of p(x) for the polynomial objective, `scale`
    its leading constant L in f(x) = L x^2 (1 + p(x)^2), `r` the ridge
    shift, `interpolating` requests b in range(A) for generated least
    squares, and `data_path` points at a CSV whose last column is the
    regression target.
    """

    kind: str
    dim: int = 1
    n_samples: Optional[int] = None
    seed: int = 0
    r: float = 0.0
    coeffs: tuple = (0.0, 1.0)
    scale: float = 1.0
    data_path: Optional[str] = None
    interpolating: bool = False
    x0: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}; expected one of {PROBLEM_KINDS}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.n_samples is not None and self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")


@dataclass(frozen=True, eq=False)
class StochasticObjective:
    """A finite-sum objective with a batched loss/gradient oracle.

    `_loss_grad(x, indices)` returns the mean loss and gradient over the
    indexed samples. `_batch_min(indices)`, when available, returns the
    exact minimum of that batch loss (least-squares subproblems).
    """

    kind: str
    dim: int
    n_samples: int
    metadata: ObjectiveMetadata
    x0_default: np.ndarray
    _loss_grad: Callable[[np.ndarray, np.ndarray], tuple]
    _batch_min: Optional[Callable[[np.ndarray], float]] = None
    poly_scale: Optional[float] = None

    def full_batch(self) -> Batch:
        return Batch(np.arange(self.n_samples))


def evaluate(problem: StochasticObjective, x: np.ndarray, batch: Batch) -> StepSample:
    """Evaluate the batch loss and gradient at x.

    Raises ValueError on shape mismatch or non-finite coordinates; the run
    loop is expected to detect divergence before the iterate degenerates.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"x has shape {x.shape}, problem dimension is {problem.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input coordinates")
    loss, grad = problem._loss_grad(x, batch.indices)
    return StepSample(float(loss), grad, batch)


def sample_batch(problem: StochasticObjective, seed: int, step: int, batch_size: int) -> Batch:
    """Draw a without-replacement batch as a pure function of (seed, step).

    Uses a Philox stream keyed by (seed, step) and a partial Fisher-Yates
    shuffle, so the batch sequence is identical across platforms and
    processes. A full-batch request returns all indices in ascending order
    without consuming randomness.
    """
    n = problem.n_samples
    if not 1 <= batch_size <= n:
        raise ValueError(f"batch_size {batch_size} out of range [1, {n}]")
    if seed < 0 or step < 0:
        raise ValueError("seed and step must be >= 0")
    if batch_size == n:
        return Batch(np.arange(n))
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, step], dtype=np.uint64)))
    idx = np.arange(n)
    for i in range(batch_size):
        j = i + int(rng.integers(n - i))
        idx[i], idx[j] = idx[j], idx[i]
    return Batch(np.sort(idx[:batch_size]))


def finite_diff_grad(problem: StochasticObjective, x: np.ndarray, batch: Batch, h: float) -> np.ndarray:
    """Central-difference gradient (f(x+h e_j) - f(x-h e_j)) / (2h)."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        fp, _ = problem._loss_grad(xp, batch.indices)
        fm, _ = problem._loss_grad(xm, batch.indices)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise ValueError("non-finite intermediate values in finite differences")
        grad[j] = (fp - fm) / (2.0 * h)
    return grad


def _spd_eigvals(H: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh((H + H.T) / 2.0)


def _least_squares_objective(kind: str, A: np.ndarray, b: np.ndarray,
                             x0: Optional[np.ndarray] = None) -> StochasticObjective:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch between A {A.shape} and b {b.shape}")
    n, d = A.shape
    AtA = A.T @ A
    evals = _spd_eigvals(AtA)
    L = float(evals[-1])
    L_coord = np.diag(AtA).copy()
    x_star = np.linalg.lstsq(A, b, rcond=None)[0]
    resid = A @ x_star - b
    f_star = float(resid @ resid) / (2.0 * n)
    pos = evals[evals > 1e-12 * max(L, 1.0)]
    mu = float(pos[0]) if pos.size else None

    def loss_grad(x, idx):
        r = A[idx] @ x - b[idx]
        m = idx.size
        loss = float(np.sum(r * r)) / (2.0 * m)
        grad = A[idx].T @ r / m
        return loss, grad

    def batch_min(idx):
        sol = np.linalg.lstsq(A[idx], b[idx], rcond=None)[0]
        r = A[idx] @ sol - b[idx]
        return float(np.sum(r * r)) / (2.0 * idx.size)

    meta = ObjectiveMetadata(L=L, L_coord=L_coord, f_star=f_star, x_star=x_star, mu=mu)
    if x0 is None:
        x0 = np.zeros(d)
    return StochasticObjective(kind, d, n, meta, np.asarray(x0, dtype=float), loss_grad, batch_min)


def least_squares_problem(A: np.ndarray, b: np.ndarray,
                          x0: Optional[np.ndarray] = None) -> StochasticObjective:
    """Least squares from explicit data: f_i(x) = (1/2)(a_i^T x - b_i)^2."""
    return _least_squares_objective(KIND_LEAST_SQUARES, A, b, x0)


def _build_least_squares(spec: ProblemSpec) -> StochasticObjective:
    d = spec.dim
    n = spec.n_samples if spec.n_samples is not None else 2 * d
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((n, d))
    if spec.interpolating:
        x_true = rng.standard_normal(d)
        b = A @ x_true
    else:
        b = rng.standard_normal(n)
    x0 = None if spec.x0 is None else np.asarray(spec.x0, dtype=float)
    return _least_squares_objective(KIND_LEAST_SQUARES, A, b, x0)


def _build_ridge(spec: ProblemSpec) -> StochasticObjective:
    """f(x) = mean_i (1/2)((A + rI)x - y)_i^2 with A, y standard normal."""
    d = spec.dim
    rng = np.random.default_rng(spec.seed)
    A = rng.standard_normal((d, d))
    y = rng.standard_normal(d)
    M = A + spec.r * np.eye(d)
    x0 = None if spec.x0 is None else np.asarray(spec.x0, dtype=float)
    return _least_squares_objective(KIND_RIDGE, M, y, x0)


def _build_rosenbrock(spec: ProblemSpec) -> StochasticObjective:
    def loss_grad(x, idx):
        a, b = x[0], x[1]
        gap = b - a * a
        loss = (a - 1.0) ** 2 + 100.0 * gap * gap
        grad = np.array([2.0 * (a - 1.0) - 400.0 * a * gap, 200.0 * gap])
        return loss, grad

    meta = ObjectiveMetadata(f_star=0.0, x_star=np.array([1.0, 1.0]))
    x0 = np.array([-1.2, 1.0]) if spec.x0 is None else np.asarray(spec.x0, dtype=float)
    return StochasticObjective(KIND_ROSENBROCK, 2, 1, meta, x0, loss_grad)


def _build_multimodal(spec: ProblemSpec) -> StochasticObjective:
    """f(x) = (sin(1+cos(-pi+x)) - 0.2x)^2 + (sin(1+cos(pi-x)) + 0.2x)^4.

    Many sharp suboptimal local minima, one flat global minimum f(0) = 0.
    """

    def loss_grad(x, idx):
        t = x[0]
        u1 = 1.0 + np.cos(-np.pi + t)
        u2 = 1.0 + np.cos(np.pi - t)
        t1 = np.sin(u1) - 0.2 * t
        t2 = np.sin(u2) + 0.2 * t
        loss = t1 * t1 + t2 ** 4
        dt1 = np.cos(u1) * (-np.sin(-np.pi + t)) - 0.2
        dt2 = np.cos(u2) * np.sin(np.pi - t) + 0.2
        g = 2.0 * t1 * dt1 + 4.0 * t2 ** 3 * dt2
        return float(loss), np.array([g])

    meta = ObjectiveMetadata(f_star=0.0, x_star=np.array([0.0]))
    x0 = np.array([10.0]) if spec.x0 is None else np.asarray(spec.x0, dtype=float)
    return StochasticObjective(KIND_MULTIMODAL, 1, 1, meta, x0, loss_grad)


def _poly_growth_constant(p: np.polynomial.Polynomial) -> float:
    """Smallest C with C(1 + p(x)^2) >= x p(x) p'(x), up to grid resolution.

    The ratio tends to deg(p) as |x| -> inf; interior maxima are scanned on
    a dense symmetric grid. Exact (C = deg p) whenever the grid never
    exceeds the limit, e.g. p(x) = x gives C = 1.
    """
    deg = int(p.degree()) if any(c != 0.0 for c in p.coef[1:]) else 0
    if deg == 0:
        return 0.0
    dp = p.deriv()
    xs = np.concatenate([np.linspace(-1e4, 1e4, 400001), np.linspace(-100.0, 100.0, 400001)])
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = xs * p(xs) * dp(xs) / (1.0 + p(xs) ** 2)
    ratio = ratio[np.isfinite(ratio)]
    return float(max(0.0, float(np.max(ratio)), float(deg)))


def _build_polynomial(spec: ProblemSpec) -> StochasticObjective:
    """f(x) = L x^2 (1 + p(x)^2) with L = spec.scale and p from spec.coeffs."""
    L = float(spec.scale)
    if L <= 0.0:
        raise ValueError("polynomial scale must be positive")
    p = np.polynomial.Polynomial(np.asarray(spec.coeffs, dtype=float))
    dp = p.deriv()
    C = _poly_growth_constant(p)

    def loss_grad(x, idx):
        t = x[0]
        pv = p(t)
        loss = L * t * t * (1.0 + pv * pv)
        g = 2.0 * L * t * (1.0 + pv * pv + t * pv * dp(t))
        return float(loss), np.array([g])

    meta = ObjectiveMetadata(f_star=0.0, x_star=np.array([0.0]), C_poly=C)
    x0 = np.array([3.0]) if spec.x0 is None else np.asarray(spec.x0, dtype=float)
    return StochasticObjective(KIND_POLYNOMIAL, 1, 1, meta, x0, loss_grad, poly_scale=L)


def _load_regression_csv(path: str) -> tuple:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"empty regression CSV {path!r}")
    start = 0
    try:
        [float(c) for c in lines[0].split(",")]
    except ValueError:
        start = 1  # header row
    for ln in lines[start:]:
        cells = ln.split(",")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ValueError(f"malformed row in {path!r}: {ln!r}") from exc
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError("regression CSV needs at least one feature column plus a target column")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("regression CSV rows have inconsistent column counts")
    return data[:, :-1], data[:, -1]


def _build_regression(spec: ProblemSpec) -> StochasticObjective:
    """Linear regression data: CSV when given, else a seeded synthetic
    442 x 10 Gaussian regression. Features standardized to zero mean and
    unit variance; the last CSV column is the target."""
    if spec.data_path is not None:
        X, y = _load_regression_csv(spec.data_path)
    else:
        rng = np.random.default_rng(spec.seed)
        X = rng.standard_normal((442, 10))
        w = rng.standard_normal(10)
        y = X @ w + 0.5 * rng.standard_normal(442)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    A = (X - mean) / std
    x0 = None if spec.x0 is None else np.asarray(spec.x0, dtype=float)
    return _least_squares_objective(KIND_REGRESSION, A, y, x0)


_BUILDERS = {
    KIND_LEAST_SQUARES: _build_least_squares,
    KIND_RIDGE: _build_ridge,
    KIND_ROSENBROCK: _build_rosenbrock,
    KIND_MULTIMODAL: _build_multimodal,
    KIND_POLYNOMIAL: _build_polynomial,
    KIND_REGRESSION: _build_regression,
}


def build_problem(spec: ProblemSpec) -> StochasticObjective:
    """Construct the objective described by spec (deterministic given seed)."""
    return _BUILDERS[spec.kind](spec)
