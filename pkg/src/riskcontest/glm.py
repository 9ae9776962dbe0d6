"""Logistic-regression core: IRLS fitting, penalties, CV folds, bootstrap.

All fitting runs through a single grouped-binomial IRLS routine, so row-wise
fits and the pattern-aggregated fits used by the subset enumerator give
bit-compatible results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateOutcomeError,
    StratificationError,
    UnsupportedFitError,
    ValidationError,
)

# Fixed numerical constants; overridable through the fit_* keyword arguments.
MAX_ITER = 100
DEVIANCE_RTOL = 1e-10
SEPARATION_BOUND = 15.0
FALLBACK_RIDGE = 1e-6


def expit(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function 1 / (1 + exp(-z))."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log1pexp(eta: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, eta)


def _grouped_deviance(eta: np.ndarray, trials: np.ndarray, successes: np.ndarray) -> float:
    # -2 * log-likelihood of a binomial logit model, binomial constants omitted.
    return 2.0 * float(np.sum(trials * _log1pexp(eta) - successes * eta))


def log_likelihood(x: np.ndarray, y: np.ndarray, coefficients: np.ndarray) -> float:
    """Bernoulli log-likelihood at `coefficients` (intercept first)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eta = coefficients[0] + x @ coefficients[1:]
    return float(np.sum(y * eta - _log1pexp(eta)))


def log_likelihood_gradient(x: np.ndarray, y: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """Analytic gradient of log_likelihood with respect to all coefficients."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    resid = y - expit(coefficients[0] + x @ coefficients[1:])
    return np.concatenate(([resid.sum()], x.T @ resid))


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty attached to a logistic fit.

    kind is one of "none", "ridge" or "lasso"; lam >= 0 is the penalty weight
    (lam = 0 is equivalent to "none"). The intercept is never penalized unless
    penalize_intercept is set.
    """

    kind: str = "none"
    lam: float = 0.0
    penalize_intercept: bool = False

    def __post_init__(self):
        if self.kind not in ("none", "ridge", "lasso"):
            raise ValidationError(f"unknown penalty kind {self.kind!r}")
        if self.lam < 0:
            raise ValidationError("penalty weight must be non-negative")


NO_PENALTY = PenaltySpec()


@dataclass(frozen=True)
class FitResult:
    """Fitted logistic model.

    coefficients holds the intercept followed by one log odds ratio per
    column of x. std_errors is present only for converged unpenalized fits;
    separation_flag marks fits that were stabilized with a tiny ridge after
    quasi-complete separation or a singular information matrix.
    """

    coefficients: np.ndarray
    std_errors: np.ndarray | None
    deviance: float
    converged: bool
    iterations: int
    separation_flag: bool = False

    @property
    def intercept(self) -> float:
        return float(self.coefficients[0])

    @property
    def slopes(self) -> np.ndarray:
        return self.coefficients[1:]


@dataclass(frozen=True)
class CvPlan:
    """Cross-validation fold assignment: labels 1..n_folds, one per row."""

    n_folds: int
    assignments: np.ndarray
    stratified: bool = True


class _NumericalTrouble(Exception):
    """Internal: separation or singular information detected mid-iteration."""


def _irls(xmat, trials, successes, lam, *, penalize_intercept=False,
          max_iter=MAX_ITER, rtol=DEVIANCE_RTOL, bound=SEPARATION_BOUND,
          guard=True, trace=None):
    """Newton/IRLS with step halving on the ridge-penalized deviance.

    xmat includes the intercept column. With guard=True (unpenalized fits)
    raises _NumericalTrouble as soon as any |coefficient| crosses `bound` or
    the Newton system is singular; the caller then refits with FALLBACK_RIDGE.
    Returns (beta, deviance, converged, iterations).
    """
    m, q = xmat.shape
    total = float(trials.sum())
    hits = float(successes.sum())
    if hits <= 0.0 or hits >= total:
        raise DegenerateOutcomeError("outcome vector contains a single class")

    pen = np.ones(q)
    if not penalize_intercept:
        pen[0] = 0.0

    beta = np.zeros(q)
    ybar = hits / total
    beta[0] = math.log(ybar / (1.0 - ybar))
    eta = xmat @ beta
    dev = _grouped_deviance(eta, trials, successes)
    obj = dev + lam * float(np.sum(pen * beta**2))
    if trace is not None:
        trace.append(dev)

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(eta)
        w = trials * p * (1.0 - p)
        np.clip(w, 1e-10, None, out=w)
        grad = xmat.T @ (successes - trials * p) - lam * pen * beta
        hess = (xmat * w[:, None]).T @ xmat
        if lam:
            hess[np.arange(q), np.arange(q)] += lam * pen
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise _NumericalTrouble("singular information matrix")

        # Step halving: accept the first candidate that does not increase the
        # objective; if even the tiniest step fails we are at the optimum.
        t = 1.0
        accepted = False
        for _ in range(30):
            cand = beta + t * step
            eta_c = xmat @ cand
            dev_c = _grouped_deviance(eta_c, trials, successes)
            obj_c = dev_c + lam * float(np.sum(pen * cand**2))
            if obj_c <= obj * (1.0 + 1e-14) + 1e-14:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = True
            break

        if guard and float(np.max(np.abs(cand))) > bound:
            raise _NumericalTrouble("quasi-complete separation")

        rel = abs(obj - obj_c) / (abs(obj) + 0.1)
        beta, eta, dev, obj = cand, eta_c, dev_c, obj_c
        if trace is not None:
            trace.append(dev)
        if rel < rtol:
            converged = True
            break

    return beta, dev, converged, it


def _fit_grouped(xmat, trials, successes, lam, **kw):
    """IRLS with the separation/collinearity fallback.

    Unpenalized fits that separate (or hit a singular system) are refit with
    a tiny ridge so downstream machinery stays total. Returns
    (beta, deviance, converged, iterations, separated).
    """
    try:
        beta, dev, conv, it = _irls(xmat, trials, successes, lam,
                                    guard=(lam == 0.0), **kw)
        return beta, dev, conv, it, False
    except _NumericalTrouble:
        beta, dev, conv, it = _irls(xmat, trials, successes,
                                    max(lam, FALLBACK_RIDGE), guard=False, **kw)
        return beta, dev, conv, it, True


def fit_logistic(x: np.ndarray, y: np.ndarray, penalty: PenaltySpec = NO_PENALTY, *,
                 max_iter: int = MAX_ITER, rtol: float = DEVIANCE_RTOL,
                 separation_bound: float = SEPARATION_BOUND) -> FitResult:
    """Maximum-likelihood or ridge logistic regression via IRLS.

    Parameters
    ----------
    x : (n, p) binary design matrix, intercept added internally.
    y : length-n binary outcome; must contain both classes.
    penalty : "none" or "ridge". Ridge adds lam * ||slopes||^2 to the
        deviance objective; the intercept stays unpenalized by default.

    Quasi-complete separation (any |coefficient| > separation_bound during
    iteration) and singular Newton systems are handled by refitting with a
    tiny ridge; such fits carry separation_flag = True but still report
    standard errors so Wald machinery stays usable.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValidationError("x must be (n, p) with y of length n")
    n, p = x.shape
    if n <= p:
        raise ValidationError(f"need more rows than columns (n={n}, p={p})")
    if penalty.kind == "lasso":
        raise ValidationError("use fit_lasso_path for lasso penalties")

    lam = penalty.lam if penalty.kind == "ridge" else 0.0
    xmat = np.hstack([np.ones((n, 1)), x])
    trials = np.ones(n)

    beta, dev, conv, it, separated = _fit_grouped(
        xmat, trials, y, lam,
        penalize_intercept=penalty.penalize_intercept,
        max_iter=max_iter, rtol=rtol, bound=separation_bound)

    std = None
    if penalty.kind == "none" and conv:
        prob = expit(xmat @ beta)
        w = np.clip(prob * (1.0 - prob), 1e-10, None)
        info = (xmat * w[:, None]).T @ xmat
        if separated:
            # Same stabilization that produced the estimate.
            idx = np.arange(1, p + 1)
            info[idx, idx] += FALLBACK_RIDGE
        try:
            std = np.sqrt(np.diag(np.linalg.inv(info)))
        except np.linalg.LinAlgError:
            std = None

    return FitResult(beta, std, dev, conv, it, separated)


def wald_pvalues(fit: FitResult) -> np.ndarray:
    """Two-sided Wald p-values for the slope coefficients of a fit."""
    if fit.std_errors is None:
        raise UnsupportedFitError("fit has no standard errors (penalized or unconverged)")
    z = fit.slopes / fit.std_errors[1:]
    root2 = math.sqrt(2.0)
    return np.array([math.erfc(abs(v) / root2) for v in z])


def make_folds(y: np.ndarray, n_folds: int, rng: np.random.Generator) -> CvPlan:
    """Stratified fold assignment: each class shuffled, then dealt round-robin."""
    y = np.asarray(y)
    if n_folds < 2:
        raise ValidationError("need at least 2 folds")
    labels = np.empty(y.shape[0], dtype=np.int64)
    for cls in (1, 0):
        idx = np.flatnonzero(y == cls)
        if idx.size < n_folds:
            raise StratificationError(
                f"class {cls} has {idx.size} members, fewer than {n_folds} folds")
        shuffled = rng.permutation(idx)
        labels[shuffled] = np.arange(shuffled.size) % n_folds + 1
    return CvPlan(n_folds, labels, stratified=True)


def cv_deviance(x: np.ndarray, y: np.ndarray, subset, plan: CvPlan,
                penalty: PenaltySpec = NO_PENALTY) -> float:
    """Mean held-out deviance of the model on the given columns of x.

    For every fold the model is fit on the complement and -2 log-likelihood
    is accumulated on the held-out rows; the total is divided by n. `subset`
    holds 0-based column indices; an empty subset fits the intercept alone.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cols = np.asarray(sorted(subset), dtype=int)
    xs = x[:, cols] if cols.size else np.empty((x.shape[0], 0))
    total = 0.0
    for f in range(1, plan.n_folds + 1):
        test = plan.assignments == f
        train = ~test
        fit = fit_logistic(xs[train], y[train], penalty)
        eta = fit.intercept + xs[test] @ fit.slopes
        total += _grouped_deviance(eta, np.ones(int(test.sum())), y[test])
    return total / y.shape[0]


def bootstrap_resample(n: int, rng: np.random.Generator) -> np.ndarray:
    """n row indices drawn uniformly with replacement (0-based)."""
    if n < 1:
        raise ValidationError("resample size must be positive")
    return rng.integers(0, n, size=n)


# ---------------------------------------------------------------------------
# Lasso path: cyclic coordinate descent on the quadratic approximation with
# warm starts, glmnet-style. Columns are standardized internally and the
# coefficients reported back on the original 0/1 scale.
# ---------------------------------------------------------------------------

KKT_TOL = 1e-7


def _standardize(x):
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    return (x - mean) / scale, mean, scale


def lasso_lambda_max(x: np.ndarray, y: np.ndarray) -> float:
    """Smallest penalty for which the lasso keeps every slope at zero.

    From the stationarity condition at the intercept-only model:
    max_j |x~_j' (y - ybar)| / n over standardized columns x~.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xs, _, _ = _standardize(x)
    return float(np.max(np.abs(xs.T @ (y - y.mean())))) / y.shape[0]


def default_lambda_grid(x: np.ndarray, y: np.ndarray, n_lambdas: int = 50,
                        min_ratio: float = 1e-3) -> np.ndarray:
    """Log-spaced grid from lambda_max down to lambda_max * min_ratio."""
    lmax = lasso_lambda_max(x, y)
    return np.geomspace(lmax, lmax * min_ratio, n_lambdas)


def _lasso_cd(xs, y, lam, b0, beta, kkt_tol, max_outer):
    """Solve one lasso problem at penalty lam, warm-started at (b0, beta).

    Objective: (1/n) sum[-y*eta + log(1+exp(eta))] + lam * ||beta||_1 over
    standardized columns. Outer loop re-quadratizes; convergence is checked
    on the exact subgradient conditions, not the approximation.
    """
    n, p = xs.shape
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        eta = b0 + xs @ beta
        prob = expit(eta)
        g = xs.T @ (prob - y) / n
        viol = abs(float(np.mean(prob - y)))
        for j in range(p):
            if beta[j] != 0.0:
                viol = max(viol, abs(g[j] + lam * math.copysign(1.0, beta[j])))
            else:
                viol = max(viol, max(0.0, abs(g[j]) - lam))
        if viol <= kkt_tol:
            converged = True
            break

        w = np.clip(prob * (1.0 - prob), 1e-10, None)
        z = eta + (y - prob) / w
        r = z - eta
        wx2 = (w @ xs**2) / n
        wsum = float(w.sum())
        for _ in range(1000):
            delta = 0.0
            for j in range(p):
                if wx2[j] == 0.0:
                    continue
                old = beta[j]
                rho = float(w @ (xs[:, j] * r)) / n + wx2[j] * old
                new = math.copysign(max(abs(rho) - lam, 0.0), rho) / wx2[j]
                if new != old:
                    r -= (new - old) * xs[:, j]
                    beta[j] = new
                    delta = max(delta, abs(new - old))
            shift = float(w @ r) / wsum
            if shift != 0.0:
                b0 += shift
                r -= shift
                delta = max(delta, abs(shift))
            if delta < 1e-10:
                break
    return b0, beta, converged, outer


def fit_lasso_path(x: np.ndarray, y: np.ndarray, lambda_grid=None, *,
                   kkt_tol: float = KKT_TOL, max_outer: int = 250) -> list[FitResult]:
    """Lasso solutions along a decreasing penalty grid, warm-started.

    Returns one FitResult per grid point with coefficients on the original
    0/1 scale. Every solution satisfies the subgradient optimality
    conditions of the standardized problem within kkt_tol.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.min() == y.max():
        raise DegenerateOutcomeError("outcome vector contains a single class")
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(x, y)
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0 or np.any(grid < 0) or np.any(np.diff(grid) >= 0):
        raise ValidationError("lambda grid must be strictly decreasing and non-negative")

    xs, mean, scale = _standardize(x)
    ybar = float(y.mean())
    b0 = math.log(ybar / (1.0 - ybar))
    beta = np.zeros(x.shape[1])

    results = []
    for lam in grid:
        b0, beta, conv, iters = _lasso_cd(xs, y, float(lam), b0, beta, kkt_tol, max_outer)
        slopes = beta / scale
        intercept = b0 - float(np.sum(beta * mean / scale))
        coef = np.concatenate(([intercept], slopes))
        eta = intercept + x @ slopes
        dev = _grouped_deviance(eta, np.ones(y.shape[0]), y)
        results.append(FitResult(coef, None, dev, conv, iters))
    return results
