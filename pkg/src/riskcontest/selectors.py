"""Automated selection strategies: the four team procedures plus baselines.

Every selector consumes a Dataset and a SelectorSpec and emits a Submission
whose method_report carries the full decision path, so a run can be audited
(or re-plotted) after the fact. All selectors are deterministic given
(data, spec.seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import EnumerationBudgetError, ValidationError
from .glm import (
    CvPlan,
    PenaltySpec,
    _fit_grouped,
    _grouped_deviance,
    _log1pexp,
    bootstrap_resample,
    cv_deviance,
    default_lambda_grid,
    fit_lasso_path,
    fit_logistic,
    make_folds,
    wald_pvalues,
)
from .sim import Dataset

METHODS = (
    "team_a",
    "team_b",
    "team_c",
    "team_d",
    "random_baseline",
    "full_baseline",
    "empty_baseline",
)

BASELINES = ("random_baseline", "full_baseline", "empty_baseline")


@dataclass(frozen=True)
class Submission:
    """A named set of selected 1-based variable indices plus its audit trail."""

    team: str
    selected: tuple[int, ...]
    method_report: str = ""

    def __post_init__(self):
        if len(set(self.selected)) != len(self.selected):
            raise ValidationError("selected indices must be unique")
        if any(j < 1 for j in self.selected):
            raise ValidationError("selected indices are 1-based")


@dataclass(frozen=True)
class SelectorSpec:
    """Method name plus tuning knobs; fields a method ignores are harmless.

    n_folds=None lets each method pick its own default (4 for the exhaustive
    search, 10 for the penalized-path CV).
    """

    method: str
    seed: int = 0
    size_min: int = 3
    size_max: int = 7
    n_folds: int | None = None
    n_resamples: int = 100
    median_p_threshold: float = 0.05
    max_select: int = 3
    max_keep: int = 7
    budget: int = 1_000_000
    train_fraction: float = 0.75
    n_lambdas: int = 50
    lambda_min_ratio: float = 1e-3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        if not 1 <= self.size_min <= self.size_max:
            raise ValidationError("need 1 <= size_min <= size_max")
        if self.n_folds is not None and self.n_folds < 2:
            raise ValidationError("need at least 2 folds")
        if self.n_resamples < 1:
            raise ValidationError("need at least one resample")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must be in (0, 1)")
        if self.max_select < 0 or self.max_keep < 0:
            raise ValidationError("selection caps must be non-negative")


def run_selector(data: Dataset, spec: SelectorSpec) -> Submission:
    """Dispatch a SelectorSpec to its implementation."""
    if spec.method == "team_a":
        return select_team_a(data, spec)
    if spec.method == "team_b":
        return select_team_b(data, spec)
    if spec.method == "team_c":
        return select_team_c(data, spec)
    if spec.method == "team_d":
        return select_team_d(data, spec)
    return select_baseline(data, spec)


def _to_1based(cols) -> tuple[int, ...]:
    return tuple(sorted(int(c) + 1 for c in cols))


def _stratified_split(y, fraction, rng):
    train, test = [], []
    for cls in (1, 0):
        idx = rng.permutation(np.flatnonzero(y == cls))
        cut = int(round(fraction * idx.size))
        train.append(idx[:cut])
        test.append(idx[cut:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def select_team_a(data: Dataset, spec: SelectorSpec) -> Submission:
    """Holdout best subset: greedy forward selection per size on a stratified
    75/25 split, keeping the candidate size with the lowest test deviance."""
    rng = np.random.default_rng(spec.seed)
    x = data.x.astype(float)
    y = data.y.astype(float)
    train_idx, test_idx = _stratified_split(data.y, spec.train_fraction, rng)
    xtr, ytr = x[train_idx], y[train_idx]
    xte, yte = x[test_idx], y[test_idx]

    lines = [f"stratified split: {train_idx.size} train / {test_idx.size} test rows"]
    chosen: list[int] = []
    remaining = list(range(data.d))
    candidates: dict[int, tuple[int, ...]] = {}
    while len(chosen) < spec.size_max:
        devs = np.array([
            fit_logistic(xtr[:, chosen + [j]], ytr).deviance for j in remaining
        ])
        best = remaining[int(np.argmin(devs))]  # ties: lowest column index
        chosen.append(best)
        remaining.remove(best)
        lines.append(f"forward step {len(chosen)}: add x{best + 1} "
                     f"(train deviance {devs.min():.3f})")
        if len(chosen) >= spec.size_min:
            candidates[len(chosen)] = tuple(chosen)

    best_cols = None
    best_dev = math.inf
    for size in sorted(candidates):
        cols = list(candidates[size])
        fit = fit_logistic(xtr[:, cols], ytr)
        eta = fit.intercept + xte[:, cols] @ fit.slopes
        test_dev = _grouped_deviance(eta, np.ones(yte.size), yte) / yte.size
        lines.append(f"size {size}: test deviance per row {test_dev:.6f}")
        if test_dev < best_dev:
            best_dev = test_dev
            best_cols = cols
    lines.append(f"picked size {len(best_cols)} with test deviance {best_dev:.6f}")
    return Submission("team_a", _to_1based(best_cols), "\n".join(lines))


def _cv_lasso_curve(x, y, grid, plan):
    """Held-out deviance per observation for every grid point, per fold."""
    n_folds = plan.n_folds
    curve = np.zeros((n_folds, grid.size))
    for f in range(1, n_folds + 1):
        test = plan.assignments == f
        train = ~test
        path = fit_lasso_path(x[train], y[train], grid)
        ones = np.ones(int(test.sum()))
        for i, fit in enumerate(path):
            eta = fit.intercept + x[test] @ fit.slopes
            curve[f - 1, i] = _grouped_deviance(eta, ones, y[test]) / test.sum()
    return curve


def select_team_b(data: Dataset, spec: SelectorSpec) -> Submission:
    """Penalized-regression screen with a conservative cap.

    Cross-validates a lasso path, applies the one-standard-error rule, and
    keeps at most max_select variables (largest coefficients first). A ridge
    CV curve and the per-variable case/control exposure comparison go into
    the audit trail as the corroborating evidence.
    """
    rng = np.random.default_rng(spec.seed)
    x = data.x.astype(float)
    y = data.y.astype(float)
    n_folds = spec.n_folds if spec.n_folds is not None else 10
    plan = make_folds(data.y, n_folds, rng)

    grid = default_lambda_grid(x, y, spec.n_lambdas, spec.lambda_min_ratio)
    curve = _cv_lasso_curve(x, y, grid, plan)
    mean = curve.mean(axis=0)
    se = curve.std(axis=0, ddof=1) / math.sqrt(n_folds)
    i_min = int(np.argmin(mean))
    # Grid is decreasing, so the smallest index within one SE of the minimum
    # is the most conservative admissible penalty.
    i_1se = int(np.flatnonzero(mean <= mean[i_min] + se[i_min])[0])

    path = fit_lasso_path(x, y, grid)
    slopes = path[i_1se].slopes
    nonzero = np.flatnonzero(slopes != 0.0)
    kept = nonzero
    if nonzero.size > spec.max_select:
        order = np.argsort(-np.abs(slopes[nonzero]), kind="stable")
        kept = np.sort(nonzero[order[:spec.max_select]])

    ridge_lams = np.geomspace(1e3, 1e-2, 11)
    ridge_cv = [cv_deviance(x, y, range(data.d), plan, PenaltySpec("ridge", lam))
                for lam in ridge_lams]

    lines = [f"lasso CV over {grid.size} penalties, {n_folds} folds"]
    lines.append("lambda,mean_cv_deviance,se")
    lines.extend(f"{grid[i]:.6g},{mean[i]:.6f},{se[i]:.6f}" for i in range(grid.size))
    lines.append(f"minimum at lambda={grid[i_min]:.6g}; "
                 f"one-SE choice lambda={grid[i_1se]:.6g}")
    lines.append("nonzero at one-SE lambda: "
                 + (" ".join(f"x{j + 1}={slopes[j]:+.4f}" for j in nonzero) or "none"))
    lines.append("ridge CV (lambda: deviance): "
                 + " ".join(f"{l:.3g}:{d:.4f}" for l, d in zip(ridge_lams, ridge_cv)))
    lines.append("exposed counts, cases vs controls:")
    cases = data.y == 1
    for j in range(data.d):
        lines.append(f"x{j + 1}: {int(data.x[cases, j].sum())} vs "
                     f"{int(data.x[~cases, j].sum())}")
    if nonzero.size > spec.max_select:
        lines.append(f"capped to the {spec.max_select} largest coefficients")
    return Submission("team_b", _to_1based(kept), "\n".join(lines))


# ---------------------------------------------------------------------------
# Exhaustive search. With binary predictors a subset of size s only exposes
# 2^s covariate patterns, so every fold's fit runs on aggregated pattern
# counts instead of rows. The likelihood is identical, which keeps the fast
# path interchangeable with glm.cv_deviance.
# ---------------------------------------------------------------------------

_DESIGNS: dict[int, np.ndarray] = {}


def _pattern_design(s: int) -> np.ndarray:
    if s not in _DESIGNS:
        grid = ((np.arange(1 << s)[:, None] >> np.arange(s)) & 1).astype(float)
        _DESIGNS[s] = np.hstack([np.ones((1 << s, 1)), grid])
    return _DESIGNS[s]


class _PatternTable:
    """Per-fold case/total counts of every distinct covariate pattern."""

    def __init__(self, x: np.ndarray, y: np.ndarray, plan: CvPlan):
        d = x.shape[1]
        codes = x.astype(np.int64) @ (np.int64(1) << np.arange(d, dtype=np.int64))
        uniq, inv = np.unique(codes, return_inverse=True)
        k = uniq.size
        self.bits = ((uniq[:, None] >> np.arange(d, dtype=np.int64)) & 1)
        self.total_n = np.bincount(inv, minlength=k).astype(float)
        self.total_c = np.bincount(inv, weights=y.astype(float), minlength=k)
        self.fold_n = np.empty((plan.n_folds, k))
        self.fold_c = np.empty((plan.n_folds, k))
        for f in range(plan.n_folds):
            held = plan.assignments == f + 1
            self.fold_n[f] = np.bincount(inv[held], minlength=k)
            self.fold_c[f] = np.bincount(inv[held], weights=y[held].astype(float),
                                         minlength=k)
        self.n = x.shape[0]
        self.n_folds = plan.n_folds

    def cv_deviance(self, cols: tuple[int, ...]) -> float:
        s = len(cols)
        powers = np.int64(1) << np.arange(s, dtype=np.int64)
        sub = self.bits[:, list(cols)] @ powers
        width = 1 << s
        design = _pattern_design(s)
        n_all = np.bincount(sub, weights=self.total_n, minlength=width)
        c_all = np.bincount(sub, weights=self.total_c, minlength=width)
        total = 0.0
        for f in range(self.n_folds):
            n_te = np.bincount(sub, weights=self.fold_n[f], minlength=width)
            c_te = np.bincount(sub, weights=self.fold_c[f], minlength=width)
            n_tr = n_all - n_te
            c_tr = c_all - c_te
            live = n_tr > 0
            beta, *_ = _fit_grouped(design[live], n_tr[live], c_tr[live], 0.0)
            eta = design @ beta
            total += 2.0 * float(np.sum(n_te * _log1pexp(eta) - c_te * eta))
        return total / self.n


def select_team_c(data: Dataset, spec: SelectorSpec) -> Submission:
    """Exhaustive best-subset search scored by shared-fold cross-validation.

    Enumerates every subset of sizes size_min..size_max, scores each by
    k-fold held-out deviance on one shared fold assignment, and returns the
    argmin; ties go to the smaller, then lexicographically first subset.
    """
    n_subsets = sum(math.comb(data.d, s)
                    for s in range(spec.size_min, spec.size_max + 1))
    if n_subsets > spec.budget:
        raise EnumerationBudgetError(
            f"{n_subsets} candidate subsets exceed the budget of {spec.budget}")

    rng = np.random.default_rng(spec.seed)
    n_folds = spec.n_folds if spec.n_folds is not None else 4
    plan = make_folds(data.y, n_folds, rng)
    table = _PatternTable(data.x, data.y, plan)

    best_cols = None
    best_dev = math.inf
    leaders: list[tuple[float, tuple[int, ...]]] = []
    evaluated = 0
    for s in range(spec.size_min, spec.size_max + 1):
        for cols in combinations(range(data.d), s):
            dev = table.cv_deviance(cols)
            evaluated += 1
            if dev < best_dev:  # ties keep the earlier (smaller, lex-first) subset
                best_dev = dev
                best_cols = cols
            if len(leaders) < 5 or dev < leaders[-1][0]:
                leaders.append((dev, cols))
                leaders.sort(key=lambda t: t[0])
                del leaders[5:]

    lines = [f"exhaustive search: {evaluated} subsets of sizes "
             f"{spec.size_min}..{spec.size_max}, {n_folds}-fold CV"]
    lines.append("top candidates (cv deviance per row):")
    lines.extend(f"  {dev:.6f}  {{{' '.join(f'x{c + 1}' for c in cols)}}}"
                 for dev, cols in leaders)
    return Submission("team_c", _to_1based(best_cols), "\n".join(lines))


def select_team_d(data: Dataset, spec: SelectorSpec) -> Submission:
    """Bootstrap p-value screen: refit the full model on resamples, keep the
    variables whose median Wald p-value falls below the threshold (at most
    max_keep, smallest medians first)."""
    rng = np.random.default_rng(spec.seed)
    x = data.x.astype(float)
    y = data.y.astype(float)
    pvals = np.empty((spec.n_resamples, data.d))
    for r in range(spec.n_resamples):
        idx = bootstrap_resample(data.n, rng)
        pvals[r] = wald_pvalues(fit_logistic(x[idx], y[idx]))

    medians = np.median(pvals, axis=0)
    below = np.flatnonzero(medians < spec.median_p_threshold)
    kept = below
    if below.size > spec.max_keep:
        order = np.argsort(medians[below], kind="stable")
        kept = np.sort(below[order[:spec.max_keep]])

    lines = [f"{spec.n_resamples} bootstrap resamples of {data.n} rows, "
             f"full {data.d}-variable fits"]
    lines.append("median p per variable: "
                 + " ".join(f"x{j + 1}={medians[j]:.4f}" for j in range(data.d)))
    lines.append(f"threshold {spec.median_p_threshold}, cap {spec.max_keep}")
    lines.append("p-value table (variable; one column per resample):")
    for j in range(data.d):
        lines.append(f"x{j + 1}," + ",".join(f"{v:.6g}" for v in pvals[:, j]))
    return Submission("team_d", _to_1based(kept), "\n".join(lines))


def select_baseline(data: Dataset, spec: SelectorSpec) -> Submission:
    """Control arms: a random admissible subset, everything, or nothing."""
    if spec.method == "empty_baseline":
        return Submission("empty_baseline", (), "selects nothing")
    if spec.method == "full_baseline":
        return Submission("full_baseline", tuple(range(1, data.d + 1)),
                          "selects every variable")
    if spec.method != "random_baseline":
        raise ValidationError(f"{spec.method!r} is not a baseline")
    rng = np.random.default_rng(spec.seed)
    size = int(rng.integers(spec.size_min, spec.size_max + 1))
    cols = rng.choice(data.d, size=size, replace=False)
    return Submission("random_baseline", _to_1based(cols),
                      f"uniform subset of size {size}")
