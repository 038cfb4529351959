"""CCCP training of the three regularized risk estimators.

The scaled ramp objective is non-convex; training majorize-minimizes its
difference-of-convex split.  Each outer iteration linearizes the concave
hinge at the current margins and solves the resulting convex
piecewise-linear-plus-quadratic subproblem by full-batch subgradient
descent with a 1/sqrt(k) step schedule, the base step calibrated by
backtracking on the first step.  Because the inner solver never returns a
point worse than its start, the true regularized objective is
non-increasing across outer iterations; that property is asserted on every
run with a 1e-12 per-step slack and a violation is a hard error, not a
warning.

Multiple restarts (zero init plus random Gaussian inits of scale 0.1)
hedge against bad local minima; the restart with the lowest final
objective wins.  Hyperparameters for the kernel model are selected by
k-fold cross-validation scored with the mode's own unbiased estimator
under the zero-one loss, so PU validation never touches negative data.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .datasets import SampleTriple
from .losses import ZERO_ONE
from .models import DecisionModel, EmpiricalKernelMap
from .risk import Mode, risk_nu, risk_pn, risk_pu

MONOTONICITY_SLACK = 1e-12
_DIVERGENCE_STREAK = 10
_STALL_WINDOW = 25

#: Sample sets consumed by each mode, in (positive-role, negative-role) order.
MODE_SETS = {
    "PN": ("x_pos", "x_neg"),
    "PU": ("x_pos", "x_unl"),
    "NU": ("x_unl", "x_neg"),
}


class DivergenceError(RuntimeError):
    """Inner solver increased its objective for too many consecutive steps."""

    def __init__(self, message: str, trace: Sequence[float]):
        super().__init__(f"{message}; recent objective values: {list(trace)}")
        self.trace = list(trace)


class CccpMonotonicityError(RuntimeError):
    """An outer step increased the true regularized objective."""


@dataclass(frozen=True)
class TrainConfig:
    """Solver knobs: regularization, iteration caps, tolerances, restarts."""

    lam: float = 1e-3
    cccp_max_outer: int = 30
    inner_max_iter: int = 300
    inner_tol: float = 1e-8
    outer_tol: float = 1e-6
    restarts: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if self.cccp_max_outer < 1 or self.inner_max_iter < 1:
            raise ValueError("iteration caps must be at least 1")
        if not (self.inner_tol > 0 and self.outer_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        doc = dict(doc)
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
        return cls(**doc)

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation folds and hyperparameter grids."""

    folds: int = 5
    width_grid: tuple = ()
    lambda_grid: tuple = ()

    def __post_init__(self) -> None:
        if self.folds < 2:
            raise ValueError(f"folds must be at least 2, got {self.folds}")
        object.__setattr__(self, "width_grid", tuple(float(w) for w in self.width_grid))
        object.__setattr__(self, "lambda_grid", tuple(float(l) for l in self.lambda_grid))
        if not self.lambda_grid:
            raise ValueError("lambda_grid must be non-empty")
        if any(w <= 0 for w in self.width_grid) or any(l <= 0 for l in self.lambda_grid):
            raise ValueError("grid entries must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "CvConfig":
        return cls(**doc)

    @classmethod
    def from_json(cls, path) -> "CvConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ModelTemplate:
    """What to fit: a linear score on raw features, or its kernel expansion.

    For the kernel kind, ``width=None`` defers the bandwidth to the median
    heuristic over the anchor rows (or to cross-validation).
    """

    kind: str = "linear"
    width: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "kernel"):
            raise ValueError(f"template kind must be 'linear' or 'kernel', got {self.kind!r}")
        if self.width is not None and not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")


LINEAR_TEMPLATE = ModelTemplate(kind="linear")


@dataclass(frozen=True)
class RiskObjective:
    """Weighted ramp-sum objective: sum_i c_i * ramp(t_i, y_i) + const + reg.

    ``features`` are already pushed through any kernel map, so a candidate
    is just (weights, bias) and margins are an affine map of the weights.
    """

    features: np.ndarray
    labels: np.ndarray
    coeffs: np.ndarray
    constant: float
    lam: float

    def margins(self, w: np.ndarray, b: float) -> np.ndarray:
        return self.features @ w + b

    def value(self, w: np.ndarray, b: float) -> float:
        m = self.margins(w, b) * self.labels
        ramp = np.clip((1.0 - m) * 0.5, 0.0, 1.0)
        return float(self.coeffs @ ramp) + self.constant + 0.5 * self.lam * float(w @ w)


def _mode_coefficients(mode: Mode, triple: SampleTriple):
    """Per-row (label, coefficient) streams plus the additive constant."""
    pi = triple.pi
    n_pos, n_neg, n_unl = triple.n_pos, triple.n_neg, triple.n_unl
    if mode == "PN":
        return (
            (triple.x_pos, +1, pi / n_pos),
            (triple.x_neg, -1, (1.0 - pi) / n_neg),
        ), 0.0
    if mode == "PU":
        return (
            (triple.x_pos, +1, 2.0 * pi / n_pos),
            (triple.x_unl, -1, 1.0 / n_unl),
        ), -pi
    if mode == "NU":
        return (
            (triple.x_unl, +1, 1.0 / n_unl),
            (triple.x_neg, -1, 2.0 * (1.0 - pi) / n_neg),
        ), -(1.0 - pi)
    raise ValueError(f"unknown mode {mode!r}")


def _require_mode_sets(mode: Mode, triple: SampleTriple) -> None:
    if mode not in MODE_SETS:
        raise ValueError(f"unknown mode {mode!r}")
    for name in MODE_SETS[mode]:
        if getattr(triple, name).shape[0] == 0:
            raise ValueError(f"{mode} training requires a non-empty {name} sample set")


def build_objective(mode: Mode, triple: SampleTriple,
                    feature_map: Optional[EmpiricalKernelMap], lam: float) -> RiskObjective:
    """Assemble the mode's regularized empirical risk over mapped features."""
    _require_mode_sets(mode, triple)
    streams, constant = _mode_coefficients(mode, triple)
    rows, labels, coeffs = [], [], []
    for x, label, coeff in streams:
        rows.append(feature_map(x) if feature_map else np.asarray(x, dtype=float))
        labels.append(np.full(x.shape[0], label, dtype=float))
        coeffs.append(np.full(x.shape[0], coeff, dtype=float))
    return RiskObjective(
        features=np.vstack(rows),
        labels=np.concatenate(labels),
        coeffs=np.concatenate(coeffs),
        constant=constant,
        lam=lam,
    )


def _convex_value(theta, Z, y, c, s, lam) -> float:
    w, b = theta[:-1], theta[-1]
    t = Z @ w + b
    hinge = 0.5 * np.maximum(0.0, 1.0 - t * y)
    val = float(c @ (hinge + s * t)) + 0.5 * lam * float(w @ w)
    if not math.isfinite(val):
        raise ValueError("non-finite objective value; a gradient step broke")
    return val


def _convex_subgrad(theta, Z, y, c, s, lam) -> np.ndarray:
    w, b = theta[:-1], theta[-1]
    t = Z @ w + b
    dt = c * (s - 0.5 * y * (t * y < 1.0))
    g = np.empty_like(theta)
    g[:-1] = Z.T @ dt + lam * w
    g[-1] = float(dt.sum())
    return g


def _calibrate_step(theta0, f0, g0, Z, y, c, s, lam) -> float:
    """Pick the base step by backtracking (with greedy expansion) at step one."""
    gnorm = float(np.linalg.norm(g0))
    if gnorm < 1e-15:
        return 0.0
    step = max(1.0, float(np.linalg.norm(theta0))) / gnorm
    f_try = _convex_value(theta0 - step * g0, Z, y, c, s, lam)
    if f_try < f0:
        for _ in range(20):
            f_next = _convex_value(theta0 - 2.0 * step * g0, Z, y, c, s, lam)
            if f_next < f_try:
                step *= 2.0
                f_try = f_next
            else:
                break
        return step
    for _ in range(60):
        step *= 0.5
        if _convex_value(theta0 - step * g0, Z, y, c, s, lam) < f0:
            return step
    return 0.0


def _solve_convex(theta0, Z, y, c, s, lam, config: TrainConfig):
    """Subgradient descent on the linearized subproblem; never worse than start."""
    f0 = _convex_value(theta0, Z, y, c, s, lam)
    g0 = _convex_subgrad(theta0, Z, y, c, s, lam)
    step = _calibrate_step(theta0, f0, g0, Z, y, c, s, lam)
    if step == 0.0:
        return theta0, f0

    theta = theta0.copy()
    best_theta, best_f = theta0, f0
    prev_f = f0
    window_best = f0
    increase_streak = 0
    recent: list[float] = [f0]
    for k in range(1, config.inner_max_iter + 1):
        g = _convex_subgrad(theta, Z, y, c, s, lam)
        theta = theta - (step / math.sqrt(k)) * g
        f = _convex_value(theta, Z, y, c, s, lam)
        recent = (recent + [f])[-(_DIVERGENCE_STREAK + 2):]
        if f > prev_f:
            increase_streak += 1
            if increase_streak >= _DIVERGENCE_STREAK:
                raise DivergenceError(
                    f"inner objective rose for {increase_streak} consecutive steps", recent
                )
        else:
            increase_streak = 0
        if f < best_f:
            best_f, best_theta = f, theta.copy()
        prev_f = f
        if k % _STALL_WINDOW == 0:
            if window_best - best_f < config.inner_tol * max(1.0, abs(best_f)):
                break
            window_best = best_f
    return best_theta, best_f


def _outer_step_raw(w, b, obj: RiskObjective, config: TrainConfig):
    """One majorize-minimize step: linearize the concave hinges, solve, return."""
    theta0 = np.append(w, b)
    margins = obj.margins(w, b)
    s = np.where(margins * obj.labels < -1.0, 0.5 * obj.labels, 0.0)
    theta, _ = _solve_convex(theta0, obj.features, obj.labels, obj.coeffs, s, obj.lam, config)
    return theta[:-1], float(theta[-1])


def cccp_outer_step(model: DecisionModel, objective: RiskObjective,
                    config: TrainConfig) -> DecisionModel:
    """Run one outer CCCP step from the model's current weights.

    The returned model's true objective is at most the incoming one plus a
    1e-12 float slack; a violation raises CccpMonotonicityError.
    """
    if objective.features.shape[1] != model.weights.size:
        raise ValueError(
            f"objective feature dimension {objective.features.shape[1]} does not match "
            f"model weight dimension {model.weights.size}"
        )
    before = objective.value(model.weights, model.bias)
    w, b = _outer_step_raw(model.weights, model.bias, objective, config)
    after = objective.value(w, b)
    if after > before + MONOTONICITY_SLACK:
        raise CccpMonotonicityError(
            f"outer step increased the objective: {before!r} -> {after!r}"
        )
    return DecisionModel(weights=w, bias=b, feature_map=model.feature_map)


_RUN_STATS = {"runs": 0, "outer_steps": 0, "monotonicity_violations": 0}


def run_stats() -> dict:
    """Counters over all training runs in this process (test support)."""
    return dict(_RUN_STATS)


def reset_run_stats() -> None:
    for key in _RUN_STATS:
        _RUN_STATS[key] = 0


def _build_feature_map(template: ModelTemplate, mode: Mode,
                       triple: SampleTriple) -> Optional[EmpiricalKernelMap]:
    if template.kind == "linear":
        return None
    first, second = MODE_SETS[mode]
    anchors = np.vstack([getattr(triple, first), getattr(triple, second)])
    width = template.width if template.width is not None else median_heuristic_width(anchors)
    return EmpiricalKernelMap(anchors=anchors, width=width)


def train(mode: Mode, triple: SampleTriple, template: ModelTemplate = LINEAR_TEMPLATE,
          config: TrainConfig = TrainConfig(), trace: Optional[list] = None) -> DecisionModel:
    """Minimize the mode's regularized risk estimator by restarted CCCP.

    Returns the best restart's stationary point.  The regularized objective
    is non-increasing across outer iterations in every restart (hard
    assertion).  Pass a list as ``trace`` to capture the per-restart
    objective sequences.
    """
    _require_mode_sets(mode, triple)
    fmap = _build_feature_map(template, mode, triple)
    obj = build_objective(mode, triple, fmap, config.lam)
    rng = np.random.default_rng(config.seed)
    dim = obj.features.shape[1]

    _RUN_STATS["runs"] += 1
    best = None
    for restart in range(config.restarts):
        if restart == 0:
            w, b = np.zeros(dim), 0.0
        else:
            theta = rng.normal(0.0, 0.1, size=dim + 1)
            w, b = theta[:-1], float(theta[-1])
        current = obj.value(w, b)
        if not math.isfinite(current):
            raise ValueError("non-finite objective at initialization")
        objectives = [current]
        for _ in range(config.cccp_max_outer):
            w_new, b_new = _outer_step_raw(w, b, obj, config)
            value = obj.value(w_new, b_new)
            _RUN_STATS["outer_steps"] += 1
            if value > current + MONOTONICITY_SLACK:
                _RUN_STATS["monotonicity_violations"] += 1
                raise CccpMonotonicityError(
                    f"objective increased across an outer iteration: {current!r} -> {value!r}"
                )
            decrease = current - value
            w, b, current = w_new, b_new, value
            objectives.append(current)
            if decrease < config.outer_tol:
                break
        if trace is not None:
            trace.append({"restart": restart, "objectives": objectives})
        if best is None or current < best[0]:
            best = (current, w, b)

    return DecisionModel(weights=best[1], bias=best[2], feature_map=fmap)


def median_heuristic_width(x, max_rows: int = 512) -> float:
    """Median pairwise distance over (a deterministic subset of) the rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] > max_rows:
        x = x[np.linspace(0, x.shape[0] - 1, max_rows).astype(int)]
    sq = np.sum(x * x, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (x @ x.T), 0.0)
    iu = np.triu_indices(x.shape[0], k=1)
    if iu[0].size == 0:
        return 1.0
    med = float(np.median(np.sqrt(d2[iu])))
    return med if med > 0 else 1.0


def default_cv_config(anchor_rows, folds: int = 5) -> CvConfig:
    """Median-heuristic width grid times {1/4..4}, log-spaced lambda grid."""
    med = median_heuristic_width(anchor_rows)
    widths = tuple(med * s for s in (0.25, 0.5, 1.0, 2.0, 4.0))
    lambdas = tuple(np.logspace(-5, -1, 5))
    return CvConfig(folds=folds, width_grid=widths, lambda_grid=lambdas)


def _select_best(table: list) -> tuple:
    """Argmin over (width, lambda, cv_risk) rows.

    Ties break toward the larger width, then the larger lambda; None widths
    (linear templates) sort as equal.
    """
    def sort_key(row):
        width, lam, _ = row
        return (-(width if width is not None else 0.0), -lam)

    best = None
    for row in sorted(table, key=sort_key):
        if best is None or row[2] < best[2]:
            best = row
    return best


def _validation_risk(mode: Mode, model: DecisionModel, val_sets: dict, pi: float) -> float:
    """The mode's own unbiased estimator under the zero-one loss."""
    if mode == "PN":
        return risk_pn(model, val_sets["x_pos"], val_sets["x_neg"], pi, ZERO_ONE)
    if mode == "PU":
        return risk_pu(model, val_sets["x_pos"], val_sets["x_unl"], pi, ZERO_ONE)
    return risk_nu(model, val_sets["x_unl"], val_sets["x_neg"], pi, ZERO_ONE)


def cross_validate(mode: Mode, triple: SampleTriple, template: ModelTemplate,
                   cv_config: CvConfig, train_config: TrainConfig):
    """Grid-search (width, lambda) by k-fold CV on the mode's own estimator.

    Each sample set the mode uses is split into folds independently; every
    grid cell is scored by the mean over folds of the unbiased estimator
    under the zero-one loss on the held-out folds.  Ties break toward the
    larger width, then the larger lambda.  Returns
    (best_width, best_lambda, table) where the table rows are
    (width, lambda, cv_risk) and width is None for linear templates.
    """
    _require_mode_sets(mode, triple)
    used = MODE_SETS[mode]
    rng = np.random.default_rng(train_config.seed)
    folds: dict[str, list[np.ndarray]] = {}
    for name in used:
        n = getattr(triple, name).shape[0]
        if n < cv_config.folds:
            raise ValueError(
                f"{name} has only {n} rows; {cv_config.folds}-fold CV would empty a fold"
            )
        folds[name] = np.array_split(rng.permutation(n), cv_config.folds)

    if template.kind == "kernel":
        if not cv_config.width_grid:
            raise ValueError("kernel cross-validation needs a non-empty width_grid")
        widths: tuple = tuple(sorted(set(cv_config.width_grid), reverse=True))
    else:
        widths = (None,)
    lambdas = tuple(sorted(set(cv_config.lambda_grid), reverse=True))

    d = triple.d
    empty = np.empty((0, d))
    table = []
    for width in widths:
        cell_template = template if width is None else replace(template, width=width)
        for lam in lambdas:
            cfg = replace(train_config, lam=lam)
            scores = []
            for f in range(cv_config.folds):
                subsets, val_sets = {}, {}
                for name in used:
                    full = getattr(triple, name)
                    val_idx = folds[name][f]
                    tr_idx = np.concatenate(
                        [folds[name][g] for g in range(cv_config.folds) if g != f]
                    )
                    subsets[name] = full[tr_idx]
                    val_sets[name] = full[val_idx]
                sub_triple = SampleTriple(
                    x_pos=subsets.get("x_pos", empty),
                    x_neg=subsets.get("x_neg", empty),
                    x_unl=subsets.get("x_unl", empty),
                    pi=triple.pi,
                )
                model = train(mode, sub_triple, cell_template, cfg)
                scores.append(_validation_risk(mode, model, val_sets, triple.pi))
            table.append((width, lam, float(np.mean(scores))))
    best = _select_best(table)
    return best[0], best[1], table
