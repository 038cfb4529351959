"""Experiment harness: sweeps, plot-ready tables, and the advice endpoint.

A sweep varies the unlabeled sample size or the class prior and, for every
(sweep value, trial) cell, draws ONE sample triple and trains all three
mode minimizers on it, so the modes are compared on identical data.  Each
trial's misclassification rate comes from that trial's holdout: a fresh
labeled draw for the synthetic source, the leftover rows for a CSV pool.
Per-trial seeds are spawned from (master seed, sweep value, trial index),
so results do not depend on execution order and trials are safe to farm
out to parallel workers.

Desk-scale defaults (50 trials, 1e5 test points) keep a full sweep in the
minutes range; ``paper_scale=True`` restores 100 trials and 1e6 test
points.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import bounds, losses
from .datasets import (
    gen_gaussian_artificial,
    gen_gaussian_labeled,
    load_csv,
    sample_triple_from_pool,
)
from .risk import risk_true_mc
from .training import CvConfig, ModelTemplate, TrainConfig, cross_validate, train

MODES = ("PN", "PU", "NU")

DESK_TRIALS = 50
DESK_TEST_SIZE = 100_000
PAPER_TRIALS = 100
PAPER_TEST_SIZE = 1_000_000

CSV_HEADER = ("sweep_value", "mode", "mean_error", "std_error", "alpha_pu_pn", "alpha_nu_pn")


@dataclass(frozen=True)
class ExperimentGrid:
    """A sweep specification over the unlabeled size or the class prior."""

    sweep: str  # "nu" | "pi"
    values: tuple
    n_pos: int
    n_neg: int
    pi: Optional[float] = None  # fixed prior (nu sweep)
    n_unl: Optional[int] = None  # fixed unlabeled size (pi sweep)
    trials: int = DESK_TRIALS
    data_source: str = "artificial"  # "artificial" or a CSV path
    label_column: object = None
    test_size: int = DESK_TEST_SIZE
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sweep not in ("nu", "pi"):
            raise ValueError(f"sweep must be 'nu' or 'pi', got {self.sweep!r}")
        values = tuple(self.values)
        if not values:
            raise ValueError("sweep values must be non-empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.sweep == "nu":
            values = tuple(int(v) for v in values)
            if values[0] < 1:
                raise ValueError("unlabeled sizes must be positive")
            if self.pi is None or not 0.0 < self.pi < 1.0:
                raise ValueError("a nu sweep needs a fixed pi in (0, 1)")
        else:
            values = tuple(float(v) for v in values)
            if values[0] <= 0.0 or values[-1] >= 1.0:
                raise ValueError("pi sweep values must lie strictly inside (0, 1)")
            if self.n_unl is None or self.n_unl < 1:
                raise ValueError("a pi sweep needs a fixed positive n_unl")
        object.__setattr__(self, "values", values)
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("n_pos and n_neg must be positive")
        if self.test_size < 1:
            raise ValueError("test_size must be positive")

    def point(self, value) -> tuple[float, int]:
        """Resolve a sweep value into the (pi, n_unl) pair for that point."""
        if self.sweep == "nu":
            return float(self.pi), int(value)
        return float(value), int(self.n_unl)


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    mode: str
    mean_error: float
    std_error: float
    alpha_pu_pn: float
    alpha_nu_pn: float


@dataclass
class ResultTable:
    """Aggregated sweep results plus the per-trial errors behind them."""

    rows: list = field(default_factory=list)
    trial_errors: dict = field(default_factory=dict)  # (sweep_value, mode) -> np.ndarray

    def modes(self) -> set:
        return {row.mode for row in self.rows}

    def series(self, mode: str):
        """(sweep values, mean errors) for one mode, in sweep order."""
        rows = sorted((r for r in self.rows if r.mode == mode), key=lambda r: r.sweep_value)
        return (
            np.array([r.sweep_value for r in rows]),
            np.array([r.mean_error for r in rows]),
        )


def _trial_seed(master_seed: int, sweep_value, trial: int) -> np.random.SeedSequence:
    """Splittable per-trial seed from (master seed, sweep value, trial index)."""
    bits = int(np.float64(sweep_value).view(np.uint64))
    return np.random.SeedSequence(master_seed, spawn_key=(bits >> 32, bits & 0xFFFFFFFF, trial))


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1)) / math.sqrt(values.size)


def run_sweep(grid: ExperimentGrid, train_config: Optional[TrainConfig] = None,
              cv_config: Optional[CvConfig] = None,
              template: Optional[ModelTemplate] = None) -> ResultTable:
    """Train all three minimizers per trial on a shared triple and aggregate.

    The synthetic source trains the linear model at fixed regularization
    (no CV); a CSV source defaults to the kernel model with per-trial,
    per-mode cross-validation when ``cv_config`` is given.
    """
    train_config = train_config or TrainConfig()
    pool = None
    if grid.data_source != "artificial":
        pool = load_csv(grid.data_source, grid.label_column)
    if template is None:
        template = ModelTemplate(kind="linear" if pool is None else "kernel")

    table = ResultTable()
    for sweep_index, value in enumerate(grid.values):
        pi, n_unl = grid.point(value)
        errors = {mode: np.empty(grid.trials) for mode in MODES}
        for trial in range(grid.trials):
            seed = _trial_seed(grid.seed, value, trial)
            triple_seed, eval_seed = seed.spawn(2)
            try:
                if pool is None:
                    triple = gen_gaussian_artificial(
                        grid.n_pos, grid.n_neg, n_unl, pi, triple_seed
                    )
                    holdout = gen_gaussian_labeled(grid.test_size, pi, eval_seed)
                else:
                    triple, holdout = sample_triple_from_pool(
                        pool, grid.n_pos, grid.n_neg, n_unl, pi, triple_seed
                    )
                stamp = triple.fingerprint()
                for mode in MODES:
                    if triple.fingerprint() != stamp:
                        raise RuntimeError("sample triple mutated between modes")
                    if cv_config is not None:
                        width, lam, _ = cross_validate(
                            mode, triple, template, cv_config, train_config
                        )
                        mode_template = (
                            template if width is None
                            else ModelTemplate(kind="kernel", width=width)
                        )
                        cfg = replace(train_config, lam=lam)
                    else:
                        mode_template, cfg = template, train_config
                    model = train(mode, triple, mode_template, cfg)
                    errors[mode][trial] = risk_true_mc(model, holdout, losses.ZERO_ONE)
            except Exception as exc:
                raise RuntimeError(
                    f"sweep point {grid.sweep}={value}, trial {trial}: {exc}"
                ) from exc

        comp = bounds.ComparatorInput(pi=pi, n_pos=grid.n_pos, n_neg=grid.n_neg, n_unl=n_unl)
        a_pu, a_nu = bounds.alpha_pu_pn(comp), bounds.alpha_nu_pn(comp)
        for mode in MODES:
            vals = errors[mode]
            table.rows.append(
                SweepRow(
                    sweep_value=float(value),
                    mode=mode,
                    mean_error=float(np.mean(vals)),
                    std_error=_stderr(vals),
                    alpha_pu_pn=a_pu,
                    alpha_nu_pn=a_nu,
                )
            )
            table.trial_errors[(float(value), mode)] = vals.copy()
    return table


def emit(table: ResultTable, fmt: str, path) -> None:
    """Write the table as CSV (6 significant digits) or JSON (full precision)."""
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in table.rows:
                writer.writerow(
                    [f"{r.sweep_value:.6g}", r.mode] +
                    [f"{v:.6g}" for v in (r.mean_error, r.std_error, r.alpha_pu_pn, r.alpha_nu_pn)]
                )
    elif fmt == "json":
        doc = {"rows": [r.__dict__ for r in table.rows]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def load_table(path) -> ResultTable:
    """Read back a JSON table written by ``emit`` (per-trial errors excluded)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return ResultTable(rows=[SweepRow(**row) for row in doc["rows"]])


def estimate_pu_pn_crossing(table: ResultTable) -> Optional[float]:
    """Unlabeled size at which the mean PU error crosses below the PN error.

    Fits the per-point mean difference (PU minus PN) against
    1/sqrt(n_unl) by least squares and returns the root of the fitted
    line.  The one-over-root-n regressor matches how the PU estimator's
    uncertainty shrinks, and using every sweep point makes the estimate
    robust to trial noise at any single point.  Returns None when the fit
    has no positive root (the curves never cross in range).
    """
    nu_vals, pu = table.series("PU")
    nu_pn, pn = table.series("PN")
    if nu_vals.size < 2 or not np.array_equal(nu_vals, nu_pn):
        raise ValueError("table must contain PU and PN rows on a common nu grid")
    diff = pu - pn
    design = np.column_stack([np.ones_like(nu_vals), 1.0 / np.sqrt(nu_vals)])
    (intercept, slope), *_ = np.linalg.lstsq(design, diff, rcond=None)
    if slope <= 0 or intercept >= 0:
        return None  # PU never overtakes PN (or starts ahead) under the fit
    return float((slope / -intercept) ** 2)


def recommendation_text(result: bounds.AlphaStarResult) -> str:
    if result.verdict == bounds.VERDICT_PU:
        return (
            "PU learning is promising: collect more unlabeled data "
            f"(limit comparator {result.alpha_star_pu:.4g} < 1)."
        )
    if result.verdict == bounds.VERDICT_NU:
        return (
            "NU learning is promising: collect more unlabeled data "
            f"(limit comparator {result.alpha_star_nu:.4g} < 1)."
        )
    return (
        "Degenerate tie (n_pos/n_neg equals pi^2/(1-pi)^2): neither unlabeled-data "
        "route improves on PN in the limit; PN remains competitive."
    )


def advise(pi: float, n_pos: int, n_neg: int, n_unl: Optional[int],
           params: Optional[bounds.BoundParams] = None) -> dict:
    """Comparator values, bound values at defaults, and a recommendation.

    ``n_unl=None`` means the unlabeled budget is unbounded; finite-sample
    comparators are then omitted and bound values are reported in the
    limit.
    """
    params = params or bounds.BoundParams()
    comp = bounds.ComparatorInput.from_counts(pi, n_pos, n_neg, n_unl)
    star = bounds.alpha_star(comp, case="a")
    v_pn, v_pu, v_nu = bounds.bound_values(comp, params, allow_unbounded_unl=True)
    doc = {
        "pi": pi,
        "n_pos": n_pos,
        "n_neg": n_neg,
        "n_unl": n_unl,
        "alpha_pu_pn": None,
        "alpha_nu_pn": None,
        "pu_bound_tighter_than_pn": None,
        "nu_bound_tighter_than_pn": None,
        "alpha_star_pu": star.alpha_star_pu,
        "alpha_star_nu": star.alpha_star_nu,
        "verdict": star.verdict,
        "bound_values": {
            "pn": v_pn,
            "pu": v_pu,
            "nu": v_nu,
            "delta": params.delta,
            "lipschitz": params.lipschitz,
            "complexity_const": params.complexity_const,
        },
        "recommendation": recommendation_text(star),
    }
    if n_unl is not None:
        a_pu, a_nu = bounds.alpha_pu_pn(comp), bounds.alpha_nu_pn(comp)
        doc.update(
            alpha_pu_pn=a_pu,
            alpha_nu_pn=a_nu,
            pu_bound_tighter_than_pn=bool(a_pu < 1.0),
            nu_bound_tighter_than_pn=bool(a_nu < 1.0),
        )
    return doc


# ---------------------------------------------------------------------------
# Invariant suites behind the `verify` CLI subcommand.
# ---------------------------------------------------------------------------


def _verify_calibration() -> tuple[bool, str]:
    ok = losses.verify_calibration(losses.default_pi_grid(0.05), losses.default_g_grid(0.01))
    return ok, "conditional-risk grid 0.05 x 0.01 over [-2, 2]"


def _verify_comparator_equivalence(seed: int, cases: int = 10_000) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    params = bounds.BoundParams()
    bad = 0
    for _ in range(cases):
        comp = bounds.ComparatorInput(
            pi=rng.uniform(0.02, 0.98),
            n_pos=int(rng.integers(1, 10_000)),
            n_neg=int(rng.integers(1, 10_000)),
            n_unl=int(rng.integers(1, 10_000)),
        )
        v_pn, v_pu, v_nu = bounds.bound_values(comp, params)
        if (bounds.alpha_pu_pn(comp) < 1.0) != (v_pu < v_pn):
            bad += 1
        if (bounds.alpha_nu_pn(comp) < 1.0) != (v_nu < v_pn):
            bad += 1
    return bad == 0, f"{cases} random inputs, {bad} violations"


def _verify_reciprocity(seed: int, cases: int = 10_000) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        comp = bounds.ComparatorInput(
            pi=rng.uniform(0.02, 0.98),
            n_pos=int(rng.integers(1, 10_000)),
            n_neg=int(rng.integers(1, 10_000)),
        )
        res = bounds.alpha_star(comp, case="a")
        worst = max(worst, abs(res.alpha_star_pu * res.alpha_star_nu - 1.0))
    return worst <= 1e-12, f"{cases} random inputs, worst product error {worst:.2e}"


def _verify_unbiasedness(seed: int, resamples: int = 10_000) -> tuple[bool, str]:
    from .models import DecisionModel

    rng = np.random.default_rng(seed)
    model = DecisionModel(weights=rng.normal(size=2), bias=float(rng.normal(scale=0.2)))
    pi, n = 0.5, 50
    feats, labels = gen_gaussian_labeled(1_000_000, pi, rng)
    scores = model.decision_values(feats)
    loss_vals = np.where(
        labels == 1, losses.scaled_ramp(scores, +1), losses.scaled_ramp(scores, -1)
    )
    true_value = float(np.mean(loss_vals))
    se_true = float(np.std(loss_vals, ddof=1)) / math.sqrt(loss_vals.size)

    from .risk import risk_nu, risk_pn, risk_pu

    estimates: dict[str, list[float]] = {"PN": [], "PU": [], "NU": []}
    for _ in range(resamples):
        triple = gen_gaussian_artificial(n, n, n, pi, rng)
        estimates["PN"].append(risk_pn(model, triple.x_pos, triple.x_neg, pi, losses.SCALED_RAMP))
        estimates["PU"].append(risk_pu(model, triple.x_pos, triple.x_unl, pi, losses.SCALED_RAMP))
        estimates["NU"].append(risk_nu(model, triple.x_unl, triple.x_neg, pi, losses.SCALED_RAMP))
    details = []
    ok = True
    for mode, vals in estimates.items():
        arr = np.asarray(vals)
        gap = abs(float(np.mean(arr)) - true_value)
        combined = math.hypot(float(np.std(arr, ddof=1)) / math.sqrt(arr.size), se_true)
        ok &= gap <= 5.0 * combined
        details.append(f"{mode} gap {gap:.2e} vs 5se {5 * combined:.2e}")
    return ok, "; ".join(details)


def _verify_rademacher(seed: int) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    checked = 0
    for n in (1, 10, 100, 1000):
        for _ in range(5):
            d = int(rng.integers(1, 8))
            x = rng.normal(size=(n, d))
            norms = np.linalg.norm(x, axis=1, keepdims=True)
            x = x / np.maximum(norms, 1e-12) * rng.uniform(0.1, 1.0, size=(n, 1))
            res = bounds.rademacher_mc_check(x, c_w=2.0, c_phi=1.0,
                                             num_sigma_draws=2000, seed=rng)
            if not res.passed:
                return False, f"failed at n={n}: estimate {res.estimate} > bound {res.bound}"
            checked += 1
    return True, f"{checked} samples across n in (1, 10, 100, 1000)"


def verify(seed: int = 0, fast: bool = False) -> list[tuple[str, bool, str]]:
    """Run the invariant suites and return (name, passed, detail) triples."""
    resamples = 2_000 if fast else 10_000
    cases = 2_000 if fast else 10_000
    return [
        ("calibration", *_verify_calibration()),
        ("comparator-equivalence", *_verify_comparator_equivalence(seed, cases)),
        ("alpha-star-reciprocity", *_verify_reciprocity(seed, cases)),
        ("unbiasedness", *_verify_unbiasedness(seed, resamples)),
        ("rademacher", *_verify_rademacher(seed)),
    ]
