"""CCCP trainer: descent, stationarity, restarts, CV, and contract errors."""

import numpy as np
import pytest

from pnu.datasets import SampleTriple, gen_gaussian_artificial, gen_gaussian_labeled
from pnu.losses import ZERO_ONE
from pnu.models import DecisionModel
from pnu.risk import risk_true_mc
from pnu import training
from pnu.training import (
    CvConfig,
    DivergenceError,
    ModelTemplate,
    TrainConfig,
    build_objective,
    cccp_outer_step,
    cross_validate,
    default_cv_config,
    median_heuristic_width,
    train,
)

TOY_POS = np.array([[1.0, 0.5], [1.5, -0.2], [0.8, 0.3]])
TOY_NEG = np.array([[-1.2, -0.4], [-0.7, -0.9], [-1.0, 0.1]])


def _toy_triple():
    return SampleTriple(x_pos=TOY_POS, x_neg=TOY_NEG, x_unl=np.empty((0, 2)), pi=0.5)


def _grid_oracle(x_pos, x_neg, lam=1e-3):
    """Brute-force minimum of the PN objective over a coarse (w, b) grid.

    Independent of the CCCP path: enumerates w in [-4,4]^2 and b in [-2,2]
    at step 0.1 and evaluates the weighted ramp sum directly.
    """
    w1 = np.arange(-4.0, 4.0001, 0.1)
    w2 = np.arange(-4.0, 4.0001, 0.1)
    bs = np.arange(-2.0, 2.0001, 0.1)
    W1, W2, B = (a.ravel() for a in np.meshgrid(w1, w2, bs, indexing="ij"))
    X = np.vstack([x_pos, x_neg])
    y = np.concatenate([np.ones(len(x_pos)), -np.ones(len(x_neg))])
    c = np.full(len(X), 0.5 / len(x_pos))
    margins = X[:, 0][:, None] * W1[None, :] + X[:, 1][:, None] * W2[None, :] + B[None, :]
    ramp = np.clip((1.0 - margins * y[:, None]) * 0.5, 0.0, 1.0)
    values = c @ ramp + 0.5 * lam * (W1 ** 2 + W2 ** 2)
    return float(values.min())


class TestOuterStep:
    def test_first_step_from_zero_strictly_decreases(self):
        """Checked against the brute-force grid oracle on the toy set."""
        triple = _toy_triple()
        obj = build_objective("PN", triple, None, 1e-3)
        oracle_min = _grid_oracle(TOY_POS, TOY_NEG)
        assert oracle_min == pytest.approx(6.85e-4, rel=1e-6)  # frozen from the oracle

        model0 = DecisionModel(weights=np.zeros(2), bias=0.0)
        before = obj.value(model0.weights, model0.bias)
        assert before == pytest.approx(0.5, abs=1e-12)
        stepped = cccp_outer_step(model0, obj, TrainConfig())
        after = obj.value(stepped.weights, stepped.bias)
        assert after < before
        assert after < 0.01  # separable: one convex solve nearly finishes the job
        assert after >= 0.0  # sanity: ramp sums and the quadratic are nonnegative here

    def test_trained_model_beats_grid_oracle(self):
        triple = _toy_triple()
        obj = build_objective("PN", triple, None, 1e-3)
        model = train("PN", triple, config=TrainConfig(seed=0))
        assert obj.value(model.weights, model.bias) <= _grid_oracle(TOY_POS, TOY_NEG) + 1e-9

    def test_stationary_point_is_a_fixed_point(self):
        triple = _toy_triple()
        obj = build_objective("PN", triple, None, 1e-3)
        config = TrainConfig(seed=0)
        model = train("PN", triple, config=config)
        before = obj.value(model.weights, model.bias)
        again = cccp_outer_step(model, obj, config)
        after = obj.value(again.weights, again.bias)
        assert before - after <= config.outer_tol
        assert after <= before + training.MONOTONICITY_SLACK

    def test_pure_hinge_when_concave_inactive(self):
        """Margins inside the hinge region make the split a plain hinge problem."""
        triple = _toy_triple()
        obj = build_objective("PN", triple, None, 1e-3)
        w, b = np.zeros(2), 0.0  # all margins 0, none below -1
        s = np.where(obj.margins(w, b) * obj.labels < -1.0, 0.5 * obj.labels, 0.0)
        assert np.all(s == 0.0)

    def test_dimension_mismatch_rejected(self):
        obj = build_objective("PN", _toy_triple(), None, 1e-3)
        model = DecisionModel(weights=np.zeros(3), bias=0.0)
        with pytest.raises(ValueError, match="dimension"):
            cccp_outer_step(model, obj, TrainConfig())


class TestTrain:
    def test_monotone_objectives_and_counters(self):
        training.reset_run_stats()
        triple = gen_gaussian_artificial(40, 10, 60, 0.5, 0)
        for mode in ("PN", "PU", "NU"):
            trace = []
            train(mode, triple, config=TrainConfig(seed=1), trace=trace)
            for record in trace:
                steps = np.diff(record["objectives"])
                assert np.all(steps <= training.MONOTONICITY_SLACK)
        stats = training.run_stats()
        assert stats["runs"] == 3
        assert stats["monotonicity_violations"] == 0
        assert stats["outer_steps"] > 0

    def test_restart_dominance(self):
        triple = gen_gaussian_artificial(30, 30, 30, 0.5, 2)
        obj = build_objective("PU", triple, None, 1e-3)
        trace = []
        model = train("PU", triple, config=TrainConfig(seed=3, restarts=4), trace=trace)
        finals = [record["objectives"][-1] for record in trace]
        assert len(finals) == 4
        returned = obj.value(model.weights, model.bias)
        assert returned == pytest.approx(min(finals), abs=1e-12)

    def test_missing_sample_set_rejected(self):
        triple = gen_gaussian_artificial(0, 5, 5, 0.5, 4)
        with pytest.raises(ValueError, match="x_pos"):
            train("PU", triple)
        with pytest.raises(ValueError, match="unknown mode"):
            train("XX", gen_gaussian_artificial(2, 2, 2, 0.5, 0))

    def test_non_finite_data_flagged(self):
        bad = SampleTriple(
            x_pos=np.array([[np.nan, 0.0]]), x_neg=-TOY_NEG, x_unl=np.empty((0, 2)), pi=0.5
        )
        with pytest.raises(ValueError, match="non-finite"):
            train("PN", bad)

    def test_permutation_invariance(self):
        """Row order inside the sets does not move the holdout error."""
        rng = np.random.default_rng(5)
        triple = gen_gaussian_artificial(25, 25, 40, 0.5, 6)
        shuffled = SampleTriple(
            x_pos=triple.x_pos[rng.permutation(25)],
            x_neg=triple.x_neg[rng.permutation(25)],
            x_unl=triple.x_unl[rng.permutation(40)],
            pi=0.5,
        )
        holdout = gen_gaussian_labeled(20_000, 0.5, 7)
        config = TrainConfig(seed=8)
        err_a = risk_true_mc(train("PU", triple, config=config), holdout, ZERO_ONE)
        err_b = risk_true_mc(train("PU", shuffled, config=config), holdout, ZERO_ONE)
        assert err_a == err_b

    def test_regularization_path(self):
        """Growing lambda shrinks the weights toward zero.

        The zero-one holdout error is scale-blind, so the vanishing-norm
        model can still classify by direction; the degenerate error limits
        apply to genuinely constant scores, checked separately below.
        """
        triple = gen_gaussian_artificial(50, 50, 1, 0.5, 9)
        norms = []
        for lam in (1e-3, 1.0, 1e3, 1e6):
            model = train("PN", triple, config=TrainConfig(lam=lam, seed=10))
            norms.append(float(np.linalg.norm(model.weights)))
        assert all(a > b for a, b in zip(norms, norms[1:]))
        assert norms[-1] < 1e-3

        feats = np.zeros((10, 2))
        labels = np.array([1] * 5 + [-1] * 5)
        zero_scores = DecisionModel(weights=np.zeros(2), bias=0.0)
        assert risk_true_mc(zero_scores, (feats, labels), ZERO_ONE) == 0.5
        constant_sign = DecisionModel(weights=np.zeros(2), bias=2.0)
        assert risk_true_mc(constant_sign, (feats, labels), ZERO_ONE) == 0.5  # min(pi, 1-pi)

    def test_divergence_guard(self, monkeypatch):
        """An ascent direction (broken gradient) must be caught, with a trace."""
        monkeypatch.setattr(training, "_calibrate_step", lambda *a: 1.0)
        real_grad = training._convex_subgrad
        monkeypatch.setattr(training, "_convex_subgrad", lambda *a: -real_grad(*a))
        with pytest.raises(DivergenceError) as err:
            train("PN", _toy_triple(), config=TrainConfig(seed=0))
        assert len(err.value.trace) >= 10


class TestKernelTraining:
    def test_anchor_sets_mirror_the_mode(self):
        triple = gen_gaussian_artificial(8, 6, 10, 0.5, 12)
        config = TrainConfig(seed=13, inner_max_iter=50, cccp_max_outer=5)
        template = ModelTemplate(kind="kernel", width=1.0)
        expected = {"PN": 14, "PU": 18, "NU": 16}
        for mode, n_anchors in expected.items():
            model = train(mode, triple, template, config)
            assert model.feature_map.anchors.shape == (n_anchors, 2)
            assert model.weights.size == n_anchors

    def test_kernel_model_learns_a_toy_problem(self):
        triple = gen_gaussian_artificial(60, 60, 1, 0.5, 14)
        model = train("PN", triple, ModelTemplate(kind="kernel", width=None),
                      TrainConfig(seed=15))
        err = risk_true_mc(model, gen_gaussian_labeled(20_000, 0.5, 16), ZERO_ONE)
        assert err < 0.25


class TestMedianHeuristic:
    def test_matches_direct_median(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(40, 3))
        direct = np.median(
            [np.linalg.norm(a - b) for i, a in enumerate(x) for b in x[i + 1:]]
        )
        assert median_heuristic_width(x) == pytest.approx(float(direct), rel=1e-9)

    def test_degenerate_rows_fall_back(self):
        assert median_heuristic_width(np.zeros((5, 2))) == 1.0


class TestCrossValidation:
    def test_single_cell_grid(self):
        triple = gen_gaussian_artificial(15, 10, 20, 0.5, 18)
        cv = CvConfig(folds=5, width_grid=(1.0,), lambda_grid=(1e-3,))
        width, lam, table = cross_validate(
            "PU", triple, ModelTemplate(kind="kernel"), cv,
            TrainConfig(seed=19, inner_max_iter=60, cccp_max_outer=4),
        )
        assert (width, lam) == (1.0, 1e-3)
        assert len(table) == 1

    def test_duplicates_deduplicated_and_argmin_consistent(self):
        triple = gen_gaussian_artificial(15, 10, 20, 0.5, 20)
        cv = CvConfig(folds=5, width_grid=(1.0, 1.0, 2.0), lambda_grid=(1e-3, 1e-3, 1e-1))
        config = TrainConfig(seed=21, inner_max_iter=60, cccp_max_outer=4)
        width, lam, table = cross_validate("PU", triple, ModelTemplate(kind="kernel"), cv, config)
        assert len(table) == 4  # 2 widths x 2 lambdas after dedup
        best_risk = min(risk for _, _, risk in table)
        chosen = [row for row in table if row[0] == width and row[1] == lam]
        assert chosen[0][2] == best_risk

    def test_tie_breaks_toward_larger_width_then_lambda(self):
        table = [
            (0.5, 1e-4, 0.3), (0.5, 1e-2, 0.3),
            (2.0, 1e-4, 0.3), (2.0, 1e-2, 0.3),
        ]
        assert training._select_best(table) == (2.0, 1e-2, 0.3)
        table[0] = (0.5, 1e-4, 0.25)  # a strict winner beats any tie-break
        assert training._select_best(table) == (0.5, 1e-4, 0.25)
        linear = [(None, 1e-4, 0.4), (None, 1e-2, 0.4)]
        assert training._select_best(linear) == (None, 1e-2, 0.4)

    def test_fold_emptying_rejected(self):
        triple = gen_gaussian_artificial(4, 10, 10, 0.5, 24)
        cv = CvConfig(folds=5, width_grid=(1.0,), lambda_grid=(1e-3,))
        with pytest.raises(ValueError, match="x_pos"):
            cross_validate("PN", triple, ModelTemplate(kind="kernel"), cv, TrainConfig())

    def test_linear_template_ignores_width(self):
        triple = gen_gaussian_artificial(15, 15, 1, 0.5, 25)
        cv = CvConfig(folds=3, width_grid=(), lambda_grid=(1e-4, 1e-2))
        width, lam, table = cross_validate("PN", triple, ModelTemplate(kind="linear"), cv,
                                           TrainConfig(seed=26, inner_max_iter=60))
        assert width is None
        assert len(table) == 2

    def test_default_grid_shape(self):
        rows = np.random.default_rng(27).normal(size=(30, 2))
        cv = default_cv_config(rows)
        assert cv.folds == 5
        assert len(cv.width_grid) == 5
        assert len(cv.lambda_grid) == 5
        med = median_heuristic_width(rows)
        assert cv.width_grid == (0.25 * med, 0.5 * med, med, 2 * med, 4 * med)


class TestConfigs:
    def test_train_config_from_dict_accepts_lambda_key(self):
        cfg = TrainConfig.from_dict({"lambda": 0.5, "restarts": 3})
        assert cfg.lam == 0.5
        assert cfg.restarts == 3

    def test_train_config_json_roundtrip(self, tmp_path):
        path = tmp_path / "train.json"
        path.write_text('{"lambda": 0.01, "inner_max_iter": 100}', encoding="utf-8")
        cfg = TrainConfig.from_json(path)
        assert cfg.lam == 0.01
        assert cfg.inner_max_iter == 100

    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(lam=-1.0)
        with pytest.raises(ValueError):
            TrainConfig(restarts=0)
        with pytest.raises(ValueError):
            CvConfig(folds=1, lambda_grid=(1e-3,))
        with pytest.raises(ValueError):
            CvConfig(folds=5, lambda_grid=())
        with pytest.raises(ValueError):
            ModelTemplate(kind="spline")
