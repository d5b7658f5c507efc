import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.special import expit
from sklearn.base import clone

from learnreg.exceptions import InputError
from learnreg.problems.logreg import (
    LogRegConfig,
    LogRegProblem,
    PenalizedLogisticRegression,
    accuracy,
    dropout_losses,
    log_loss,
    logreg_features,
    logreg_generate,
    logreg_oracle,
    penalized_gradient,
    penalized_objective,
)

SMALL = LogRegConfig(seed=3, n_train=60, n_valid=200, n_test=200, dim=5, n_dropout_masks=256)


@pytest.fixture(scope="module")
def problem():
    return logreg_generate(SMALL)


def test_zero_weights_features(problem):
    np.testing.assert_allclose(logreg_features(np.zeros(SMALL.dim), problem), [0, 0, np.log(2), 0], atol=1e-15)


def test_norm_homogeneity(problem):
    theta = np.random.default_rng(0).normal(size=SMALL.dim)
    f1, f2 = logreg_features(theta, problem), logreg_features(2 * theta, problem)
    assert f2[0] == pytest.approx(2 * f1[0])
    assert f2[1] == pytest.approx(4 * f1[1])


def test_dropout_masks_are_antithetic_pairs(problem):
    masks = problem.dropout_masks
    half = masks.shape[0] // 2
    np.testing.assert_array_equal(masks[half:], ~masks[:half])
    assert abs(masks.mean() - 0.5) < 0.01


def test_dropout_feature_standard_error():
    # reference model: the validation-best member of an L2 sweep
    prob = logreg_generate(LogRegConfig(seed=1))
    oracle = logreg_oracle(prob, ("l2",))
    recs = [oracle.train([lam]) for lam in np.geomspace(1e-4, 1, 13)]
    theta = min(recs, key=lambda r: r.v).extra["theta"]
    losses = dropout_losses(theta, prob)
    assert losses.shape == (1024,)
    pairs = (losses[:512] + losses[512:]) / 2
    assert pairs.std(ddof=1) / np.sqrt(pairs.size) < 1e-3
    assert logreg_features(theta, prob)[3] > 0


def test_crushing_l2_penalty():
    prob = logreg_generate(LogRegConfig(seed=2))
    rec = logreg_oracle(prob).train([0.0, 1e6, 0.0])
    theta = rec.extra["theta"]
    assert np.linalg.norm(theta) < 1e-3
    assert rec.l_hat == pytest.approx(np.log(2), abs=1e-3)


def test_unregularized_run_matches_reference_loop(problem):
    X, y = problem.X_train, problem.y_train
    n = X.shape[0]
    step = 4.0 * n / np.linalg.norm(X, 2) ** 2
    theta = np.zeros(X.shape[1])
    for _ in range(500):
        theta = theta - step * (X.T @ (expit(X @ theta) - y) / n)
    got = logreg_oracle(problem).fit_model([0.0, 0.0, 0.0]).coef_
    np.testing.assert_array_equal(got, theta)


def test_l1_soft_threshold_zeroes_weights(problem):
    theta = PenalizedLogisticRegression(l1=10.0).fit(problem.X_train, problem.y_train).coef_
    np.testing.assert_array_equal(theta, 0.0)


def test_gradient_matches_finite_differences(problem):
    rng = np.random.default_rng(1)
    X, y = problem.X_train, problem.y_train
    for _ in range(10):
        theta = rng.normal(size=SMALL.dim)
        l2, ls = rng.uniform(0, 1, 2)
        g = penalized_gradient(theta, X, y, l2, ls)
        h = 1e-5
        fd = np.array(
            [
                (penalized_objective(theta + h * e, X, y, l2, ls) - penalized_objective(theta - h * e, X, y, l2, ls)) / (2 * h)
                for e in np.eye(SMALL.dim)
            ]
        )
        assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) < 1e-5


def test_penalized_objective_decreases_with_training(problem):
    X, y = problem.X_train, problem.y_train
    est = PenalizedLogisticRegression(l1=0.01, l2=0.1, label_smoothing=0.2).fit(X, y)
    start = penalized_objective(np.zeros(SMALL.dim), X, y, 0.1, 0.2, 0.01)
    assert penalized_objective(est.coef_, X, y, 0.1, 0.2, 0.01) < start


def test_oracle_determinism(problem):
    oracle = logreg_oracle(problem)
    a, b = oracle.train([0.01, 0.1, 0.2]), oracle.train([0.01, 0.1, 0.2])
    assert (a.v, a.l_hat, a.test_loss) == (b.v, b.l_hat, b.test_loss)
    np.testing.assert_array_equal(a.q, b.q)


def test_generation_is_deterministic_and_fast():
    cfg = LogRegConfig(seed=9, n_train=300, n_valid=300, n_test=300, dim=2)
    t0 = time.perf_counter()
    a = logreg_generate(cfg)
    assert time.perf_counter() - t0 < 1.0
    b = logreg_generate(cfg)
    np.testing.assert_array_equal(a.X_train, b.X_train)
    np.testing.assert_array_equal(a.dropout_masks, b.dropout_masks)


def test_labels_are_balanced(problem):
    for y in (problem.y_train, problem.y_valid, problem.y_test):
        assert abs(y.mean() - 0.5) <= 0.05


def test_bayes_accuracy_matches_monte_carlo():
    cfg = LogRegConfig(seed=4, dim=3)
    prob = logreg_generate(cfg)
    rng = np.random.default_rng(0)
    n = 200_000
    y = rng.integers(0, 2, n)
    X = rng.normal(0.0, cfg.sigma, (n, cfg.dim)) + np.where(y[:, None] == 1, prob.mean, -prob.mean)
    mc = np.mean((X @ prob.mean > 0) == (y == 1))
    assert mc == pytest.approx(cfg.bayes_accuracy, abs=0.005)


def test_unregularized_accuracy_near_bayes():
    cfg = LogRegConfig(seed=5, n_train=1000, n_test=2000, dim=5)
    prob = logreg_generate(cfg)
    rec = logreg_oracle(prob).train([0.0, 0.0, 0.0])
    assert abs(rec.extra["accuracy"] - cfg.bayes_accuracy) <= 0.05


@pytest.mark.parametrize(
    "kwargs", [{"n_train": 5}, {"dim": 0}, {"separation": 0.0}, {"sigma": -1.0}, {"dropout_p": 1.0}, {"n_dropout_masks": 0}]
)
def test_invalid_config(kwargs):
    with pytest.raises(InputError):
        replace(SMALL, **kwargs)


def test_config_from_json():
    assert LogRegConfig.from_json('{"seed": 7, "dim": 3}') == LogRegConfig(seed=7, dim=3)
    with pytest.raises(InputError):
        LogRegConfig.from_json({"bogus": 1})


@pytest.mark.parametrize("mask", [(), ("dropout",), ("l2", "l2"), ("l3",)])
def test_invalid_trainable_mask(problem, mask):
    with pytest.raises(InputError):
        logreg_oracle(problem, mask)


def test_oracle_subset_and_negative_weights(problem):
    oracle = logreg_oracle(problem, ("l2",))
    assert oracle.k == 1
    rec = oracle.train([0.1])
    assert rec.q[0] == pytest.approx(rec.extra["features"][1])
    with pytest.raises(InputError):
        oracle.train([-0.1])


def test_record_losses_are_split_losses(problem):
    rec = logreg_oracle(problem).train([0.0, 0.05, 0.0])
    theta = rec.extra["theta"]
    assert rec.v == log_loss(theta, problem.X_valid, problem.y_valid)
    assert rec.test_loss == log_loss(theta, problem.X_test, problem.y_test)
    assert rec.extra["accuracy"] == accuracy(theta, problem.X_test, problem.y_test)


def test_estimator_api(problem):
    est = PenalizedLogisticRegression(l2=0.1)
    assert clone(est).get_params()["l2"] == 0.1
    est.fit(problem.X_train, problem.y_train)
    proba = est.predict_proba(problem.X_test)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    assert est.score(problem.X_test, problem.y_test) > 0.6
    with pytest.raises(InputError):
        PenalizedLogisticRegression(l1=-1.0).fit(problem.X_train, problem.y_train)


def test_problem_json_roundtrip(problem):
    back = LogRegProblem.from_json(problem.to_json())
    np.testing.assert_array_equal(back.X_train, problem.X_train)
    np.testing.assert_array_equal(back.dropout_masks, problem.dropout_masks)
