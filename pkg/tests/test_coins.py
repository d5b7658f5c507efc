import numpy as np
import pytest

from learnreg.exceptions import InputError
from learnreg.problems.coins import (
    THETA_EPS,
    CoinModel,
    CoinProblem,
    SymmetricCoinsOracle,
    bayes_optimal_test_loss,
    coins_features,
    coins_generate,
    coins_losses,
    coins_oracle,
    coins_train,
    logit_beta_penalty,
)

# Add-one smoothing with one flip per coin estimates 2/3 after heads and 1/3 after
# tails. Against a bias p the loss is a when the estimate leans the right way and b
# otherwise, with a = -log(2/3) and b = -log(1/3).
A, B = -np.log(2 / 3), -np.log(1 / 3)


def analytic_add_one_loss():
    # E over p ~ U(0,1) of p^2 a + 2 p (1 - p) b + (1 - p)^2 a  =  a (2/3) + b (1/3)
    return A * 2 / 3 + B * 1 / 3


def test_analytic_value():
    assert analytic_add_one_loss() == pytest.approx(0.6365141683, abs=1e-9)


def test_generate_mean_and_shape():
    prob = coins_generate(100_000, 1, 1.0, 1.0, seed=1)
    assert prob.n_coins == 100_000 and prob.n_flips == 100_000
    assert abs(prob.true_biases.mean() - 0.5) <= 0.005
    assert set(np.unique(prob.heads)) <= {0, 1}


def test_generate_single_coin_and_determinism():
    prob = coins_generate(1, 1, seed=4)
    assert prob.heads[0] in (0, 1)
    a, b = coins_generate(50, 3, 2.0, 5.0, seed=9), coins_generate(50, 3, 2.0, 5.0, seed=9)
    np.testing.assert_array_equal(a.true_biases, b.true_biases)
    np.testing.assert_array_equal(a.heads, b.heads)


@pytest.mark.parametrize("args", [(0, 1, 1, 1), (5, 0, 1, 1), (5, 1, 0, 1), (5, 1, 1, -2)])
def test_generate_rejects_bad_parameters(args):
    with pytest.raises(InputError):
        coins_generate(*args)


def test_problem_invariants_are_checked():
    with pytest.raises(InputError):
        CoinProblem(1, 1, 1.0, 1.0, 0, np.array([1.0]), np.array([1]))
    with pytest.raises(InputError):
        CoinProblem(1, 1, 1.0, 1.0, 0, np.array([0.5]), np.array([2]))


def _prob(heads, m=1, biases=None, a=1.0, b=1.0):
    heads = np.asarray(heads)
    biases = np.full(heads.shape, 0.5) if biases is None else np.asarray(biases, dtype=float)
    return CoinProblem(len(heads), m, a, b, 0, biases, heads)


def test_train_examples():
    prob = _prob([1, 0])
    np.testing.assert_allclose(coins_train(prob, (1, 1)).theta, [2 / 3, 1 / 3])
    theta = coins_train(prob, (0, 0)).theta
    assert theta[0] == 1 - THETA_EPS and theta[1] == THETA_EPS


def test_train_rejects_negative_weights():
    with pytest.raises(InputError):
        coins_train(_prob([1]), (-0.5, 1.0))


def test_features_examples():
    q = coins_features(CoinModel(np.full(10, 0.5)), 10)
    np.testing.assert_allclose(q, [np.log(2), np.log(2)])
    q = coins_features(CoinModel(np.full(10, 2 / 3)), 10)
    np.testing.assert_allclose(q, [np.log(1.5), np.log(3)])
    assert q.shape == (2,)


def test_truth_minimizes_exact_test_loss():
    rng = np.random.default_rng(0)
    p = rng.uniform(0.05, 0.95, 200)
    prob = _prob(rng.binomial(1, p), biases=p)
    _, at_truth, _ = coins_losses(prob, CoinModel(p))
    entropy = -(p * np.log(p) + (1 - p) * np.log(1 - p)).mean()
    assert at_truth == pytest.approx(entropy, rel=1e-12)
    for _ in range(20):
        other = CoinModel(np.clip(p + rng.normal(0, 0.05, p.size), 0.01, 0.99))
        assert coins_losses(prob, other)[1] >= at_truth


def test_add_one_smoothing_test_loss():
    prob = coins_generate(100_000, 1, 1.0, 1.0, seed=42)
    _, exact, _ = coins_losses(prob, coins_train(prob, (1, 1)))
    assert exact == pytest.approx(0.6365, abs=0.005)
    assert bayes_optimal_test_loss(prob) == exact


def test_l_hat_formula_with_several_flips():
    prob = _prob([0, 2, 3], m=3)
    theta = np.array([0.2, 0.5, 0.9])
    # per flip: 9 flips in total
    expected = -(3 * np.log(0.8) + 3 * np.log(0.5) + 3 * np.log(0.9)) / 9
    assert coins_losses(prob, CoinModel(theta))[0] == pytest.approx(expected)


@pytest.mark.parametrize("m, a, b", [(1, 1.0, 1.0), (3, 2.0, 0.5), (5, 0.7, 4.0)])
def test_perfect_regularizer_identity(m, a, b):
    prob = coins_generate(2000, m, a, b, seed=m)
    rng = np.random.default_rng(m)
    values = []
    for _ in range(100):
        model = CoinModel(rng.uniform(0.01, 0.99, prob.n_coins))
        l_hat, _, posterior = coins_losses(prob, model)
        values.append(l_hat + logit_beta_penalty(prob, model) - (m + a + b) / m * posterior)
    assert np.ptp(values) < 1e-9


def test_train_is_the_penalized_minimizer():
    rng = np.random.default_rng(5)
    prob = coins_generate(300, 4, 1.5, 2.5, seed=5)

    def objective(lam, theta):
        model = CoinModel(theta)
        return coins_losses(prob, model)[0] + lam @ coins_features(model, prob.n_flips)

    for _ in range(20):
        lam = rng.uniform(0, 5, 2)
        theta = coins_train(prob, lam).theta
        base = objective(lam, theta)
        for _ in range(10):
            moved = np.clip(theta + rng.normal(0, 0.05, theta.size), 1e-6, 1 - 1e-6)
            assert base <= objective(lam, moved) + 1e-12


def test_prior_weights_give_the_posterior_mean():
    prob = coins_generate(500, 3, 2.0, 0.5, seed=8)
    np.testing.assert_array_equal(coins_train(prob, (2.0, 0.5)).theta, prob.posterior_means)


def test_oracle_records():
    prob = coins_generate(100_000, 1, seed=42)
    oracle = coins_oracle(prob)
    assert oracle.k == 2
    rec = oracle.train([1.0, 1.0])
    assert rec.v == rec.test_loss == pytest.approx(0.6365, abs=0.005)
    blown = oracle.train([0.0, 0.0])
    assert np.isfinite(blown.v) and blown.v > 5
    again = oracle.train([1.0, 1.0])
    assert (again.v, again.l_hat, tuple(again.q)) == (rec.v, rec.l_hat, tuple(rec.q))


def test_symmetric_oracle_matches_full_oracle():
    prob = coins_generate(1000, 1, 1.0, 1.0, seed=3)
    sym = SymmetricCoinsOracle(prob).train([2.0])
    full = coins_oracle(prob).train([2.0, 2.0])
    assert sym.v == full.v
    assert sym.q[0] == pytest.approx(full.q.sum())


def test_problem_json_roundtrip():
    prob = coins_generate(20, 2, 1.5, 0.5, seed=11)
    back = CoinProblem.from_json(prob.to_json())
    np.testing.assert_array_equal(back.heads, prob.heads)
    np.testing.assert_array_equal(back.true_biases, prob.true_biases)
    with pytest.raises(InputError):
        CoinProblem.from_json({"format": "other"})
