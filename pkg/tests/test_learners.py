import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothie_hpo.data_io import Dataset
from smoothie_hpo.errors import InsufficientClassData, NumericOverflow
from smoothie_hpo.fixtures import make_blobs
from smoothie_hpo.learners import (FFConfig, FFState, LRConfig, evaluate,
                                   fit_gnb, gnb_log_likelihood, loss_and_grads,
                                   predict, softmax, train_ff, train_lr,
                                   _init_params)


def linearly_separable(m=60, seed=0):
    """Two blobs far apart; verified separable by a brute hyperplane check."""
    d = make_blobs(m=m, seed=seed, cluster_std=1.0, center_span=8.0)
    w = (d.X[d.y == 1].mean(axis=0) - d.X[d.y == 0].mean(axis=0))
    margin = d.X @ w - (d.X @ w).mean()
    assert ((margin > 0) == (d.y == 1)).all(), "fixture not separable"
    return d


class TestFF:
    def test_separable_converges(self):
        d = linearly_separable()
        cfg = FFConfig(layers=1, units_per_layer=4, epochs=200,
                       learning_rate=0.1, batch_size=16, seed=0)
        state = train_ff(d, cfg)
        assert (predict(state, d.X) == d.y).all()

    def test_probe_single_epoch(self):
        d = make_blobs(m=40, seed=1)
        cfg = FFConfig(layers=2, units_per_layer=3, epochs=50, seed=1)
        state = train_ff(d, cfg, epochs_override=1)
        assert len(state.loss_history) == 1

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(2)
        z = rng.normal(size=(30, 5)) * 50
        s = softmax(z)
        np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-9)
        assert (s >= 0).all()

    @settings(max_examples=30, deadline=None)
    @given(scale=st.floats(0.01, 100), seed=st.integers(0, 1000))
    def test_softmax_normalized_property(self, scale, seed):
        z = np.random.default_rng(seed).normal(size=(4, 3)) * scale
        np.testing.assert_allclose(softmax(z).sum(axis=1), 1.0, atol=1e-9)

    def test_training_deterministic(self):
        d = make_blobs(m=50, seed=3)
        cfg = FFConfig(layers=1, units_per_layer=4, epochs=5, seed=7)
        s1 = train_ff(d, cfg)
        s2 = train_ff(d, cfg)
        assert s1.out_weight_norm == s2.out_weight_norm
        for W1, W2 in zip(s1.weights, s2.weights):
            np.testing.assert_array_equal(W1, W2)

    def test_gradient_check_small_net(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(10, 2))
        y = rng.integers(0, 2, size=10)
        weights, biases = _init_params(2, FFConfig(layers=1,
                                                   units_per_layer=3,
                                                   seed=4), 2, rng)
        _, gW, gb = loss_and_grads(weights, biases, X, y, 0.05, 0.01)
        h = 1e-6
        for params, grads in ((weights, gW), (biases, gb)):
            for l, P in enumerate(params):
                flat = P.ravel()
                for idx in range(flat.size):
                    orig = flat[idx]
                    flat[idx] = orig + h
                    up, _, _ = loss_and_grads(weights, biases, X, y, 0.05, 0.01)
                    flat[idx] = orig - h
                    dn, _, _ = loss_and_grads(weights, biases, X, y, 0.05, 0.01)
                    flat[idx] = orig
                    fd = (up - dn) / (2 * h)
                    assert fd == pytest.approx(grads[l].ravel()[idx],
                                               rel=1e-4, abs=1e-8)

    def test_numeric_overflow_raises(self):
        d = make_blobs(m=40, seed=5)
        big = d.replace(X=d.X * 1e150)
        cfg = FFConfig(layers=0, epochs=3, learning_rate=1e200, seed=5)
        with np.errstate(all="ignore"), pytest.raises(NumericOverflow):
            train_ff(big, cfg)

    def test_activation_cache_shape(self):
        d = make_blobs(m=30, seed=6)
        cfg = FFConfig(layers=1, units_per_layer=4, epochs=2, seed=6)
        state = train_ff(d, cfg)
        assert state.activation_norms.shape == (30,)
        assert state.activation_norm_sup == state.activation_norms.max()


class TestLR:
    def test_boundary_sign_matches_on_separable_1d(self):
        rng = np.random.default_rng(7)
        X = np.concatenate([rng.uniform(-3, -0.5, 30),
                            rng.uniform(0.5, 3, 30)]).reshape(-1, 1)
        y = (X[:, 0] > 0).astype(int)
        d = Dataset(X=X, y=y, k=2, feature_names=["f"])
        state = train_lr(d, LRConfig(penalty="l2", C=10.0, epochs=300,
                                     learning_rate=0.3, seed=7))
        assert (predict(state, d.X) == y).all()

    def test_zero_learning_rate_keeps_init(self):
        d = make_blobs(m=20, seed=8)
        cfg = LRConfig(penalty="l2", C=1.0, epochs=1, learning_rate=0.0,
                       seed=8)
        state = train_lr(d, cfg)
        rng = np.random.default_rng(8)
        W0, b0 = _init_params(d.n, FFConfig(layers=0, units_per_layer=1,
                                            seed=8), d.k, rng)
        np.testing.assert_array_equal(state.W, W0[0])
        np.testing.assert_array_equal(state.bias, b0[0])

    def test_weaker_regularization_larger_weights(self):
        d = make_blobs(m=80, seed=9)
        def norm_at(C):
            cfg = LRConfig(penalty="l2", C=C, epochs=60, learning_rate=0.1,
                           seed=9)
            return train_lr(d, cfg).out_weight_norm
        assert norm_at(10.0) > norm_at(0.1)

    def test_penalty_lambda_mapping(self):
        assert LRConfig(penalty="l2", C=0.1).l2_lambda == pytest.approx(10.0)
        assert LRConfig(penalty="l2", C=0.1).l1_lambda == 0.0
        assert LRConfig(penalty="l1", C=2.0).l1_lambda == pytest.approx(0.5)
        both = LRConfig(penalty="l1l2", C=1.0)
        assert both.l1_lambda == both.l2_lambda == 1.0


class TestGNB:
    def test_zero_variance_classes(self):
        X = np.array([[-1.0], [-1.0], [1.0], [1.0]])
        y = np.array([0, 0, 1, 1])
        d = Dataset(X=X, y=y, k=2, feature_names=["f"])
        state = fit_gnb(d)
        np.testing.assert_allclose(state.means, [[-1.0], [1.0]])
        assert state.sigma[0, 0] == pytest.approx(state.ridge)
        assert state.ridge > 0

    def test_priors_from_frequencies(self):
        d = make_blobs(m=80, seed=10)
        X = np.vstack([d.X[d.y == 0][:30], d.X[d.y == 1][:10]])
        y = np.array([0] * 30 + [1] * 10)
        state = fit_gnb(Dataset(X=X, y=y, k=2, feature_names=d.feature_names))
        np.testing.assert_allclose(state.priors, [0.75, 0.25])

    def test_pooled_covariance_vs_two_pass_oracle(self):
        rng = np.random.default_rng(11)
        d = make_blobs(m=100, n=3, seed=11)
        state = fit_gnb(d)
        # independent two-pass computation
        acc = np.zeros((3, 3))
        for c in range(d.k):
            rows = d.X[d.y == c]
            mu = rows.sum(axis=0) / len(rows)
            for row in rows:
                w = row - mu
                acc += np.outer(w, w)
        oracle = acc / d.m + state.ridge * np.eye(3)
        np.testing.assert_allclose(state.sigma, oracle, atol=1e-9)

    def test_insufficient_class_data(self):
        X = np.vstack([np.zeros((3, 2)), np.ones((1, 2))])
        d = Dataset(X=X, y=np.array([0, 0, 0, 1]), k=2,
                    feature_names=["a", "b"])
        with pytest.raises(InsufficientClassData):
            fit_gnb(d)

    def test_predicts_own_class_near_means(self):
        X = np.array([[-2.0, 0.0], [-2.1, 0.0], [2.0, 0.0], [2.1, 0.0]])
        y = np.array([0, 0, 1, 1])
        d = Dataset(X=X, y=y, k=2, feature_names=["a", "b"])
        state = fit_gnb(d)
        np.testing.assert_array_equal(predict(state, X), y)

    def test_log_likelihood_monotone_in_ridge(self):
        d = make_blobs(m=120, n=3, seed=12)
        lls = []
        for factor in (1e-2, 1e-4, 1e-6):
            state = fit_gnb(d, ridge_factor=factor)
            lls.append(gnb_log_likelihood(state, d))
        assert lls[0] <= lls[1] <= lls[2]


class TestPredictEvaluate:
    def test_uniform_softmax_tie_chooses_class_zero(self):
        d = make_blobs(m=10, seed=13)
        cfg = FFConfig(layers=0, epochs=1, learning_rate=0.0, seed=13)
        state = train_ff(d, cfg, epochs_override=1)
        zero_state = FFState(weights=[np.zeros_like(state.weights[0])],
                             biases=[np.zeros_like(state.biases[0])],
                             cfg=cfg, k=d.k, m=d.m,
                             activation_norms=state.activation_norms,
                             activation_norm_sup=state.activation_norm_sup,
                             loss_history=[0.0])
        assert (predict(zero_state, d.X) == 0).all()

    def test_perfect_predictor_accuracy_one(self):
        d = linearly_separable()
        cfg = FFConfig(layers=1, units_per_layer=4, epochs=200,
                       learning_rate=0.1, batch_size=16, seed=0)
        state = train_ff(d, cfg)
        assert evaluate(state, d, "accuracy") == 1.0

    def test_evaluate_unknown_metric(self):
        d = make_blobs(m=20, seed=14)
        state = fit_gnb(d)
        with pytest.raises(ValueError):
            evaluate(state, d, "nope")
