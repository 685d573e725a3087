"""Estimator facades: fit/predict contracts, penalty wiring, sklearn plumbing."""

import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.base import clone

from ncdopt.estimators import CDClassifier, CDRegressor


def _regression_data(seed=0, n=60, d=12):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    w = np.zeros(d)
    w[:3] = [1.0, -2.0, 0.5]
    y = X @ w + 0.05 * rng.standard_normal(n)
    return X, y


def _classification_data(seed=0, n=80, d=10, labels=(-1.0, 1.0)):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    w = rng.standard_normal(d)
    y = np.where(X @ w >= 0, labels[1], labels[0])
    return X, y


def test_regressor_fit_predict_score():
    X, y = _regression_data()
    est = CDRegressor(loss="huber", penalty="scad", delta=0.5, lam=0.05,
                      K=800, seed=0)
    est.fit(X, y)
    assert est.coef_.shape == (12,)
    assert np.all(np.isfinite(est.coef_))
    pred = est.predict(X)
    assert np.allclose(pred, X @ est.coef_)
    assert est.n_iter_ > 0
    assert est.n_passes_ > 0
    assert np.isfinite(est.objective_)
    assert est.trace_.records[0].objective >= est.objective_
    assert est.score(X, y) > 0.5


def test_regressor_least_squares_l1_recovers_signal():
    X, y = _regression_data(seed=1, n=100, d=8)
    est = CDRegressor(loss="least_squares", penalty="l1", lam=0.01,
                      K=2000, seed=1)
    est.fit(X, y)
    dense = np.linalg.lstsq(X, y, rcond=None)[0]
    assert np.max(np.abs(est.coef_ - dense)) < 0.1


def test_regressor_penalty_and_loss_validation():
    X, y = _regression_data()
    with pytest.raises(ValueError):
        CDRegressor(penalty="ridge").fit(X, y)
    with pytest.raises(ValueError):
        CDRegressor(loss="hinge").fit(X, y)


def test_penalty_changes_solution():
    X, y = _regression_data(seed=2)
    none = CDRegressor(penalty="none", K=600, seed=0).fit(X, y).coef_
    l1 = CDRegressor(penalty="l1", lam=2.0, K=600, seed=0).fit(X, y).coef_
    assert not np.allclose(none, l1)
    assert np.sum(np.abs(l1)) < np.sum(np.abs(none))


def test_sklearn_clone_and_params_round_trip():
    est = CDRegressor(lam=0.3, algorithm="rpcd", K=50, seed=7)
    params = est.get_params()
    dup = clone(est)
    assert dup.get_params() == params
    X, y = _regression_data()
    est.fit(X, y)
    assert est.get_params() == params


def test_estimators_are_seed_deterministic():
    X, y = _regression_data(seed=3)
    a = CDRegressor(K=300, seed=5).fit(X, y).coef_
    b = CDRegressor(K=300, seed=5).fit(X, y).coef_
    assert np.array_equal(a, b)
    c = CDRegressor(K=300, seed=6).fit(X, y).coef_
    assert not np.array_equal(a, c)


def test_regressor_other_algorithms_through_facade():
    X, y = _regression_data(seed=4)
    for algorithm in ["rpcd", "pdca", "pdca_e"]:
        est = CDRegressor(penalty="l1", lam=0.05, algorithm=algorithm,
                          K=200, seed=0)
        est.fit(X, y)
        assert est.trace_.algorithm == algorithm
        assert np.isfinite(est.objective_)


def test_regressor_accepts_sparse_input():
    X, y = _regression_data(seed=5)
    est = CDRegressor(penalty="l1", lam=0.05, K=300, seed=0)
    est.fit(sp.csc_matrix(X), y)
    pred = est.predict(sp.csc_matrix(X))
    assert pred.shape == (60,)


def test_classifier_basic_contract():
    X, y = _classification_data(seed=6)
    est = CDClassifier(penalty="topk", k=3, K=1200, seed=0)
    est.fit(X, y)
    assert np.array_equal(est.classes_, [-1.0, 1.0])
    pred = est.predict(X)
    assert set(np.unique(pred)) <= {-1.0, 1.0}
    assert np.mean(pred == y) > 0.8
    proba = est.predict_proba(X)
    assert proba.shape == (80, 2)
    assert np.allclose(proba.sum(axis=1), 1.0)
    margin = est.decision_function(X)
    assert np.allclose(proba[:, 1], 1.0 / (1.0 + np.exp(-margin)))


def test_classifier_maps_larger_label_to_positive():
    X, y = _classification_data(seed=7, labels=(3.0, 7.0))
    est = CDClassifier(penalty="l1", K=800, seed=0)
    est.fit(X, y)
    assert np.array_equal(est.classes_, [3.0, 7.0])
    pred = est.predict(X)
    assert set(np.unique(pred)) <= {3.0, 7.0}
    assert np.mean(pred == y) > 0.8


def test_classifier_rejects_non_binary_targets():
    X, _ = _classification_data(seed=8)
    y = np.arange(80) % 3
    with pytest.raises(ValueError):
        CDClassifier().fit(X, y)
    with pytest.raises(ValueError):
        CDClassifier(penalty="hinge").fit(X, (np.arange(80) % 2).astype(float))


def test_classifier_default_k_runs():
    X, y = _classification_data(seed=9)
    est = CDClassifier(penalty="topk", k=None, K=200, seed=0)
    est.fit(X, y)
    assert np.isfinite(est.objective_)
