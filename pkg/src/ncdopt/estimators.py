"""Estimator front end over the block solvers.

Two thin facades assemble a :class:`~ncdopt.problem.CompositeProblem` from
validated training data and hand it to :func:`ncdopt.solvers.solve`:

* :class:`CDRegressor`   huber or least-squares loss, optionally with the
  folded-concave penalty (l1 minus its smooth complement) or plain l1;
* :class:`CDClassifier`  logistic loss with the sparsity-gap penalty
  (l1 minus largest-k), plain l1, or no penalty.

Both follow the usual fit / predict / score conventions, keep hyper
parameters untouched at construction time, and expose the solved iterate
as ``coef_`` together with the full progress trace as ``trace_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .oracles import DataMatrix, huber, least_squares, logistic
from .penalties import h_largest_k, h_scad, phi_l1
from .presets import default_k, make_problem
from .solvers import SolverConfig, solve

_SOLVER_KEYS = (
    "algorithm", "K", "t", "s", "gamma_scale", "mu", "seed",
    "permutation_mode", "acd_option", "trace_every", "max_passes",
)


class _BlockSolverMixin:
    """Shared solve plumbing; subclasses provide ``_build_problem``."""

    def _config(self) -> SolverConfig:
        return SolverConfig(**{k: getattr(self, k) for k in _SOLVER_KEYS})

    def _solve(self, X, targets):
        A = DataMatrix(X)
        problem = self._build_problem(A, targets)
        config = self._config()
        config.validate()
        x, trace = solve(problem, config)
        self.coef_ = x
        self.trace_ = trace
        self.objective_ = trace.final_objective()
        self.n_iter_ = int(trace.records[-1].outer_iter)
        self.n_passes_ = float(trace.records[-1].passes)
        return self


class CDRegressor(_BlockSolverMixin, RegressorMixin, BaseEstimator):
    """Regression with a block coordinate solver.

    Parameters
    ----------
    loss : {"huber", "least_squares"}
        Data-fitting term; huber uses threshold ``delta``.
    penalty : {"scad", "l1", "none"}
        "scad" is the folded-concave penalty split as lam * l1 minus its
        smooth complement; every penalty carries the ``rho_weight / d``
        factor.
    algorithm : str
        Any registered solver name; see ``ncdopt.solvers.ALGORITHMS``.

    The remaining parameters mirror :class:`ncdopt.solvers.SolverConfig`.
    ``m = None`` partitions into ``min(1000, d)`` blocks.
    """

    def __init__(self, loss="huber", penalty="scad", delta=1e-2, lam=1.0,
                 theta=3.7, rho_weight=1.0, m=None, algorithm="rcsd",
                 K=1000, t=None, s=1.0, gamma_scale=1.0, mu=0.01, seed=0,
                 permutation_mode="random_shuffle", acd_option="II",
                 trace_every=1.0, max_passes=None):
        self.loss = loss
        self.penalty = penalty
        self.delta = delta
        self.lam = lam
        self.theta = theta
        self.rho_weight = rho_weight
        self.m = m
        self.algorithm = algorithm
        self.K = K
        self.t = t
        self.s = s
        self.gamma_scale = gamma_scale
        self.mu = mu
        self.seed = seed
        self.permutation_mode = permutation_mode
        self.acd_option = acd_option
        self.trace_every = trace_every
        self.max_passes = max_passes

    def _build_problem(self, A, y):
        if self.loss == "huber":
            spec = huber(self.delta)
        elif self.loss == "least_squares":
            spec = least_squares()
        else:
            raise ValueError(f"unknown loss {self.loss!r}")
        scale = self.rho_weight / A.d
        phi = h = None
        if self.penalty == "scad":
            phi = phi_l1(self.lam, scale=scale)
            h = h_scad(self.lam, self.theta, scale=scale)
        elif self.penalty == "l1":
            phi = phi_l1(self.lam, scale=scale)
        elif self.penalty != "none":
            raise ValueError(f"unknown penalty {self.penalty!r}")
        m = min(1000, A.d) if self.m is None else int(self.m)
        return make_problem(spec, A, y, m, phi=phi, h=h)

    def fit(self, X, y):
        X, y = validate_data(self, X, y, accept_sparse="csc", y_numeric=True)
        return self._solve(X, np.asarray(y, dtype=np.float64))

    def predict(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, accept_sparse="csc", reset=False)
        return X @ self.coef_


class CDClassifier(_BlockSolverMixin, ClassifierMixin, BaseEstimator):
    """Binary classification with the logistic loss.

    ``penalty = "topk"`` uses the sparsity-gap regularizer
    (rho_weight / d) * (||x||_1 - |||x|||_k) with ``k = None`` meaning 1%
    of the feature count; "l1" keeps only the convex part.  Labels may be
    any two values; the larger one (under numpy ordering) maps to +1.
    """

    def __init__(self, penalty="topk", k=None, rho_weight=1.0, m=None,
                 algorithm="rcsd", K=1000, t=None, s=1.0, gamma_scale=1.0,
                 mu=0.01, seed=0, permutation_mode="random_shuffle",
                 acd_option="II", trace_every=1.0, max_passes=None):
        self.penalty = penalty
        self.k = k
        self.rho_weight = rho_weight
        self.m = m
        self.algorithm = algorithm
        self.K = K
        self.t = t
        self.s = s
        self.gamma_scale = gamma_scale
        self.mu = mu
        self.seed = seed
        self.permutation_mode = permutation_mode
        self.acd_option = acd_option
        self.trace_every = trace_every
        self.max_passes = max_passes

    def _build_problem(self, A, y):
        w = self.rho_weight / A.d
        phi = h = None
        if self.penalty == "topk":
            kk = default_k(A.d) if self.k is None else int(self.k)
            phi = phi_l1(w)
            h = h_largest_k(w, kk)
        elif self.penalty == "l1":
            phi = phi_l1(w)
        elif self.penalty != "none":
            raise ValueError(f"unknown penalty {self.penalty!r}")
        m = min(1000, A.d) if self.m is None else int(self.m)
        return make_problem(logistic(), A, y, m, phi=phi, h=h)

    def fit(self, X, y):
        X, y = validate_data(self, X, y, accept_sparse="csc")
        self.classes_ = np.unique(y)
        if self.classes_.size != 2:
            raise ValueError(
                f"expected exactly 2 classes, got {self.classes_.size}"
            )
        signed = np.where(y == self.classes_[1], 1.0, -1.0)
        return self._solve(X, signed)

    def decision_function(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, accept_sparse="csc", reset=False)
        return X @ self.coef_

    def predict(self, X):
        margin = self.decision_function(X)
        return self.classes_[(margin >= 0).astype(int)]

    def predict_proba(self, X):
        margin = self.decision_function(X)
        p = 1.0 / (1.0 + np.exp(-margin))
        return np.column_stack([1.0 - p, p])
