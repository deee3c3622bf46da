"""Logistic regression trained by deterministic batch gradient descent.

Two estimator layers live here:

* :class:`LogisticRegressionGD` — plain L2-regularized logistic regression on
  an already-prepared matrix, minimizing the mean negative log-likelihood
  with full-batch gradient descent.  The optimizer is deliberately simple and
  fully deterministic: fixed base step size, a stopping rule on the largest
  gradient component, and a halving safeguard so the recorded loss can never
  increase from one iteration to the next.
* :class:`DefectModel` — the model the simulator rebuilds after every tested
  module: standardize all features, pick a subset with the correlation-based
  selector, fit the logistic layer on that subset.  While the training pool
  contains only one class there is nothing for the logistic layer to fit, so
  the model falls back to a Laplace-smoothed constant probability
  ``(defective + 1) / (total + 2)``.

The inner loops are JIT-compiled with numba: the simulator refits this model
hundreds of thousands of times per experiment grid.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClassifierMixin

from .preprocessing import FeatureStandardizer, _as_labels, _as_matrix, select_features

__all__ = [
    "classify",
    "logistic_loss",
    "logistic_gradient",
    "LogisticRegressionGD",
    "DefectModel",
]


def classify(probability: float, threshold: float = 0.5) -> int:
    """Map a defect probability to a binary prediction.

    Returns 1 (positive) iff ``probability >= threshold``; the boundary goes
    to positive.
    """
    return 1 if probability >= threshold else 0


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    expz = np.exp(z[~pos])
    out[~pos] = expz / (1.0 + expz)
    return out


@njit(cache=True)
def _loss_impl(X, y, weights, intercept, l2_penalty):
    n, d = X.shape
    total = 0.0
    for i in range(n):
        z = intercept
        for j in range(d):
            z += X[i, j] * weights[j]
        # Stable cross-entropy: log(1 + exp(-|z|)) plus a linear term.
        if z >= 0.0:
            total += math.log1p(math.exp(-z)) + (1.0 - y[i]) * z
        else:
            total += math.log1p(math.exp(z)) - y[i] * z
    reg = 0.0
    for j in range(d):
        reg += weights[j] * weights[j]
    return total / n + 0.5 * l2_penalty * reg


@njit(cache=True)
def _gradient_impl(X, y, weights, intercept, l2_penalty):
    n, d = X.shape
    grad_w = np.zeros(d)
    grad_b = 0.0
    for i in range(n):
        z = intercept
        for j in range(d):
            z += X[i, j] * weights[j]
        if z >= 0.0:
            p = 1.0 / (1.0 + math.exp(-z))
        else:
            ez = math.exp(z)
            p = ez / (1.0 + ez)
        residual = p - y[i]
        grad_b += residual
        for j in range(d):
            grad_w[j] += residual * X[i, j]
    grad_b /= n
    for j in range(d):
        grad_w[j] = grad_w[j] / n + l2_penalty * weights[j]
    return grad_w, grad_b


@njit(cache=True)
def _loss_grad_impl(X, y, weights, intercept, l2_penalty):
    # Loss and gradient share one pass: each sample needs a single exp and
    # log1p, and the optimizer consumes both values every iteration.
    n, d = X.shape
    grad_w = np.zeros(d)
    grad_b = 0.0
    total = 0.0
    for i in range(n):
        z = intercept
        for j in range(d):
            z += X[i, j] * weights[j]
        if z >= 0.0:
            e = math.exp(-z)
            p = 1.0 / (1.0 + e)
            total += math.log1p(e) + (1.0 - y[i]) * z
        else:
            e = math.exp(z)
            p = e / (1.0 + e)
            total += math.log1p(e) - y[i] * z
        residual = p - y[i]
        grad_b += residual
        for j in range(d):
            grad_w[j] += residual * X[i, j]
    reg = 0.0
    for j in range(d):
        reg += weights[j] * weights[j]
        grad_w[j] = grad_w[j] / n + l2_penalty * weights[j]
    return total / n + 0.5 * l2_penalty * reg, grad_w, grad_b / n


@njit(cache=True)
def _fit_impl(X, y, base_step, l2_penalty, max_iter, tol, max_halvings):
    n, d = X.shape
    weights = np.zeros(d)
    # Start the intercept at the class-prior log-odds: already optimal for
    # zero weights, which shortens the descent and keeps the heavily
    # regularized limit at the prior instead of 0.5.
    mean_y = 0.0
    for i in range(n):
        mean_y += y[i]
    mean_y /= n
    intercept = math.log(mean_y / (1.0 - mean_y))
    losses = np.empty(max_iter + 1)
    loss, grad_w, grad_b = _loss_grad_impl(X, y, weights, intercept, l2_penalty)
    losses[0] = loss
    steps = 0
    for _ in range(max_iter):
        grad_max = abs(grad_b)
        for j in range(d):
            g = abs(grad_w[j])
            if g > grad_max:
                grad_max = g
        if grad_max < tol:
            break
        step = base_step
        accepted = False
        for _h in range(max_halvings):
            w_try = weights - step * grad_w
            b_try = intercept - step * grad_b
            loss_try, gw_try, gb_try = _loss_grad_impl(X, y, w_try, b_try, l2_penalty)
            if loss_try <= loss:
                weights = w_try
                intercept = b_try
                loss = loss_try
                grad_w = gw_try
                grad_b = gb_try
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        steps += 1
        losses[steps] = loss
    return weights, intercept, losses[: steps + 1], steps


def logistic_loss(X, y, weights, intercept: float, l2_penalty: float = 1e-4) -> float:
    """Mean negative log-likelihood plus ``l2_penalty/2 * ||weights||^2``.

    The intercept is not regularized.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    return float(_loss_impl(X, y, weights, float(intercept), float(l2_penalty)))


def logistic_gradient(
    X, y, weights, intercept: float, l2_penalty: float = 1e-4
) -> tuple[np.ndarray, float]:
    """Analytic gradient of :func:`logistic_loss` in (weights, intercept)."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    grad_w, grad_b = _gradient_impl(X, y, weights, float(intercept), float(l2_penalty))
    return grad_w, float(grad_b)


class LogisticRegressionGD(BaseEstimator, ClassifierMixin):
    """L2-regularized logistic regression via full-batch gradient descent.

    Parameters
    ----------
    learning_rate : float
        Base step size; each iteration retries with halved steps if the
        candidate step would increase the loss, so the loss history is
        non-increasing by construction.
    l2_penalty : float
        Regularization strength on the weights (never on the intercept).
    max_iter : int
        Iteration cap.
    tol : float
        Stop once every gradient component is below this in absolute value.

    Fitted attributes: ``coef_``, ``intercept_``, ``loss_history_``,
    ``n_iter_``, ``classes_``, ``n_features_in_``.
    """

    _MAX_HALVINGS = 60

    def __init__(
        self,
        learning_rate: float = 0.1,
        l2_penalty: float = 1e-4,
        max_iter: int = 500,
        tol: float = 1e-6,
    ):
        self.learning_rate = learning_rate
        self.l2_penalty = l2_penalty
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y) -> "LogisticRegressionGD":
        X = _as_matrix(X)
        y = _as_labels(y, X.shape[0])
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty training set")
        if y.min() == y.max():
            raise ValueError("training labels contain a single class")
        return self._fit_prepared(np.ascontiguousarray(X), y.astype(float))

    def _fit_prepared(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegressionGD":
        """Fit on already-validated contiguous float arrays with both classes."""
        weights, intercept, losses, n_iter = _fit_impl(
            X,
            y,
            float(self.learning_rate),
            float(self.l2_penalty),
            int(self.max_iter),
            float(self.tol),
            self._MAX_HALVINGS,
        )
        self.coef_ = weights
        self.intercept_ = float(intercept)
        self.loss_history_ = losses
        self.n_iter_ = int(n_iter)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted_input(self, X) -> np.ndarray:
        if not hasattr(self, "coef_"):
            raise ValueError("LogisticRegressionGD is not fitted yet; call fit first")
        X = _as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def decision_function(self, X) -> np.ndarray:
        X = self._check_fitted_input(X)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        p = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        p = self.predict_proba(X)[:, 1]
        return (p >= 0.5).astype(int)


class DefectModel(BaseEstimator, ClassifierMixin):
    """Standardize, select features, and fit the logistic layer in one step.

    This is the unit the online simulator rebuilds from scratch after every
    observed module.  When the training labels contain a single class the
    logistic layer is skipped and the model predicts the Laplace-smoothed
    constant ``(defective + 1) / (total + 2)``.

    Parameters
    ----------
    feature_subset : sequence of int or None
        When given, skip selection and fit the logistic layer on exactly
        these feature indices (used to reuse a previous selection).
    threshold : float
        Decision threshold for :meth:`predict`; the boundary classifies
        positive.
    max_stale_expansions : int
        Passed to the feature-selection search.
    learning_rate, l2_penalty, max_iter, tol : float / int
        Passed to :class:`LogisticRegressionGD`.

    Fitted attributes: ``scaler_``, ``feature_indices_``, ``logistic_``,
    ``fallback_proba_`` (None unless degenerate), ``trained_on_``,
    ``classes_``, ``n_features_in_``.
    """

    def __init__(
        self,
        feature_subset: tuple[int, ...] | None = None,
        threshold: float = 0.5,
        max_stale_expansions: int = 5,
        learning_rate: float = 0.1,
        l2_penalty: float = 1e-4,
        max_iter: int = 500,
        tol: float = 1e-6,
    ):
        self.feature_subset = feature_subset
        self.threshold = threshold
        self.max_stale_expansions = max_stale_expansions
        self.learning_rate = learning_rate
        self.l2_penalty = l2_penalty
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y) -> "DefectModel":
        X = _as_matrix(X)
        y = _as_labels(y, X.shape[0])
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty training set")
        self.n_features_in_ = X.shape[1]
        self.trained_on_ = X.shape[0]
        self.classes_ = np.array([0, 1])
        if y.min() == y.max():
            defective = int(y.sum())
            self.fallback_proba_ = (defective + 1) / (X.shape[0] + 2)
            self.scaler_ = None
            self.feature_indices_ = None
            self.logistic_ = None
            return self
        self.fallback_proba_ = None
        scaler = FeatureStandardizer().fit(X)
        self.scaler_ = scaler
        # Same arithmetic as scaler.transform, without the transformer
        # plumbing: this runs a few hundred thousand times per experiment.
        standardized = (X - scaler.means_) / scaler.scales_
        if self.feature_subset is not None:
            indices = tuple(int(i) for i in self.feature_subset)
            if not indices:
                raise ValueError("feature_subset must not be empty")
            if any(i < 0 or i >= X.shape[1] for i in indices):
                raise ValueError(f"feature_subset out of range for {X.shape[1]} features")
        else:
            indices = select_features(
                standardized, y, max_stale_expansions=self.max_stale_expansions
            ).indices
        self.feature_indices_ = indices
        self.logistic_ = LogisticRegressionGD(
            learning_rate=self.learning_rate,
            l2_penalty=self.l2_penalty,
            max_iter=self.max_iter,
            tol=self.tol,
        )._fit_prepared(
            np.ascontiguousarray(standardized[:, list(indices)]), y.astype(float)
        )
        return self

    def _check_fitted_input(self, X) -> np.ndarray:
        if not hasattr(self, "trained_on_"):
            raise ValueError("DefectModel is not fitted yet; call fit first")
        X = _as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        X = self._check_fitted_input(X)
        if self.fallback_proba_ is not None:
            p = np.full(X.shape[0], self.fallback_proba_)
        else:
            scaler = self.scaler_
            standardized = (X - scaler.means_) / scaler.scales_
            z = (
                standardized[:, list(self.feature_indices_)] @ self.logistic_.coef_
                + self.logistic_.intercept_
            )
            p = _sigmoid(z)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        p = self.predict_proba(X)[:, 1]
        return (p >= self.threshold).astype(int)
