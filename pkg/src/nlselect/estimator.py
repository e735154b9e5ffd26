"""scikit-learn compatible selectors wrapping the scheme and the penalized baselines."""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baselines import EnetConfig, cv_select
from .data import Dataset, DataError, standardize
from .glm import fit_logistic, with_intercept
from .priors import PriorConfig
from .scheme import SchemeConfig, run_selection


def check_binary_target(y):
    """Map a two-class target onto {0, 1}; returns ``(y01, classes)``."""
    classes = np.unique(y)
    if classes.size != 2:
        raise ValueError(f"binary target required, got {classes.size} distinct values")
    return (y == classes[1]).astype(float), classes


def _validated(est, X, y):
    X, y = check_X_y(X, y, dtype=float, ensure_min_samples=2)
    y01, classes = check_binary_target(y)
    est.classes_ = classes
    est.n_features_in_ = X.shape[1]
    try:
        return Dataset(X, y01)
    except DataError as exc:
        raise ValueError(str(exc)) from None


class _RefitMixin:
    """Unpenalized logistic refit on the selected columns for predict/predict_proba."""

    def _refit(self, ds: Dataset):
        sel = list(self.selected_)
        self.center_ = ds.X.mean(axis=0)
        self.scale_ = ds.X.std(axis=0, ddof=1)
        Z = (ds.X[:, sel] - self.center_[sel]) / self.scale_[sel]
        fit = fit_logistic(with_intercept(Z), ds.y)
        self.intercept_ = float(fit.beta_hat[0])
        self.coef_ = fit.beta_hat[1:]

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        sel = list(self.selected_)
        Z = (X[:, sel] - self.center_[sel]) / self.scale_[sel]
        return self.intercept_ + Z @ self.coef_

    def predict_proba(self, X):
        p1 = expit(self.decision_function(X))
        return np.column_stack([1 - p1, p1])

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]


class NonLocalPriorSelector(_RefitMixin, SelectorMixin, BaseEstimator):
    """Iterative screen-and-select with non-local prior model selection.

    Each iteration ranks the remaining variables by the magnitude of their
    logistic coefficient given the variables already chosen, groups the
    strongest ``k0`` with their correlated neighbours (``|corr| >= r_thresh``),
    and keeps the highest-posterior model of each group under a pMOM or
    piMOM prior. Stops at ``m`` selections or after ``maxno`` iterations
    that select nothing.

    Attributes
    ----------
    selected_ : list of int
        Selected column indices in selection order.
    result_ : SelectionResult
        Full per-iteration trace.
    """

    def __init__(self, prior="pmom", tau=0.2, phi=1.0, order_r=1, nu=1.0, k0=1, r_thresh=0.3,
                 m=None, maxno=3, maxno_mode="consecutive", exhaustive_cap=12, standardize=True,
                 grad_tol=1e-8, max_iter=100, seed=0):
        self.prior = prior
        self.tau = tau
        self.phi = phi
        self.order_r = order_r
        self.nu = nu
        self.k0 = k0
        self.r_thresh = r_thresh
        self.m = m
        self.maxno = maxno
        self.maxno_mode = maxno_mode
        self.exhaustive_cap = exhaustive_cap
        self.standardize = standardize
        self.grad_tol = grad_tol
        self.max_iter = max_iter
        self.seed = seed

    def _config(self) -> SchemeConfig:
        prior = PriorConfig(self.prior, self.tau, self.order_r, self.nu, self.phi)
        return SchemeConfig(k0=self.k0, r_thresh=self.r_thresh, m=self.m, maxno=self.maxno,
                            prior=prior, exhaustive_cap=self.exhaustive_cap,
                            grad_tol=self.grad_tol, max_iter=self.max_iter, seed=self.seed,
                            maxno_mode=self.maxno_mode, standardize=self.standardize)

    def fit(self, X, y):
        cfg = self._config()
        ds = _validated(self, X, y)
        self.result_ = run_selection(ds, cfg)
        self.selected_ = list(self.result_.selected)
        self.stop_reason_ = self.result_.stop_reason
        self._refit(ds)
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "selected_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selected_] = True
        return mask


class PenalizedLogisticSelector(_RefitMixin, SelectorMixin, BaseEstimator):
    """Lasso / elastic-net logistic selection with lambda picked by k-fold CV deviance."""

    def __init__(self, alpha=1.0, n_lambda=100, lambda_min_ratio=1e-3, folds=10, one_se=False,
                 seed=0):
        self.alpha = alpha
        self.n_lambda = n_lambda
        self.lambda_min_ratio = lambda_min_ratio
        self.folds = folds
        self.one_se = one_se
        self.seed = seed

    def fit(self, X, y):
        cfg = EnetConfig(alpha=self.alpha, n_lambda=self.n_lambda,
                         lambda_min_ratio=self.lambda_min_ratio, folds=self.folds,
                         seed=self.seed, one_se=self.one_se)
        ds = _validated(self, X, y)
        sel, info = cv_select(standardize(ds), cfg, return_info=True)
        self.selected_ = list(sel)
        self.lambda_ = info["lambda"]
        self._refit(ds)
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "selected_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selected_] = True
        return mask

