"""Elastic-net penalized logistic regression with cross-validated lambda.

Minimizes ``-loglik / n + lam * (alpha * |b|_1 + (1 - alpha) * |b|_2^2 / 2)``
with an unpenalized intercept, by IRLS outer iterations and cyclic
coordinate descent on the weighted least-squares subproblem. Sequential
strong rules restrict each subproblem; a KKT pass over the discarded
coordinates guards against wrongful exclusion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import expit

from .data import Dataset, standardize

PROB_EPS = 1e-5
# glmnet-style early exits along the path once the fit saturates
DEV_RATIO_MAX = 0.999
DEV_CHANGE_MIN = 1e-5


@dataclass(frozen=True)
class EnetConfig:
    alpha: float = 1.0
    n_lambda: int = 100
    lambda_min_ratio: float = 1e-3
    folds: int = 10
    seed: int = 0
    one_se: bool = False
    tol: float = 1e-7
    max_outer: int = 50
    max_sweeps: int = 1000

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if self.n_lambda < 1:
            raise ValueError("n_lambda must be >= 1")
        if not 0 < self.lambda_min_ratio < 1:
            raise ValueError("lambda_min_ratio must be in (0, 1)")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")


@dataclass
class EnetPath:
    lambdas: np.ndarray
    intercepts: np.ndarray
    coefs: np.ndarray  # (n_lambda_fitted, p)
    dev_ratio: np.ndarray


def _probs(eta):
    return np.clip(expit(eta), PROB_EPS, 1 - PROB_EPS)


def deviance(y, eta) -> float:
    mu = _probs(eta)
    return float(-2.0 * np.sum(y * np.log(mu) + (1 - y) * np.log(1 - mu)))


def objective(X, y, b0, beta, lam, alpha) -> float:
    eta = b0 + X @ beta
    ll = np.sum(y * eta - np.logaddexp(0.0, eta))
    pen = alpha * np.abs(beta).sum() + 0.5 * (1 - alpha) * beta @ beta
    return float(-ll / X.shape[0] + lam * pen)


def lambda_max(X, y, alpha: float) -> float:
    """Smallest lambda at which every penalized coefficient is zero."""
    n = X.shape[0]
    return float(np.max(np.abs(X.T @ (y - y.mean()))) / (n * alpha))


@njit(cache=True)
def _cd_sweeps(X, w, r, beta, b0, coords, xw2, l1, l2, tol, max_sweeps, debug):
    """Cyclic sweeps on the weighted least-squares subproblem.

    A sweep converges when every coordinate's weighted squared change
    ``xw2 * delta^2`` is below ``tol``. Returns the intercept and the number
    of sweeps run.
    """
    n = X.shape[0]
    sw = w.sum()
    prev = np.inf
    sweeps = 0
    for _s in range(max_sweeps):
        sweeps += 1
        d0 = 0.0
        for i in range(n):
            d0 += w[i] * r[i]
        d0 /= sw
        b0 += d0
        for i in range(n):
            r[i] -= d0
        dmax = sw / n * d0 * d0
        for k in range(coords.size):
            j = coords[k]
            bj = beta[j]
            acc = 0.0
            for i in range(n):
                acc += w[i] * X[i, j] * r[i]
            z = acc / n + xw2[k] * bj
            mag = abs(z) - l1
            new = 0.0
            if mag > 0.0:
                new = np.sign(z) * mag / (xw2[k] + l2)
            if new != bj:
                delta = new - bj
                for i in range(n):
                    r[i] -= delta * X[i, j]
                beta[j] = new
                dmax = max(dmax, xw2[k] * delta * delta)
        if debug:
            cur = 0.0
            for i in range(n):
                cur += w[i] * r[i] * r[i]
            cur = 0.5 * cur / n
            for k in range(coords.size):
                bj = beta[coords[k]]
                cur += l1 * abs(bj) + 0.5 * l2 * bj * bj
            if cur > prev + 1e-12 * max(1.0, abs(prev)):
                raise AssertionError("coordinate descent sweep increased the objective")
            prev = cur
        if dmax < tol:
            break
    return b0, sweeps


def _solve_at(X, y, b0, beta, lam, cfg: EnetConfig, coords, debug=False):
    """IRLS outer loop around coordinate descent on ``coords``; updates beta in place."""
    n = X.shape[0]
    l1, l2 = lam * cfg.alpha, lam * (1 - cfg.alpha)
    coords = np.asarray(coords, dtype=np.int64)
    Xc = X[:, coords]
    for _ in range(cfg.max_outer):
        eta = b0 + X @ beta
        mu = _probs(eta)
        w = mu * (1 - mu)
        r = (y - mu) / w
        xw2 = (w @ (Xc * Xc)) / n
        b0, sweeps = _cd_sweeps(X, w, r, beta, b0, coords, xw2, l1, l2, cfg.tol, cfg.max_sweeps, debug)
        # the refreshed quadratic approximation was already solved
        if sweeps == 1:
            break
    return b0


def fit_enet_path(ds: Dataset, cfg: EnetConfig, lambdas=None, debug=False) -> EnetPath:
    """Warm-started coefficient path on a decreasing, log-spaced lambda grid.

    The path may end before the last lambda once the deviance ratio
    reaches 0.999 or stops changing, as the fit is then saturated.
    """
    return _path(ds.X, ds.y, cfg, lambdas, debug)


def _path(X, y, cfg, lambdas=None, debug=False) -> EnetPath:
    X = np.asfortranarray(X)
    n, p = X.shape
    if lambdas is None:
        lambdas = lambda_max(X, y, cfg.alpha) * np.logspace(0, np.log10(cfg.lambda_min_ratio), cfg.n_lambda)
    lambdas = np.asarray(lambdas, dtype=float)
    ybar = y.mean()
    b0 = float(np.log(ybar / (1 - ybar)))
    beta = np.zeros(p)
    null_dev = deviance(y, np.full(n, b0))
    out_b0, out_beta, out_dr = [], [], []
    lam_prev = lambdas[0]
    lmax = lambda_max(X, y, cfg.alpha)
    for k, lam in enumerate(lambdas):
        if lam >= lmax:
            # all penalized coefficients are exactly zero here
            beta[:] = 0.0
            b0 = float(np.log(ybar / (1 - ybar)))
            out_b0.append(b0)
            out_beta.append(beta.copy())
            out_dr.append(0.0)
            lam_prev = lam
            continue
        grad = np.abs(X.T @ (y - _probs(b0 + X @ beta))) / n
        strong = set(np.flatnonzero(grad >= cfg.alpha * (2 * lam - lam_prev)).tolist())
        strong |= set(np.flatnonzero(beta).tolist())
        while True:
            b0 = _solve_at(X, y, b0, beta, lam, cfg, sorted(strong), debug)
            grad = np.abs(X.T @ (y - _probs(b0 + X @ beta))) / n
            viol = set(np.flatnonzero(grad > cfg.alpha * lam * (1 + 1e-9)).tolist()) - strong
            if not viol:
                break
            strong |= viol
        dev = deviance(y, b0 + X @ beta)
        dr = 1 - dev / null_dev
        out_b0.append(b0)
        out_beta.append(beta.copy())
        out_dr.append(dr)
        lam_prev = lam
        if dr >= DEV_RATIO_MAX:
            break
        if k >= 5 and dr > 0 and out_dr[-1] - out_dr[-2] < DEV_CHANGE_MIN * dr:
            break
    m = len(out_b0)
    return EnetPath(lambdas[:m], np.array(out_b0), np.array(out_beta), np.array(out_dr))


def fold_ids(n: int, folds: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 7])
    ids = np.empty(n, dtype=int)
    ids[rng.permutation(n)] = np.arange(n) % folds
    return ids


def cv_path(ds: Dataset, cfg: EnetConfig):
    """Full-data path plus per-lambda mean and SE of held-out deviance."""
    full = fit_enet_path(ds, cfg)
    ids = fold_ids(ds.n, cfg.folds, cfg.seed)
    dev = []
    for f in range(cfg.folds):
        tr, te = ids != f, ids == f
        path = _path(ds.X[tr], ds.y[tr], cfg, lambdas=full.lambdas)
        eta = path.intercepts[:, None] + path.coefs @ ds.X[te].T
        d = np.array([deviance(ds.y[te], e) / te.sum() for e in eta])
        dev.append(d)
    m = min(len(d) for d in dev)
    D = np.array([d[:m] for d in dev])
    return full, full.lambdas[:m], D.mean(axis=0), D.std(axis=0, ddof=1) / np.sqrt(D.shape[0])


def cv_select(ds: Dataset, cfg: EnetConfig, return_info=False):
    """Indices with nonzero coefficients at the CV-chosen lambda."""
    full, lams, mean, se = cv_path(ds, cfg)
    k = int(np.argmin(mean))
    if cfg.one_se:
        ok = np.flatnonzero(mean <= mean[k] + se[k])
        k = int(ok.min())
    sel = tuple(int(j) for j in np.flatnonzero(full.coefs[k]))
    if return_info:
        return sel, {"lambda": float(lams[k]), "index": k, "cv_mean": mean, "cv_se": se, "path": full}
    return sel


def enet_select(ds: Dataset, cfg: EnetConfig, standardize_first=True):
    if standardize_first:
        ds = standardize(ds)
    return cv_select(ds, cfg)
