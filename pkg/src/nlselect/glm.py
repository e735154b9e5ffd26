"""Logistic likelihood, Newton fitting and MMLE association scores."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from sklearn.exceptions import ConvergenceWarning

from .data import Dataset

CLAMP = 30.0
GRAD_TOL = 1e-8
MAX_ITER = 100
MAX_HALVINGS = 30
JITTER = 1e-8
# log-likelihood drops below this relative size are rounding, not decrease
LL_RTOL = 1e-12
# a clamped fit improving less than this (relative) per step is stopped
CLAMP_STALL_RTOL = 1e-9
# relative pivot below which a Cholesky factor is treated as singular
PIVOT_RTOL = 1e-12
# a small gradient only counts as convergence once the Newton step is this small too;
# under separation the gradient vanishes while the step stays O(1)
STEP_TOL = 1e-6


class NumericalError(RuntimeError):
    """A linear system stayed singular after ridge jitter."""


@dataclass
class FitResult:
    beta_hat: np.ndarray
    log_lik: float
    converged: bool
    iterations: int
    neg_hessian: np.ndarray
    clamped: bool = False
    loglik_path: list = field(default_factory=list)


def log_likelihood(beta, X_sub, y) -> float:
    """Bernoulli log-likelihood under the logit link."""
    eta = X_sub @ np.asarray(beta, dtype=float)
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def loglik_grad_hess(beta, X_sub, y):
    """Log-likelihood, its gradient and the negative Hessian."""
    eta = X_sub @ beta
    mu = expit(eta)
    ll = float(np.sum(y * eta - np.logaddexp(0.0, eta)))
    grad = X_sub.T @ (y - mu)
    w = mu * (1.0 - mu)
    neg_h = (X_sub * w[:, None]).T @ X_sub
    return ll, grad, 0.5 * (neg_h + neg_h.T)


def _chol_ok(A: np.ndarray):
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return None
    scale = max(float(np.max(np.abs(np.diag(A)))), 1e-300)
    if np.min(np.diag(L)) ** 2 < PIVOT_RTOL * scale:
        return None
    return L


def solve_psd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for symmetric PSD A, adding ``1e-8 I`` once if singular."""
    L = _chol_ok(A)
    if L is None:
        L = _chol_ok(A + JITTER * np.eye(A.shape[0]))
        if L is None:
            raise NumericalError("matrix singular after ridge jitter")
    z = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, z)


def with_intercept(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X])


def fit_logistic(X_sub, y, init=None, grad_tol=GRAD_TOL, max_iter=MAX_ITER) -> FitResult:
    """Maximum-likelihood logistic fit by damped Newton-Raphson.

    ``X_sub`` must already contain the intercept column. Every step is
    halved (up to 30 times) until the log-likelihood does not decrease, and
    coefficients are clamped to ``[-30, 30]``; a binding clamp marks the
    fit as not converged. Iteration stops once the gradient max-norm is at
    most ``grad_tol`` and the next Newton step is negligible.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    X_sub = np.asarray(X_sub, dtype=float)
    y = np.asarray(y, dtype=float)
    d = X_sub.shape[1]
    beta = np.zeros(d) if init is None else np.clip(np.array(init, dtype=float), -CLAMP, CLAMP)
    ll, grad, neg_h = loglik_grad_hess(beta, X_sub, y)
    path = [ll]
    clamped = bool(np.any(np.abs(beta) >= CLAMP))
    it = 0
    while it < max_iter:
        step = solve_psd(neg_h, grad)
        if np.max(np.abs(grad)) <= grad_tol and np.max(np.abs(step)) <= STEP_TOL:
            break
        it += 1
        t = 1.0
        new = None
        for _ in range(MAX_HALVINGS + 1):
            cand = np.clip(beta + t * step, -CLAMP, CLAMP)
            ll_c = log_likelihood(cand, X_sub, y)
            if ll_c >= ll - LL_RTOL * abs(ll):
                new = cand
                break
            t *= 0.5
        if new is None or np.array_equal(new, beta):
            break
        beta = new
        clamped = clamped or bool(np.any(np.abs(beta) >= CLAMP))
        ll_prev = ll
        ll, grad, neg_h = loglik_grad_hess(beta, X_sub, y)
        path.append(ll)
        if clamped and ll - ll_prev <= CLAMP_STALL_RTOL * abs(ll_prev):
            break
    converged = bool(np.max(np.abs(grad)) <= grad_tol) and not clamped
    return FitResult(beta, ll, converged, it, neg_h, clamped, path)


def _design(ds: Dataset, cols) -> np.ndarray:
    return with_intercept(ds.X[:, list(cols)])


def mmle(ds: Dataset, j: int, conditioning=(), grad_tol=GRAD_TOL, max_iter=MAX_ITER,
         base_fit: FitResult | None = None) -> float:
    """Coefficient of ``x_j`` in the logistic fit on ``[1, X_conditioning, x_j]``.

    ``base_fit`` (the fit on ``[1, X_conditioning]``) seeds the start point.
    A non-converged fit returns its clamped coefficient and warns.
    """
    conditioning = tuple(conditioning)
    if j in conditioning:
        raise ValueError(f"variable {j} is in the conditioning set")
    init = None
    if base_fit is not None:
        init = np.append(base_fit.beta_hat, 0.0)
    fit = fit_logistic(_design(ds, conditioning + (j,)), ds.y, init, grad_tol, max_iter)
    if not fit.converged:
        warnings.warn(f"MMLE fit for variable {j} did not converge", ConvergenceWarning, stacklevel=2)
    return float(fit.beta_hat[-1])


def _batch_solve(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return np.stack([solve_psd(H[i], g[i]) for i in range(H.shape[0])])
    diag = np.diagonal(L, axis1=1, axis2=2)
    scale = np.maximum(np.max(np.abs(np.diagonal(H, axis1=1, axis2=2)), axis=1), 1e-300)
    bad = np.min(diag, axis=1) ** 2 < PIVOT_RTOL * scale
    out = np.empty_like(g)
    ok = ~bad
    if ok.any():
        out[ok] = np.linalg.solve(H[ok], g[ok][..., None])[..., 0]
    for i in np.flatnonzero(bad):
        out[i] = solve_psd(H[i], g[i])
    return out


def mmle_all(ds: Dataset, candidates, conditioning=(), grad_tol=GRAD_TOL, max_iter=MAX_ITER,
             chunk=512):
    """MMLE for many candidates at once, sharing the conditioning design.

    Runs the same damped, clamped Newton iteration as :func:`fit_logistic`
    on every candidate in lock-step. Returns ``(coef, converged)`` arrays
    aligned with ``candidates``.
    """
    candidates = np.asarray(candidates, dtype=int)
    conditioning = tuple(conditioning)
    if set(candidates.tolist()) & set(conditioning):
        raise ValueError("candidates overlap the conditioning set")
    Zs = _design(ds, conditioning)
    base = fit_logistic(Zs, ds.y, None, grad_tol, max_iter)
    coef = np.empty(candidates.size)
    conv = np.empty(candidates.size, dtype=bool)
    for lo in range(0, candidates.size, chunk):
        sl = slice(lo, lo + chunk)
        b, c = _newton_batch(Zs, ds.X[:, candidates[sl]], ds.y, base.beta_hat, grad_tol, max_iter)
        coef[sl] = b
        conv[sl] = c
    return coef, conv


def _newton_batch(Zs, Xc, y, base_beta, grad_tol, max_iter):
    n, q = Zs.shape
    c = Xc.shape[1]
    d = q + 1
    B = np.zeros((c, d))
    B[:, :q] = base_beta
    iu, ju = np.triu_indices(q)
    ZZ = Zs[:, iu] * Zs[:, ju]
    sym = np.empty((q, q), dtype=np.intp)
    sym[iu, ju] = sym[ju, iu] = np.arange(iu.size)
    yc = y[:, None]

    def loglik(Bs, cols):
        eta = Zs @ Bs[:, :q].T + Xc[:, cols] * Bs[:, q]
        return np.sum(yc * eta - np.logaddexp(0.0, eta), axis=0)

    def state(cols):
        Bs = B[cols]
        x = Xc[:, cols]
        eta = Zs @ Bs[:, :q].T + x * Bs[:, q]
        mu = expit(eta)
        ll = np.sum(yc * eta - np.logaddexp(0.0, eta), axis=0)
        r = yc - mu
        g = np.empty((cols.size, d))
        g[:, :q] = (Zs.T @ r).T
        g[:, q] = np.sum(x * r, axis=0)
        w = mu * (1.0 - mu)
        H = np.empty((cols.size, d, d))
        H[:, :q, :q] = np.take(w.T @ ZZ, sym, axis=1)
        wx = w * x
        H[:, :q, q] = (Zs.T @ wx).T
        H[:, q, :q] = H[:, :q, q]
        H[:, q, q] = np.sum(wx * x, axis=0)
        return ll, g, H

    clamped = np.zeros(c, dtype=bool)
    active = np.arange(c)
    ll, g, H = state(active)
    gmax = np.max(np.abs(g), axis=1)
    final_g = np.zeros(c)
    final_g[active] = gmax
    for _ in range(max_iter):
        if active.size == 0:
            break
        step = _batch_solve(H, g)
        keep = (gmax > grad_tol) | (np.max(np.abs(step), axis=1) > STEP_TOL)
        active, ll, g, step = active[keep], ll[keep], g[keep], step[keep]
        if active.size == 0:
            break
        Bcur = B[active]
        new = Bcur.copy()
        done = np.zeros(active.size, dtype=bool)
        t = np.ones(active.size)
        for _h in range(MAX_HALVINGS + 1):
            todo = np.flatnonzero(~done)
            if todo.size == 0:
                break
            cand = np.clip(Bcur[todo] + t[todo, None] * step[todo], -CLAMP, CLAMP)
            llc = loglik(cand, active[todo])
            ok = llc >= ll[todo] - LL_RTOL * np.abs(ll[todo])
            new[todo[ok]] = cand[ok]
            done[todo[ok]] = True
            t[todo[~ok]] *= 0.5
        moved = done & np.any(new != Bcur, axis=1)
        B[active[moved]] = new[moved]
        clamped[active[moved]] |= np.any(np.abs(new[moved]) >= CLAMP, axis=1)
        active = active[moved]
        ll_prev = ll[moved]
        if active.size == 0:
            break
        ll, g, H = state(active)
        gmax = np.max(np.abs(g), axis=1)
        final_g[active] = gmax
        stalled = clamped[active] & (ll - ll_prev <= CLAMP_STALL_RTOL * np.abs(ll_prev))
        keep = ~stalled
        active, ll, g, H, gmax = active[keep], ll[keep], g[keep], H[keep], gmax[keep]
    converged = (final_g <= grad_tol) & ~clamped
    return B[:, q].copy(), converged
