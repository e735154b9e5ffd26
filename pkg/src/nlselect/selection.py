"""MAP estimation under non-local priors, Laplace evidence and HPPM search."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .data import Dataset, variable_set
from .glm import CLAMP, LL_RTOL, MAX_HALVINGS, _chol_ok, fit_logistic, log_likelihood, loglik_grad_hess, with_intercept
from .priors import PriorConfig, log_model_prior, log_prior, prior_grad_hess

MAP_MAX_ITER = 200
MAP_GRAD_TOL = 1e-8
INIT_FLOOR = 0.05
LAPLACE_JITTER = 1e-6
EXHAUSTIVE_CAP = 12
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class MapResult:
    beta_map: np.ndarray
    neg_hessian: np.ndarray
    log_joint: float
    converged: bool
    iterations: int


@dataclass
class ModelPosterior:
    model: tuple
    beta_map: np.ndarray
    log_evidence: float
    log_model_prior: float
    log_post_unnorm: float
    map_converged: bool
    hessian_jittered: bool = False


@dataclass
class SearchResult:
    best: ModelPosterior
    exhaustive: bool
    n_scored: int
    # only filled for enumerated model spaces
    hppm_prob: float | None = None
    inclusion_probs: dict = field(default_factory=dict)


def _check_sets(model, mandatory):
    model, mandatory = tuple(model), tuple(mandatory)
    if set(model) & set(mandatory):
        raise ValueError("model and mandatory sets overlap")
    return model, mandatory


def _objective(beta, Z, y, k, prior):
    ll = log_likelihood(beta, Z, y)
    if k == 0:
        return ll
    return ll + log_prior(beta[-k:], prior)


def _obj_grad_hess(beta, Z, y, k, prior):
    ll, g, H = loglik_grad_hess(beta, Z, y)
    if k == 0:
        return ll, g, H
    tail = beta[-k:]
    gp, hp = prior_grad_hess(tail, prior)
    g = g.copy()
    g[-k:] += gp
    H = H.copy()
    H[np.arange(-k, 0), np.arange(-k, 0)] -= hp
    return ll + log_prior(tail, prior), g, H


def _newton_direction(H, g):
    L = _chol_ok(H)
    if L is None:
        # indefinite curvature from the prior: shift the spectrum to PD
        lam = np.linalg.eigvalsh(H)
        shift = max(0.0, -lam[0]) + 1e-6 * max(1.0, float(np.max(np.abs(lam))))
        L = _chol_ok(H + shift * np.eye(H.shape[0]))
        if L is None:
            return g / max(1.0, float(np.max(np.abs(lam))))
    return np.linalg.solve(L.T, np.linalg.solve(L, g))


def map_estimate(model, mandatory, ds: Dataset, prior: PriorConfig, init=None,
                 max_iter=MAP_MAX_ITER, grad_tol=MAP_GRAD_TOL) -> MapResult:
    """Posterior mode of the coefficients of ``[1, X_mandatory, X_model]``.

    Only the ``model`` coefficients carry the non-local prior. Without an
    explicit ``init`` the search starts from the unpenalized MLE with each
    model coefficient pushed at least ``0.05 * sqrt(phi * tau)`` away
    from zero.
    """
    model, mandatory = _check_sets(model, mandatory)
    Z = with_intercept(ds.X[:, list(mandatory + model)])
    y = ds.y
    k = len(model)
    if init is None:
        beta = fit_logistic(Z, y).beta_hat.copy()
        if k:
            floor = INIT_FLOOR * math.sqrt(prior.scale)
            tail = beta[-k:]
            sign = np.where(tail < 0, -1.0, 1.0)
            beta[-k:] = sign * np.maximum(np.abs(tail), floor)
    else:
        beta = np.array(init, dtype=float)
    f, g, H = _obj_grad_hess(beta, Z, y, k, prior)
    it = 0
    while it < max_iter and np.max(np.abs(g)) > grad_tol:
        it += 1
        step = _newton_direction(H, g)
        t = 1.0
        new = None
        for _ in range(MAX_HALVINGS + 1):
            cand = np.clip(beta + t * step, -CLAMP, CLAMP)
            fc = _objective(cand, Z, y, k, prior)
            if fc >= f - LL_RTOL * abs(f):
                new = cand
                break
            t *= 0.5
        if new is None or np.array_equal(new, beta):
            break
        beta = new
        f, g, H = _obj_grad_hess(beta, Z, y, k, prior)
    converged = bool(np.max(np.abs(g)) <= grad_tol) and not np.any(np.abs(beta) >= CLAMP)
    return MapResult(beta, H, f, converged, it)


def _laplace(log_joint, H):
    d = H.shape[0]
    L = _chol_ok(H)
    jittered = False
    if L is None:
        jittered = True
        L = _chol_ok(H + LAPLACE_JITTER * np.eye(d))
    if L is None:
        logdet = np.linalg.slogdet(H + LAPLACE_JITTER * np.eye(d))[1]
    else:
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return log_joint + 0.5 * d * _LOG_2PI - 0.5 * logdet, jittered


def laplace_fit(model, mandatory, ds: Dataset, prior: PriorConfig):
    """Laplace log-evidence together with the MAP fit and a jitter flag."""
    model, mandatory = _check_sets(model, mandatory)
    if not model:
        fit = fit_logistic(with_intercept(ds.X[:, list(mandatory)]), ds.y)
        res = MapResult(fit.beta_hat, fit.neg_hessian, fit.log_lik, fit.converged, fit.iterations)
    else:
        res = map_estimate(model, mandatory, ds, prior)
    value, jittered = _laplace(res.log_joint, res.neg_hessian)
    return value, res, jittered


def laplace_log_evidence(model, mandatory, ds: Dataset, prior: PriorConfig) -> float:
    return laplace_fit(model, mandatory, ds, prior)[0]


def null_evidence(mandatory, ds: Dataset) -> float:
    """Laplace log-evidence of the intercept + mandatory model under flat priors."""
    return laplace_fit((), mandatory, ds, PriorConfig())[0]


def score_model(model, mandatory, ds: Dataset, prior: PriorConfig, p_s: int) -> ModelPosterior:
    model = variable_set(model, ds.p)
    ev, res, jit = laplace_fit(model, mandatory, ds, prior)
    lp = log_model_prior(len(model), p_s)
    return ModelPosterior(model, res.beta_map, ev, lp, ev + lp, res.converged, jit)


def _rank_key(mp: ModelPosterior):
    return (-mp.log_post_unnorm, len(mp.model), mp.model)


def search_hppm(candidates, mandatory, ds: Dataset, prior: PriorConfig,
                exhaustive_cap: int = EXHAUSTIVE_CAP) -> SearchResult:
    """Highest posterior probability model over subsets of ``candidates``.

    The empty model is always part of the space. Spaces with at most
    ``exhaustive_cap`` candidates are enumerated; larger ones use greedy
    best-first add/drop moves from the empty model. Ties go to the smaller
    model, then the lexicographically smallest index tuple.
    """
    cand = variable_set(candidates, ds.p)
    if not cand:
        raise ValueError("candidates must be nonempty")
    mandatory = tuple(mandatory)
    p_s = len(cand)
    cache: dict[tuple, ModelPosterior] = {}

    def score(m):
        m = tuple(sorted(m))
        if m not in cache:
            cache[m] = score_model(m, mandatory, ds, prior, p_s)
        return cache[m]

    if p_s <= exhaustive_cap:
        scored = [score(m) for size in range(p_s + 1) for m in itertools.combinations(cand, size)]
        best = min(scored, key=_rank_key)
        lp = np.array([s.log_post_unnorm for s in scored])
        probs = np.exp(lp - logsumexp(lp))
        incl = {j: float(sum(pr for s, pr in zip(scored, probs) if j in s.model)) for j in cand}
        hp = float(probs[scored.index(best)])
        return SearchResult(best, True, len(scored), hp, incl)

    current = score(())
    while True:
        moves = [tuple(sorted(set(current.model) | {j})) for j in cand if j not in current.model]
        moves += [tuple(x for x in current.model if x != j) for j in current.model]
        best_move = min((score(m) for m in moves), key=_rank_key)
        if best_move.log_post_unnorm > current.log_post_unnorm:
            current = best_move
        else:
            break
    return SearchResult(current, False, len(cache))
