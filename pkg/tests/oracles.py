"""Independent reference computations used by the unit and acceptance tests."""

import itertools
import math

import numpy as np
from scipy.special import logsumexp

from nlselect.priors import log_model_prior, log_prior
from nlselect.selection import laplace_log_evidence


def _log_prior_grid(b1, prior):
    out = np.full(b1.shape, -np.inf)
    nz = b1 != 0
    out[nz] = [log_prior([b], prior) for b in b1[nz]]
    return out


def _trapezoid_log(g0, g1, x, y, prior):
    """log trapezoid integral of the joint over the tensor grid g0 x g1."""
    def logw(g):
        h = g[1] - g[0]
        w = np.full(g.size, h)
        w[[0, -1]] = h / 2
        return np.log(w)

    lp1 = _log_prior_grid(g1, prior) + logw(g1)
    rows = np.empty(g0.size)
    for i, b0 in enumerate(g0):
        eta = b0 + np.outer(g1, x)  # (len(g1), n) over beta1
        ll = np.sum(y * eta - np.logaddexp(0.0, eta), axis=1)
        rows[i] = logsumexp(ll + lp1)
    return float(logsumexp(rows + logw(g0))), rows


def grid_log_evidence(x, y, prior, lo=-10.0, hi=10.0, tol=1e-6, start=65, max_points=4097,
                      crop=40.0):
    """log of the (beta0, beta1) joint integrated by a refined trapezoid rule on [lo, hi]^2.

    A coarse pass over the whole square locates the support; the grid is
    then cropped to the box where the log-integrand is within ``crop`` of
    its maximum (the rest contributes below exp(-crop) relative mass) and
    doubled until the log-integral moves by less than ``tol``.
    Returns ``(value, converged)``.
    """
    g = np.linspace(lo, hi, 401)
    h = g[1] - g[0]
    lp1 = _log_prior_grid(g, prior)
    L = np.empty((g.size, g.size))
    for i, b0 in enumerate(g):
        eta = b0 + np.outer(g, x)
        L[i] = np.sum(y * eta - np.logaddexp(0.0, eta), axis=1) + lp1
    keep = L >= L.max() - crop
    i0, i1 = np.flatnonzero(keep.any(axis=1))[[0, -1]]
    j0, j1 = np.flatnonzero(keep.any(axis=0))[[0, -1]]
    box0 = (max(lo, g[i0] - h), min(hi, g[i1] + h))
    box1 = (max(lo, g[j0] - h), min(hi, g[j1] + h))
    prev = None
    N = start
    value = -np.inf
    while N <= max_points:
        value, _ = _trapezoid_log(np.linspace(*box0, N), np.linspace(*box1, N), x, y, prior)
        if prev is not None and abs(value - prev) < tol:
            return value, True
        prev = value
        N = 2 * N - 1
    return value, False


def intercept_log_evidence(y, lo=-30.0, hi=30.0, N=200001):
    """Flat-prior intercept-only evidence by a fine 1-d trapezoid rule."""
    g = np.linspace(lo, hi, N)
    s, n = float(np.sum(y)), y.size
    ll = s * g - n * np.logaddexp(0.0, g)
    h = g[1] - g[0]
    w = np.full(N, h)
    w[[0, -1]] = h / 2
    return float(logsumexp(ll + np.log(w)))


def brute_force_hppm(candidates, mandatory, ds, prior, order_seed=None):
    """Score all 2^p models via bitmasks and take the argmax with the stated tie-break.

    ``order_seed`` shuffles the enumeration order to check order independence.
    """
    cand = sorted(candidates)
    p = len(cand)
    masks = list(range(2**p))
    if order_seed is not None:
        np.random.default_rng(order_seed).shuffle(masks)
    best_key, best = None, None
    for mask in masks:
        model = tuple(cand[i] for i in range(p) if mask >> i & 1)
        score = laplace_log_evidence(model, mandatory, ds, prior) + log_model_prior(len(model), p)
        key = (-score, len(model), model)
        if best_key is None or key < best_key:
            best_key, best = key, (model, score)
    return best


def all_subsets(cand):
    return [m for k in range(len(cand) + 1) for m in itertools.combinations(cand, k)]


def log_comb(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
