"""Synthetic LD-block genotypes and logistic phenotypes."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from .data import DataError

MAX_REDRAWS = 10


@dataclass(frozen=True)
class SimSpec:
    n: int = 2000
    p: int = 20000
    block_size: int = 10
    rho: float = 0.5
    maf_range: tuple = (0.05, 0.5)
    n_causal: int = 20
    effect_sd: float = 1.0
    # |effect| is raised to at least this value, keeping the sign
    min_effect: float = 0.0
    seed: int = 0
    offset: float = 0.0

    def __post_init__(self):
        lo, hi = self.maf_range
        if not 0 < lo <= hi <= 0.5:
            raise ValueError("maf_range must satisfy 0 < low <= high <= 0.5")
        if not 0 <= self.rho < 1:
            raise ValueError("rho must be in [0, 1)")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if not 0 <= self.n_causal <= self.p:
            raise ValueError("n_causal must be in [0, p]")


def _ar1_latent(rng, n, size, rho):
    z = rng.standard_normal((n, size))
    out = np.empty_like(z)
    out[:, 0] = z[:, 0]
    s = np.sqrt(1.0 - rho * rho)
    for j in range(1, size):
        out[:, j] = rho * out[:, j - 1] + s * z[:, j]
    return out


def _block(spec: SimSpec, b: int, size: int, attempt: int) -> np.ndarray:
    rng = np.random.default_rng([spec.seed, b, attempt])
    lo, hi = spec.maf_range
    h1 = _ar1_latent(rng, spec.n, size, spec.rho)
    h2 = _ar1_latent(rng, spec.n, size, spec.rho)
    f = rng.uniform(lo, hi, size)
    cut = norm.ppf(1.0 - f)
    return (h1 > cut).astype(float) + (h2 > cut).astype(float)


def simulate_genotypes(spec: SimSpec) -> np.ndarray:
    """Genotype matrix in {0, 1, 2} with AR(1) latent correlation inside blocks.

    Each column sums two thresholded latent haplotypes, so genotypes follow
    Hardy-Weinberg proportions at the column's allele frequency. Blocks are
    redrawn from a fresh sub-seed while any of their columns is constant.
    """
    X = np.empty((spec.n, spec.p))
    for b, lo in enumerate(range(0, spec.p, spec.block_size)):
        size = min(spec.block_size, spec.p - lo)
        for attempt in range(MAX_REDRAWS + 1):
            G = _block(spec, b, size, attempt)
            if np.all(np.ptp(G, axis=0) > 0):
                break
        else:
            raise RuntimeError(f"block {b}: constant genotype column after {MAX_REDRAWS} redraws")
        X[:, lo:lo + size] = G
    return X


def sample_causal_effects(spec: SimSpec):
    """Causal column indices (sorted) and their N(0, effect_sd^2) effects."""
    rng = np.random.default_rng([spec.seed, 1 << 20])
    idx = np.sort(rng.choice(spec.p, size=spec.n_causal, replace=False))
    effects = rng.normal(0.0, 1.0, spec.n_causal) * spec.effect_sd
    if spec.min_effect > 0:
        effects = np.where(effects < 0, -1.0, 1.0) * np.maximum(np.abs(effects), spec.min_effect)
    return tuple(int(i) for i in idx), effects


def simulate_phenotype(X, causal, effects, seed, offset=0.0) -> np.ndarray:
    """Binary outcome from the logistic model on the standardized causal columns."""
    causal = list(causal)
    effects = np.asarray(effects, dtype=float)
    if len(causal) != effects.size:
        raise ValueError("causal and effects lengths differ")
    rng = np.random.default_rng([seed, 2 << 20])
    n = X.shape[0]
    eta = np.full(n, float(offset))
    if causal:
        Xc = X[:, causal]
        Xc = (Xc - Xc.mean(axis=0)) / Xc.std(axis=0, ddof=1)
        eta += Xc @ effects
    return (rng.uniform(size=n) < expit(eta)).astype(float)


def simulate(spec: SimSpec):
    """Genotypes, phenotype, causal indices and effects for one replicate."""
    X = simulate_genotypes(spec)
    causal, effects = sample_causal_effects(spec)
    y = simulate_phenotype(X, causal, effects, spec.seed, spec.offset)
    return X, y, causal, effects


def write_truth(path, causal, effects) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "effect"])
        for j, e in zip(causal, effects):
            w.writerow([int(j), repr(float(e))])


def read_truth(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return tuple(int(r["index"]) for r in rows), np.array([float(r["effect"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: malformed truth file ({exc})") from None
