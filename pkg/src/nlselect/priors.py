"""Non-local coefficient priors (product MOM / inverse-MOM) and the model-size prior."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

PMOM = "pmom"
PIMOM = "pimom"
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorConfig:
    """Non-local prior settings.

    ``tau`` is the MOM scale for ``pmom`` and the iMOM scale for ``pimom``;
    ``order_r`` only applies to ``pmom`` and ``nu`` only to ``pimom``.
    """

    family: str = PMOM
    tau: float = 0.2
    order_r: int = 1
    nu: float = 1.0
    phi: float = 1.0

    def __post_init__(self):
        fam = str(self.family).lower()
        if fam not in (PMOM, PIMOM):
            raise ValueError(f"unknown prior family {self.family!r}")
        object.__setattr__(self, "family", fam)
        for name in ("tau", "nu", "phi"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.order_r not in (1, 2, 3):
            raise ValueError("order_r must be 1, 2 or 3")

    @property
    def scale(self) -> float:
        return self.phi * self.tau


def _double_factorial_odd(r: int) -> int:
    out = 1
    for l in range(1, r + 1):
        out *= 2 * l - 1
    return out


def log_pmom(beta, cfg: PriorConfig) -> float:
    """Log density of the normalized product MOM prior; ``-inf`` at any zero."""
    b = np.atleast_1d(np.asarray(beta, dtype=float))
    if np.any(b == 0):
        return -math.inf
    r, s = cfg.order_r, cfg.scale
    const = (0.5 + r) * math.log(s) + _HALF_LOG_2PI + math.log(_double_factorial_odd(r))
    return float(np.sum(2 * r * np.log(np.abs(b)) - b * b / (2 * s)) - b.size * const)


def log_pimom(beta, cfg: PriorConfig) -> float:
    """Log density of the product inverse-MOM prior; ``-inf`` at any zero."""
    b = np.atleast_1d(np.asarray(beta, dtype=float))
    if np.any(b == 0):
        return -math.inf
    nu, s = cfg.nu, cfg.scale
    const = 0.5 * nu * math.log(s) - gammaln(0.5 * nu)
    return float(np.sum(-(nu + 1) * np.log(np.abs(b)) - s / (b * b)) + b.size * const)


def log_prior(beta, cfg: PriorConfig) -> float:
    if cfg.family == PMOM:
        return log_pmom(beta, cfg)
    return log_pimom(beta, cfg)


def prior_grad_hess(beta, cfg: PriorConfig):
    """Gradient and Hessian diagonal of the log prior, coordinate-wise."""
    b = np.atleast_1d(np.asarray(beta, dtype=float))
    s = cfg.scale
    if cfg.family == PMOM:
        r2 = 2 * cfg.order_r
        return r2 / b - b / s, -r2 / b**2 - 1.0 / s
    k = cfg.nu + 1
    return -k / b + 2 * s / b**3, k / b**2 - 6 * s / b**4


def log_model_prior(k_size: int, p_s: int) -> float:
    """Beta-binomial(1, 1) prior mass of one specific model with ``k_size`` of ``p_s`` variables."""
    if not 0 <= k_size <= p_s:
        raise ValueError(f"need 0 <= k_size <= p_s, got {k_size}, {p_s}")
    return float(betaln(k_size + 1, p_s - k_size + 1))
