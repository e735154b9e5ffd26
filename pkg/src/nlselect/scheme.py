"""The iterative screen-and-select loop."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .data import Dataset, standardize
from .glm import GRAD_TOL, MAX_ITER
from .priors import PriorConfig
from .screening import screen
from .selection import EXHAUSTIVE_CAP, search_hppm

REACHED_M = "REACHED_M"
MAXNO_EXHAUSTED = "MAXNO_EXHAUSTED"
POOL_EMPTY = "POOL_EMPTY"


@dataclass(frozen=True)
class SchemeConfig:
    """Tuning of the screen-and-select loop.

    ``m=None`` resolves to ``min(p, ceil(n / log n))`` at run time.
    ``maxno_mode`` is ``"consecutive"`` (the empty-iteration counter resets
    whenever something is selected) or ``"total"``.
    """

    k0: int = 1
    r_thresh: float = 0.3
    m: int | None = None
    maxno: int = 3
    prior: PriorConfig = field(default_factory=PriorConfig)
    exhaustive_cap: int = EXHAUSTIVE_CAP
    grad_tol: float = GRAD_TOL
    max_iter: int = MAX_ITER
    seed: int = 0
    maxno_mode: str = "consecutive"
    standardize: bool = True

    def __post_init__(self):
        if self.k0 < 1:
            raise ValueError("k0 must be >= 1")
        if not 0 < self.r_thresh <= 1:
            raise ValueError("r_thresh must be in (0, 1]")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.maxno < 1:
            raise ValueError("maxno must be >= 1")
        if self.maxno_mode not in ("consecutive", "total"):
            raise ValueError("maxno_mode must be 'consecutive' or 'total'")
        if self.exhaustive_cap < 0:
            raise ValueError("exhaustive_cap must be >= 0")


def default_m(n: int, p: int) -> int:
    return min(p, math.ceil(n / math.log(n)))


@dataclass
class SelectionResult:
    selected: list
    trace: list
    stop_reason: str

    def trace_lines(self) -> list[str]:
        return [json.dumps(rec, sort_keys=True) for rec in self.trace]

    def write_trace(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.trace_lines():
                fh.write(line + "\n")


def run_selection(ds: Dataset, cfg: SchemeConfig) -> SelectionResult:
    """Iterate screening and non-local prior selection until a stop rule fires.

    Previously selected variables enter both the MMLE fits and every
    candidate model of later iterations as unpenalized covariates.
    """
    if cfg.standardize:
        ds = standardize(ds)
    m = cfg.m if cfg.m is not None else default_m(ds.n, ds.p)
    candidates = list(range(ds.p))
    selected: list[int] = []
    empty_runs = 0
    trace = []
    it = 0
    stop = None
    while stop is None:
        if not candidates:
            stop = POOL_EMPTY
            break
        it += 1
        rep = screen(ds, candidates, selected, cfg.k0, cfg.r_thresh, cfg.grad_tol, cfg.max_iter)
        mandatory = tuple(sorted(selected))
        added = []
        hppms = []
        for lset in rep.leading_sets:
            if not lset:
                hppms.append(None)
                continue
            sr = search_hppm(lset, mandatory, ds, cfg.prior, cfg.exhaustive_cap)
            b = sr.best
            added.extend(b.model)
            hppms.append({
                "model": list(b.model),
                "log_evidence": b.log_evidence,
                "log_model_prior": b.log_model_prior,
                "log_post_unnorm": b.log_post_unnorm,
                "map_converged": b.map_converged,
                "hessian_jittered": b.hessian_jittered,
                "exhaustive": sr.exhaustive,
                "n_scored": sr.n_scored,
                "hppm_prob": sr.hppm_prob,
                "inclusion_probs": {str(k): v for k, v in sr.inclusion_probs.items()},
            })
        added = sorted(added)
        selected.extend(added)
        removed = {j for s in rep.leading_sets for j in s}
        n_before = len(candidates)
        candidates = [j for j in candidates if j not in removed]
        if added:
            if cfg.maxno_mode == "consecutive":
                empty_runs = 0
        else:
            empty_runs += 1
        if len(selected) >= m:
            stop = REACHED_M
        elif empty_runs >= cfg.maxno:
            stop = MAXNO_EXHAUSTED
        elif not candidates:
            stop = POOL_EMPTY
        trace.append({
            "iteration": it,
            "n_candidates_before": n_before,
            "n_candidates_after": len(candidates),
            "leaders": rep.leaders,
            "leader_assoc": [rep.assoc[j] for j in rep.leaders],
            "leading_sets": [list(s) for s in rep.leading_sets],
            "hppm": hppms,
            "added": added,
            "selected": list(selected),
            "empty_runs": empty_runs,
            "mmle_not_converged": rep.flags,
            "stop_reason": stop,
        })
    return SelectionResult(selected, trace, stop)
