"""Method comparison harness: TPR/FDR table and paired-bar chart."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .baselines import EnetConfig, cv_select
from .data import Dataset, standardize
from .priors import PIMOM, PMOM
from .scheme import SchemeConfig, run_selection

log = logging.getLogger(__name__)

DEFAULT_METHODS = ("pmom", "pimom", "lasso", "enet0.75", "enet0.5", "enet0.25")
TABLE_NAME = "comparison.csv"
CHART_NAME = "comparison.svg"
TIMING_NAME = "timings.csv"


@dataclass
class MethodReport:
    method: str
    selected: tuple
    tpr: float
    fdr: float
    n_selected: int
    wall_time: float
    error: str = ""


def compute_metrics(selected, causal):
    """True positive rate and false discovery rate of ``selected``."""
    causal = set(int(j) for j in causal)
    if not causal:
        raise ValueError("causal set must be nonempty")
    sel = set(int(j) for j in selected)
    tpr = len(sel & causal) / len(causal)
    fdr = len(sel - causal) / max(1, len(sel))
    return tpr, fdr


def method_label(method: str) -> str:
    """Display name used on the chart's x-axis."""
    m = method.lower()
    if m == PMOM:
        return "pMOM"
    if m == PIMOM:
        return "piMOM"
    if m == "lasso":
        return "LASSO"
    if m.startswith("enet"):
        try:
            return f"ENET({float(m[4:]):g})"
        except ValueError:
            pass
    # unrecognized names (error rows) are shown as given
    return method


def run_method(method: str, ds: Dataset, scheme: SchemeConfig, enet: EnetConfig):
    m = method.lower()
    if m in (PMOM, PIMOM):
        cfg = replace(scheme, prior=replace(scheme.prior, family=m))
        return tuple(run_selection(ds, cfg).selected)
    if m == "lasso":
        alpha = 1.0
    elif m.startswith("enet"):
        alpha = float(m[4:])
    else:
        raise ValueError(f"unknown method {method!r}")
    return cv_select(standardize(ds), replace(enet, alpha=alpha))


def evaluate(methods, ds: Dataset, causal, scheme: SchemeConfig, enet: EnetConfig) -> list[MethodReport]:
    """Run each method in turn; a failing method becomes an error row."""
    reports = []
    for method in methods:
        t0 = time.perf_counter()
        try:
            sel = run_method(method, ds, scheme, enet)
        except Exception as exc:  # reported, not fatal
            log.warning("method %s failed: %s", method, exc)
            reports.append(MethodReport(method, (), float("nan"), float("nan"), 0,
                                        time.perf_counter() - t0, f"{type(exc).__name__}: {exc}"))
            continue
        tpr, fdr = compute_metrics(sel, causal)
        reports.append(MethodReport(method, tuple(sel), tpr, fdr, len(sel), time.perf_counter() - t0))
    return reports


def write_table(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "n_selected", "tpr", "fdr", "error"])
        for r in reports:
            w.writerow([r.method, r.n_selected, _fmt(r.tpr), _fmt(r.fdr), r.error])


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_selected(reports, out_dir: Path) -> None:
    for r in reports:
        with open(out_dir / f"selected_{r.method}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index"])
            for j in r.selected:
                w.writerow([j])


def read_selected(path) -> tuple:
    with open(path, newline="") as fh:
        return tuple(int(row["index"]) for row in csv.DictReader(fh))


def write_timings(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "wall_time"])
        for r in reports:
            w.writerow([r.method, f"{r.wall_time:.3f}"])


def plot_comparison(reports, path) -> None:
    """Paired TPR/FDR bars per method, x-labels ``name (n_selected)``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [f"{method_label(r.method)} ({r.n_selected})" for r in reports]
    tpr = [0.0 if np.isnan(r.tpr) else r.tpr for r in reports]
    fdr = [0.0 if np.isnan(r.fdr) else r.fdr for r in reports]
    x = np.arange(len(reports))
    with plt.rc_context({"svg.hashsalt": "nlselect", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.3 * len(reports) + 1), 4.0))
        ax.bar(x - 0.2, tpr, 0.4, label="TPR", color="#3b6ea8")
        ax.bar(x + 0.2, fdr, 0.4, label="FDR", color="#c8553d")
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=30, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("rate")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def run_benchmark(ds: Dataset, causal, methods=DEFAULT_METHODS, out_dir=".",
                  scheme: SchemeConfig | None = None, enet: EnetConfig | None = None):
    """Evaluate ``methods`` against ``causal`` and write table, chart and per-method selections.

    Wall times go to a separate file so the table and chart depend only on
    the inputs and seeds.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scheme = scheme or SchemeConfig()
    enet = enet or EnetConfig(seed=scheme.seed)
    reports = evaluate(methods, ds, causal, scheme, enet)
    write_table(reports, out / TABLE_NAME)
    write_selected(reports, out)
    write_timings(reports, out / TIMING_NAME)
    plot_comparison(reports, out / CHART_NAME)
    return reports
