"""Command-line entry point: ``simulate``, ``select`` and ``bench``.

Every flag can also be given in a flat ``key = value`` config file passed
with ``--config``; flags on the command line win. Exit codes: 0 success,
1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .baselines import EnetConfig
from .bench import DEFAULT_METHODS, run_benchmark
from .data import DataError, Dataset, load_dataset, write_dataset
from .glm import NumericalError
from .priors import PriorConfig
from .scheme import SchemeConfig, run_selection
from .simulate import SimSpec, read_truth, simulate, write_truth

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("nlselect")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _list(v):
    return tuple(x.strip() for x in str(v).split(",") if x.strip())


# (flag, type, default, help) per subcommand
_SIM_OPTS = [
    ("n", int, 500, "subjects"),
    ("p", int, 1000, "variables"),
    ("block-size", int, 10, "LD block size"),
    ("rho", float, 0.5, "within-block latent AR(1) correlation"),
    ("maf-lo", float, 0.05, "lower allele-frequency bound"),
    ("maf-hi", float, 0.5, "upper allele-frequency bound"),
    ("n-causal", int, 5, "number of causal variables"),
    ("effect-sd", float, 1.0, "sd of causal effects"),
    ("min-effect", float, 0.0, "floor on |effect| (0 keeps raw normal draws)"),
    ("offset", float, 0.0, "intercept of the generative linear predictor"),
    ("seed", int, 0, "random seed"),
    ("out", str, None, "output directory"),
]
_SCHEME_OPTS = [
    ("prior", str, "pmom", "pmom or pimom"),
    ("tau", float, 0.2, "prior scale"),
    ("phi", float, 1.0, "dispersion"),
    ("order-r", int, 1, "pMOM order"),
    ("nu", float, 1.0, "piMOM shape"),
    ("k0", int, 1, "leading variables per iteration"),
    ("r", float, 0.3, "leading-set correlation threshold"),
    ("m", int, None, "target number of selected variables"),
    ("maxno", int, 3, "allowed empty iterations"),
    ("maxno-mode", str, "consecutive", "consecutive or total"),
    ("exhaustive-cap", int, 12, "largest leading set searched exhaustively"),
    ("standardize", _bool, True, "standardize columns first"),
    ("seed", int, 0, "random seed"),
]
_SELECT_OPTS = [("x", str, None, "predictor CSV"), ("y", str, None, "outcome CSV or column name"),
                *_SCHEME_OPTS, ("out", str, None, "output directory")]
_BENCH_OPTS = [
    ("data", str, None, "directory with X.csv, y.csv, truth.csv"),
    ("methods", _list, DEFAULT_METHODS, "comma-separated methods"),
    *[o for o in _SCHEME_OPTS if o[0] != "prior"],
    ("folds", int, 10, "CV folds for penalized baselines"),
    ("n-lambda", int, 100, "lambda grid size"),
    ("lambda-min-ratio", float, 1e-3, "smallest lambda as a fraction of lambda_max"),
    ("one-se", _bool, False, "use the 1-SE rule instead of the CV minimum"),
    ("out", str, None, "output directory"),
]
_COMMANDS = {"simulate": _SIM_OPTS, "select": _SELECT_OPTS, "bench": _BENCH_OPTS}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for k, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{k}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("_", "-")] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nlselect", description="Iterative non-local prior variable selection.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in _COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key = value config file")
        for flag, _typ, default, hlp in opts:
            # typed later, after merging with the config file
            sp.add_argument(f"--{flag}", default=None, help=f"{hlp} (default: {default})")
    return parser


def resolve_options(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, config file and command line into typed values."""
    opts = _COMMANDS[command]
    cfg = read_config(args.config) if args.config else {}
    known = {o[0] for o in opts}
    unknown = set(cfg) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    values = {}
    for flag, typ, default, _h in opts:
        raw = getattr(args, flag.replace("-", "_"))
        if raw is None:
            raw = cfg.get(flag)
        if raw is None:
            values[flag] = default
            continue
        try:
            values[flag] = typ(raw)
        except ValueError as exc:
            raise UsageError(f"--{flag}: {exc}") from None
    for flag, *_ in opts:
        if flag in ("out", "x", "y", "data") and values[flag] is None:
            raise UsageError(f"--{flag} is required")
    return values


def _scheme(v: dict, family="pmom") -> SchemeConfig:
    try:
        prior = PriorConfig(family=v.get("prior", family), tau=v["tau"], order_r=v["order-r"],
                            nu=v["nu"], phi=v["phi"])
        return SchemeConfig(k0=v["k0"], r_thresh=v["r"], m=v["m"], maxno=v["maxno"], prior=prior,
                            exhaustive_cap=v["exhaustive-cap"], seed=v["seed"],
                            maxno_mode=v["maxno-mode"], standardize=v["standardize"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(v: dict) -> int:
    try:
        spec = SimSpec(n=v["n"], p=v["p"], block_size=v["block-size"], rho=v["rho"],
                       maf_range=(v["maf-lo"], v["maf-hi"]), n_causal=v["n-causal"],
                       effect_sd=v["effect-sd"], min_effect=v["min-effect"], seed=v["seed"],
                       offset=v["offset"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(v["out"])
    out.mkdir(parents=True, exist_ok=True)
    X, y, causal, effects = simulate(spec)
    names = tuple(f"SNP{j}" for j in range(spec.p))
    write_dataset(Dataset(X, y, names), out / "X.csv", out / "y.csv")
    write_truth(out / "truth.csv", causal, effects)
    log.info("wrote %s", out)
    return EXIT_OK


def write_selected_csv(path, res, ds: Dataset) -> None:
    it_of = {}
    for rec in res.trace:
        for j in rec["added"]:
            it_of[j] = rec["iteration"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["order", "index", "name", "iteration"])
        for k, j in enumerate(res.selected, start=1):
            w.writerow([k, j, ds.names[j], it_of[j]])


def cmd_select(v: dict) -> int:
    cfg = _scheme(v)
    ds = load_dataset(v["x"], v["y"])
    res = run_selection(ds, cfg)
    out = Path(v["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_selected_csv(out / "selected.csv", res, ds)
    res.write_trace(out / "trace.jsonl")
    log.info("selected %d variables (%s)", len(res.selected), res.stop_reason)
    return EXIT_OK


def cmd_bench(v: dict) -> int:
    data = Path(v["data"])
    ds = load_dataset(data / "X.csv", data / "y.csv")
    causal, _effects = read_truth(data / "truth.csv")
    if any(j < 0 or j >= ds.p for j in causal):
        raise DataError("truth.csv refers to columns outside X")
    scheme = _scheme(v)
    try:
        enet = EnetConfig(n_lambda=v["n-lambda"], lambda_min_ratio=v["lambda-min-ratio"],
                          folds=v["folds"], seed=v["seed"], one_se=v["one-se"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reports = run_benchmark(ds, causal, v["methods"], v["out"], scheme, enet)
    for r in reports:
        log.info("%-10s n=%-4d tpr=%.3f fdr=%.3f %s", r.method, r.n_selected, r.tpr, r.fdr, r.error)
    return EXIT_OK


_HANDLERS = {"simulate": cmd_simulate, "select": cmd_select, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        values = resolve_options(args.command, args)
        return _HANDLERS[args.command](values)
    except UsageError as exc:
        print(f"nlselect: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"nlselect: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"nlselect: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
