"""Command-line interface: ``lofs run``, ``lofs eval`` and ``lofs compare``.

Stages exchange JSON reports.  Exit codes: 0 success, 2 configuration error,
3 data error.  Every failure prints one line starting with ``error:``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dataset import KIND_INFERENCE, infer_format, load_dataset, make_stream
from .exceptions import ConfigurationError, DataError, LofsError
from .lfi import SelectorConfig, run_selector
from .lgf import run_group_selector
from .measures import MEASURES
from .sc import CLASSIFIERS, METRICS, compare, evaluate

log = logging.getLogger("lofs")

ALGORITHM_FLAGS = {
    "alpha-investing": "alpha_investing",
    "osfs": "osfs",
    "fast-osfs": "fast_osfs",
    "saola": "saola",
    "group-saola": "group_saola",
}
_DEFAULTS = SelectorConfig()
EXIT_CONFIG = 2
EXIT_DATA = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_CONFIG, f"error: {message}\n")


def _add_data_args(p):
    p.add_argument("--data", required=True, help="dataset file (CSV, LIBSVM or ARFF)")
    p.add_argument("--format", choices=["auto", "csv", "libsvm", "arff"], default="auto",
                   help="input format; auto uses the file suffix")
    p.add_argument("--no-header", action="store_true", help="CSV file has no header row")
    p.add_argument("--class-column", default="-1", help="CSV class column, index or header name")
    p.add_argument("--kinds", choices=KIND_INFERENCE, default="auto", help="CSV feature kind inference")
    p.add_argument("--groups", default=None, help="group sidecar JSON file")


def _add_selector_args(p):
    p.add_argument("--alpha", type=float, default=_DEFAULTS.alpha, help="significance level")
    p.add_argument("--max-cond-size", type=int, default=_DEFAULTS.max_cond_size,
                   help="largest conditioning set for OSFS/Fast-OSFS")
    p.add_argument("--measure", choices=("auto",) + MEASURES, default="auto",
                   help="independence measure; auto picks by data kind")
    p.add_argument("--saola-delta", type=float, default=_DEFAULTS.saola_delta, help="SAOLA relevance threshold")
    p.add_argument("--ai-w0", type=float, default=_DEFAULTS.ai_w0, help="Alpha-investing initial wealth")
    p.add_argument("--ai-dw", type=float, default=_DEFAULTS.ai_dw, help="Alpha-investing payout on acceptance")
    p.add_argument("--order", choices=["natural", "shuffled"], default="natural", help="feature arrival order")
    p.add_argument("--seed", type=int, default=0, help="seed for --order shuffled")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="lofs", description="Online streaming feature selection", formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="increase log verbosity")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a selector over a feature stream", formatter_class=fmt)
    run.add_argument("--algorithm", required=True, choices=list(ALGORITHM_FLAGS), help="selector")
    _add_data_args(run)
    _add_selector_args(run)
    run.add_argument("--output", default="-", help="report JSON path, - for stdout")
    run.add_argument("--no-trace", action="store_true", help="omit the per-arrival trace from the report")

    ev = sub.add_parser("eval", help="cross-validate the selection in a report", formatter_class=fmt)
    ev.add_argument("--report", required=True, help="report JSON written by 'run'")
    _add_data_args(ev)
    ev.add_argument("--classifier", choices=[c.replace("_", "-") for c in CLASSIFIERS], default="knn",
                    help="built-in classifier")
    ev.add_argument("--k", type=int, default=3, help="neighbours for knn")
    ev.add_argument("--folds", type=int, default=10, help="cross-validation folds")
    ev.add_argument("--cv-seed", type=int, default=0, help="fold assignment seed")
    ev.add_argument("--select-per-fold", action="store_true", help="re-run the selector inside each training fold")
    ev.add_argument("--output", default="-", help="evaluated report JSON path, - for stdout")

    cmp_ = sub.add_parser("compare", help="Friedman/Nemenyi comparison of evaluated reports", formatter_class=fmt)
    cmp_.add_argument("--reports", required=True, nargs="+", help="report files or directories of *.json reports")
    cmp_.add_argument("--metric", choices=METRICS, default="accuracy", help="metric to rank")
    cmp_.add_argument("--alpha", type=float, default=0.05, choices=[0.05, 0.10], help="Nemenyi significance level")
    cmp_.add_argument("--output", default=None, help="comparison JSON path (default: stdout after the table)")
    cmp_.add_argument("--table", default=None, help="write the plain-text rank table here instead of stdout")
    return parser


def _selector_config(args) -> SelectorConfig:
    return SelectorConfig(
        alpha=args.alpha,
        max_cond_size=args.max_cond_size,
        measure=None if args.measure == "auto" else args.measure,
        saola_delta=args.saola_delta,
        ai_w0=args.ai_w0,
        ai_dw=args.ai_dw,
    )


def _load(args):
    path = Path(args.data)
    if not path.is_file():
        raise DataError(f"data file {str(path)!r} not found")
    fmt = None if args.format == "auto" else args.format
    options = {"groups": args.groups}
    if (fmt or infer_format(path)) == "csv":
        options.update(has_header=not args.no_header, class_column=args.class_column, kind_inference=args.kinds)
    return load_dataset(path, fmt, **options)


def _write_json(doc, output):
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _run_selection(dataset, algorithm, config, order, seed):
    if algorithm == "group_saola":
        stream = make_stream(dataset, mode="group", order=order, seed=seed)
        return stream, run_group_selector(dataset, stream, config)
    stream = make_stream(dataset, order=order, seed=seed)
    return stream, run_selector(dataset, stream, algorithm, config)


def cmd_run(args) -> int:
    algorithm = ALGORITHM_FLAGS[args.algorithm]
    if algorithm == "group_saola" and not args.groups and infer_format(Path(args.data)) != "arff":
        raise ConfigurationError("group mode requires --groups")
    config = _selector_config(args)
    dataset = _load(args)
    if algorithm == "group_saola" and dataset.groups is None:
        raise ConfigurationError("group mode requires --groups")
    stream, state = _run_selection(dataset, algorithm, config, args.order, args.seed)
    log.info("%s selected %d of %d features", algorithm, len(state.selected), dataset.n_features)
    report = {
        "algorithm": algorithm,
        "config": dataclasses.asdict(config),
        "measure": state.measure,
        "dataset": dataset.name,
        "n_features": dataset.n_features,
        "n_instances": dataset.n_instances,
        "stream": {"mode": stream.mode, "order_policy": args.order, "seed": args.seed, "order": list(stream.order)},
        "selected": list(state.selected),
        "feature_names": [dataset.feature_names[j] for j in state.selected],
        "metrics": None,
        "runtime_ms": state.runtime_ms,
        "n_tests_executed": state.n_tests,
        "n_tests_computed": state.n_tests_computed,
    }
    if algorithm == "group_saola":
        report["selected_groups"] = {k: list(v) for k, v in state.selected_groups.items()}
    elif algorithm == "alpha_investing":
        report["wealth"] = state.wealth
    if not args.no_trace:
        report["arrival_trace"] = [e.to_dict() for e in state.arrival_log]
    _write_json(report, args.output)
    return 0


def _read_report(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"report {str(path)!r} not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"report {str(path)!r} is not valid JSON: {exc}") from None


def cmd_eval(args) -> int:
    if args.folds < 2:
        raise ConfigurationError("--folds must be at least 2")
    if args.k < 1:
        raise ConfigurationError("--k must be at least 1")
    report = _read_report(args.report)
    for key in ("algorithm", "selected", "feature_names"):
        if key not in report:
            raise DataError(f"report is missing {key!r}")
    dataset = _load(args)
    if args.folds > dataset.n_instances:
        raise ConfigurationError(f"--folds {args.folds} exceeds the {dataset.n_instances} instances in the dataset")
    selected = [int(j) for j in report["selected"]]
    names = report["feature_names"]
    if report.get("n_features", dataset.n_features) != dataset.n_features or any(
        j >= dataset.n_features or dataset.feature_names[j] != name for j, name in zip(selected, names)
    ):
        raise DataError("report feature names do not match the dataset")

    selector = None
    if args.select_per_fold:
        config = SelectorConfig(**report["config"])
        stream_info = report.get("stream", {})
        order, seed = stream_info.get("order_policy", "natural"), stream_info.get("seed", 0)

        def selector(train):
            return _run_selection(train, report["algorithm"], config, order, seed)[1].selected

    classifier = args.classifier.replace("-", "_")
    result = evaluate(dataset, selected, classifier=classifier, folds=args.folds, seed=args.cv_seed,
                      k=args.k, selector=selector)
    out = dict(report)
    out["metrics"] = result.metrics()
    out["evaluation"] = {
        "classifier": classifier,
        "k": args.k,
        "folds": args.folds,
        "cv_seed": args.cv_seed,
        "select_per_fold": args.select_per_fold,
        "fold_details": result.fold_details,
        "runtime_ms": result.runtime_ms,
    }
    _write_json(out, args.output)
    return 0


def _collect_reports(paths):
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.glob("*.json")))
        elif p.is_file():
            files.append(p)
        else:
            raise DataError(f"report path {str(p)!r} not found")
    return files


def cmd_compare(args) -> int:
    results: dict[str, dict[str, dict]] = {}
    for path in _collect_reports(args.reports):
        report = _read_report(path)
        if "algorithm" not in report or "dataset" not in report:
            raise DataError(f"{path}: not a run report")
        if not report.get("metrics"):
            raise ConfigurationError(f"{path}: report has not been evaluated (run 'lofs eval' first)")
        cell = results.setdefault(report["dataset"], {})
        if report["algorithm"] in cell:
            raise ConfigurationError(f"duplicate report for ({report['dataset']}, {report['algorithm']})")
        cell[report["algorithm"]] = report
    algorithms = sorted({a for cells in results.values() for a in cells})
    if len(algorithms) < 2:
        raise ConfigurationError(f"need k >= 2 algorithms to compare, found {len(algorithms)}")
    ordered = {d: {a: results[d][a] for a in algorithms if a in results[d]} for d in sorted(results)}
    report = compare(ordered, metric=args.metric, alpha=args.alpha)
    table = report.rank_table() + "\n"
    if args.table:
        Path(args.table).write_text(table, encoding="utf-8")
    else:
        sys.stdout.write(table)
    _write_json(report.to_dict(), args.output)
    return 0


COMMANDS = {"run": cmd_run, "eval": cmd_eval, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except LofsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
