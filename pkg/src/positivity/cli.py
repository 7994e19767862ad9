"""Command-line driver.

Subcommands: ``analyze`` runs the full detection chain on a CSV and
writes report.txt, report.json, histogram.svg, and per-group tree
dumps; ``synth`` writes a synthetic dataset CSV; ``explain-tree``
prints the pruned per-group trees and extracted rules to stdout.

Exit codes: 0 clean, 3 violation detected, 1 usage or file problem,
2 invalid data. The split keeps the scientific verdict distinguishable
from plumbing failures in shell pipelines.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .data import Config, load_csv, write_csv
from .explain import NO_VIOLATION_TEXT, render_report, render_text
from .figures import emit_histogram_svg
from .pipeline import AnalysisResult, DataError, analyze_dataset
from .synth import DEFAULT_CARVE, SynthSpec, generate
from .tree import render_tree_text

logger = logging.getLogger(__name__)

ENV_LOG = "POSITIVITY_LOG"

EXIT_CLEAN = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VIOLATION = 3

_GROUP_FILES = {0: "tree_control.txt", 1: "tree_treated.txt"}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 on usage errors instead of 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _configure_logging() -> None:
    name = os.environ.get(ENV_LOG, "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s"
    )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--treatment-col", required=True,
        help="name of the binary treatment column",
    )
    parser.add_argument("--bins", type=int, default=100,
                        help="histogram bin count (default 100)")
    parser.add_argument("--alpha", type=float, default=0.01,
                        help="significance level (default 0.01)")
    parser.add_argument("--beta", type=float, default=0.9,
                        help="pruning purity threshold (default 0.9)")
    parser.add_argument("--gamma", type=float, default=0.01,
                        help="pruning mass threshold (default 0.01)")
    parser.add_argument("--noise-threshold", type=int, default=0,
                        help="histogram count treated as noise (default 0)")
    parser.add_argument("--test", choices=("z", "fisher"), default="z",
                        help="per-bin test (default z)")
    parser.add_argument("--max-depth", type=int, default=10,
                        help="tree depth limit (default 10)")
    parser.add_argument("--folds", type=int, default=1,
                        help="cross-fitting folds, 1 = in-sample (default 1)")
    parser.add_argument("--seed", type=int, default=0,
                        help="random seed (default 0)")


def _config_from_args(args: argparse.Namespace) -> Config:
    return Config(
        bins=args.bins,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        noise_threshold=args.noise_threshold,
        test_kind=args.test,
        max_depth=args.max_depth,
        cross_fit_folds=args.folds,
        seed=args.seed,
    )


def _load(args: argparse.Namespace):
    """Load the input CSV, returning (dataset, exit_code)."""
    try:
        return load_csv(args.input, args.treatment_col), None
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except ValueError as exc:
        print(f"error: invalid data: {exc}", file=sys.stderr)
        return None, EXIT_DATA


def _analyze(args: argparse.Namespace):
    """Shared loading + analysis, returning (result, exit_code)."""
    try:
        config = _config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    dataset, code = _load(args)
    if dataset is None:
        return None, code
    try:
        return analyze_dataset(dataset, config), None
    except DataError as exc:
        for line in exc.diagnostics:
            print(f"error: invalid data: {line}", file=sys.stderr)
        return None, EXIT_DATA


def _write_outputs(result: AnalysisResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    rulesets = list(result.rulesets)
    text = render_text(rulesets, result.report, result.propensity)
    with open(
        os.path.join(out_dir, "report.txt"), "w", encoding="utf-8",
        newline="\n",
    ) as fh:
        fh.write(text)
    doc = render_report(
        result.config, result.report, result.propensity, rulesets
    )
    with open(
        os.path.join(out_dir, "report.json"), "w", encoding="utf-8",
        newline="\n",
    ) as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    emit_histogram_svg(
        result.histograms, result.report,
        os.path.join(out_dir, "histogram.svg"),
    )
    for group, filename in _GROUP_FILES.items():
        tree = result.trees[group]
        body = (
            render_tree_text(tree)
            if tree is not None
            else f"group {group}: no tree (no violating samples to explain)\n"
        )
        with open(
            os.path.join(out_dir, filename), "w", encoding="utf-8",
            newline="\n",
        ) as fh:
            fh.write(body)


def cmd_analyze(args: argparse.Namespace) -> int:
    result, code = _analyze(args)
    if result is None:
        return code
    try:
        _write_outputs(result, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if result.violation_detected:
        print(f"Positivity violation detected. Reports in {args.out}")
        return EXIT_VIOLATION
    print(f"{NO_VIOLATION_TEXT} Reports in {args.out}")
    return EXIT_CLEAN


def cmd_explain_tree(args: argparse.Namespace) -> int:
    result, code = _analyze(args)
    if result is None:
        return code
    if not result.violation_detected:
        print(NO_VIOLATION_TEXT)
        return EXIT_CLEAN
    chunks = []
    for group in (0, 1):
        tree = result.trees[group]
        if tree is not None:
            chunks.append(render_tree_text(tree))
    chunks.append(
        render_text(list(result.rulesets), result.report, result.propensity)
    )
    print("\n".join(chunks), end="")
    return EXIT_CLEAN


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        spec = SynthSpec(
            n=args.n,
            seed=args.seed,
            noise_covariates=args.noise_covariates,
            carve=() if args.no_carve else DEFAULT_CARVE,
            carve_mode=args.carve_mode,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dataset = generate(spec)
    try:
        write_csv(dataset, args.output, args.treatment_col)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(
        f"wrote {dataset.n} rows x {dataset.d} features to {args.output}"
    )
    return EXIT_CLEAN


def build_parser() -> _Parser:
    parser = _Parser(
        prog="positivity",
        description=(
            "Detect and explain positivity violations in observational "
            "datasets via propensity score histograms."
        ),
    )
    sub = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )

    p_analyze = sub.add_parser(
        "analyze", help="run detection on a CSV and write reports"
    )
    p_analyze.add_argument("input", help="input CSV path")
    _add_config_flags(p_analyze)
    p_analyze.add_argument(
        "--out", default="positivity_out",
        help="output directory (default positivity_out)",
    )
    p_analyze.set_defaults(func=cmd_analyze)

    p_explain = sub.add_parser(
        "explain-tree", help="print pruned per-group trees and rules"
    )
    p_explain.add_argument("input", help="input CSV path")
    _add_config_flags(p_explain)
    p_explain.set_defaults(func=cmd_explain_tree)

    p_synth = sub.add_parser(
        "synth", help="generate a synthetic dataset CSV"
    )
    p_synth.add_argument("output", help="output CSV path")
    p_synth.add_argument("--n", type=int, default=20000,
                         help="sample count (default 20000)")
    p_synth.add_argument("--seed", type=int, default=0,
                         help="random seed (default 0)")
    p_synth.add_argument("--noise-covariates", type=int, default=0,
                         help="extra standard-normal columns (default 0)")
    p_synth.add_argument("--no-carve", action="store_true",
                         help="skip the planted violation region")
    p_synth.add_argument(
        "--carve-mode", choices=("reassign", "delete"), default="reassign",
        help="force carved samples to control, or drop their treated "
        "members (default reassign)",
    )
    p_synth.add_argument("--treatment-col", default="treatment",
                         help="treatment column name (default treatment)")
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())
