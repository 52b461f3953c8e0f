"""Command-line entry point: ``treesplit <subcommand> --seed S [options]``."""
from __future__ import annotations

import argparse
import sys

from .experiments import CHAINS, FAMILIES, SUBCOMMANDS, ConfigError, ExperimentConfig, render, run
from .graph import BudgetExhausted

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _n_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treesplit", description="Balanced tree-splitting experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--graph", choices=FAMILIES, default="complete")
        p.add_argument("--graph-file")
        p.add_argument("--n-list", type=_n_list, default=())
        p.add_argument("--k", type=int, default=2)
        p.add_argument("--p", type=float)
        p.add_argument("--m", type=int)
        p.add_argument("--width", type=int)
        p.add_argument("--height", type=int)
        p.add_argument("--slack", type=int, default=0)
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--steps", type=int, default=10_000)
        p.add_argument("--samples", type=int, default=100, help="up-down samples in algorithm-compare")
        p.add_argument("--chain", choices=CHAINS, default="both")
        p.add_argument("--fixed-graph", action="store_true", help="one random graph for all trials")
        p.add_argument("--diameter", action="store_true", help="also report mean tree diameter")
        p.add_argument("--timing", action="store_true", help="report wall-clock throughput (not reproducible)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    fields = vars(ns).copy()
    return ExperimentConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        table = run(cfg)
    except ConfigError as exc:
        print(f"treesplit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExhausted as exc:
        print(f"treesplit: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    text = render(table, cfg)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
