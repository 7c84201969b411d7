"""Command-line front end.

Subcommands::

    qfilterlab run <config.json>
    qfilterlab list
    qfilterlab acceptance [--only NAME_OR_NUMBER] [--verdict PATH]
    qfilterlab ito simplify "<expr>"
    qfilterlab ito table

Exit codes: 0 success, 2 configuration or input error, 3 numeric failure,
4 acceptance failure (a verdict came out false).  Errors are reported on
stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys

from .. import ito
from ..errors import ConfigParseError, ExperimentUnknown, ItoSyntaxError, QFilterError
from . import acceptance
from .config import load_config
from .registry import registry_list
from .runner import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ACCEPTANCE = 4


def _error(exc, code):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("line", "column", "pos"):
        if getattr(exc, attr, None) is not None:
            doc[attr] = getattr(exc, attr)
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    return code


def _cmd_run(args):
    try:
        cfg = load_config(args.config)
    except (ConfigParseError, ExperimentUnknown) as exc:
        return _error(exc, EXIT_CONFIG)
    try:
        result, out_dir = run_experiment(cfg)
    except QFilterError as exc:
        return _error(exc, EXIT_NUMERIC)
    status = "PASS" if result["passed"] else "FAIL"
    print(f"[{status}] {cfg.experiment} (seed {cfg.seed}) -> {out_dir}")
    return EXIT_OK if result["passed"] else EXIT_ACCEPTANCE


def _cmd_list(args):
    for name, doc, criterion in registry_list():
        print(f"{name:<26} criterion {criterion:>2}  {doc}")
    return EXIT_OK


def _cmd_acceptance(args):
    try:
        acceptance.select(args.only)
    except KeyError as exc:
        return _error(ExperimentUnknown(exc.args[0]), EXIT_CONFIG)
    try:
        doc = acceptance.run_acceptance(args.only, verdict_path=args.verdict, echo=print)
    except QFilterError as exc:
        return _error(exc, EXIT_NUMERIC)
    print(f"verdict written to {args.verdict}")
    return EXIT_OK if doc["passed"] else EXIT_ACCEPTANCE


def _cmd_ito(args):
    if args.ito_cmd == "table":
        print(ito.format_table())
        return EXIT_OK
    try:
        expr = ito.parse_ito_expr(args.expr)
    except ItoSyntaxError as exc:
        return _error(exc, EXIT_CONFIG)
    print(expr)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="qfilterlab", description="Quantum and classical filtering experiments")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("config")
    r.set_defaults(func=_cmd_run)
    sub.add_parser("list", help="list registered experiments").set_defaults(func=_cmd_list)
    a = sub.add_parser("acceptance", help="run the acceptance suite")
    a.add_argument("--only", default=None, help="criterion number or experiment name")
    a.add_argument("--verdict", default="acceptance_verdict.json", help="verdict file path")
    a.set_defaults(func=_cmd_acceptance)
    i = sub.add_parser("ito", help="quantum Ito calculus utilities")
    isub = i.add_subparsers(dest="ito_cmd", required=True)
    s = isub.add_parser("simplify", help="print the canonical form of an increment expression")
    s.add_argument("expr")
    isub.add_parser("table", help="print the quantum Ito table")
    i.set_defaults(func=_cmd_ito)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
