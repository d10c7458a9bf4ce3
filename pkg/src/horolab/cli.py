"""Command line entry point.

Exit codes: 0 all checks pass, 1 a verification fails, 2 configuration
error (nothing written), 3 numerical failure (partial report written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError
from .experiments import OPS, parse_config, run
from .report import to_jsonable, write_report
from .suite import CRITERIA, SUITES, run_suite, write_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("HOROLAB_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"HOROLAB_THREADS must be an integer, got {env!r}") from None


def _common(p):
    p.add_argument("--out", help="directory for report files")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=None,
                   help="worker count (default: HOROLAB_THREADS or 1)")
    p.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="horolab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--plot", action="store_true", help="also write PNG figures")
    _common(p)
    p = sub.add_parser("suite", help="run a verification suite")
    p.add_argument("suite_id", choices=SUITES)
    p.add_argument("--inject-flat", action="store_true",
                   help="negative control: replace the rank-one model by a flat one")
    p.add_argument("--triangles", type=int, default=4)
    p.add_argument("--probes", type=int, default=5)
    p.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    _common(p)
    p.set_defaults(format="csv")
    sub.add_parser("list", help="list experiment ids")
    for name in sorted(OPS):
        p = sub.add_parser(name, help=f"run {name}")
        p.add_argument("--config", help="JSON config (model and params)")
        p.add_argument("--model", help="inline JSON model description")
        p.add_argument("--params", help="inline JSON parameters")
        p.add_argument("--plot", action="store_true")
        _common(p)
    return parser


def _load_json(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {what}: {exc}") from None


def _read_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return _load_json(text, path)


def _experiment_config(args):
    if args.command == "run":
        cfg = _read_config(args.config)
    else:
        cfg = _read_config(args.config) if args.config else {}
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg.setdefault("experiment", args.command)
        if cfg["experiment"] != args.command:
            raise ConfigError(f"config names {cfg['experiment']!r}, subcommand is {args.command!r}")
        if args.model:
            cfg["model"] = _load_json(args.model, "--model")
        if args.params:
            cfg["params"] = {**cfg.get("params", {}), **_load_json(args.params, "--params")}
    if isinstance(cfg, dict) and args.seed is not None:
        cfg["seed"] = args.seed
    return parse_config(cfg)


def _cmd_experiment(args):
    config = _experiment_config(args)
    report = run(config)
    out = args.out or config.out
    if out:
        write_report(report, out, args.format)
        if args.plot and report.tables:
            from .plotting import plot_report

            plot_report(report, out)
    json.dump({"experiment": report.experiment, "status": report.status, "passed": report.passed,
               "results": to_jsonable(report.results), "verdicts": to_jsonable(report.verdicts),
               "residuals": to_jsonable(report.residuals), "error": report.error},
              sys.stdout, indent=2)
    sys.stdout.write("\n")
    if report.status != "ok":
        return EXIT_NUMERIC
    return EXIT_OK if report.passed else EXIT_FAIL


def _criteria(text):
    if not text:
        return None
    try:
        picked = sorted({int(c) for c in text.split(",")})
    except ValueError:
        raise ConfigError(f"--criteria must list integers, got {text!r}") from None
    unknown = [c for c in picked if c not in CRITERIA]
    if unknown:
        raise ConfigError(f"unknown criteria {unknown}")
    return picked


def _cmd_suite(args):
    report = run_suite(args.suite_id, _threads(args.threads), args.seed or 0, args.inject_flat,
                       criteria=_criteria(args.criteria), triangles=args.triangles,
                       probes=args.probes)
    for line in report.lines():
        print(line)
    if args.out:
        write_suite(report, args.out, args.format)
    if any(r.error for r in report.results):
        return EXIT_NUMERIC
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            print("\n".join(sorted(OPS)))
            return EXIT_OK
        if args.command == "suite":
            return _cmd_suite(args)
        return _cmd_experiment(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
