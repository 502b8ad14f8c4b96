"""Command-line front end.

Exit codes: 0 success, 1 a property check failed, 2 bad usage or invalid
configuration, 3 numerical blow-up during integration.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields

from . import checks, harness
from .errors import ConfigError, InvalidField, NonFinite, UnknownParameter, UnknownPreset
from .harness import Metrics
from .scenario import PRESETS, load_config, preset

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_BLOWUP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _scenario(args):
    if args.preset is not None:
        try:
            return preset(args.preset)
        except UnknownPreset:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}") from None
    try:
        return load_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None


def _fmt_metric(v) -> str:
    return "" if v is None else format(v, ".17g") if isinstance(v, float) else str(v)


def _summary_text(m: Metrics) -> str:
    lines = []
    for k, v in m.to_dict().items():
        lines.append(f"{k}: {'not converged' if v is None else format(v, '.6g')}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    s = _scenario(args)
    traj, metrics = harness.run(s)
    if args.out:
        harness.write_csv(traj, args.out)
    if args.summary == "json":
        print(json.dumps(metrics.to_dict()))
    else:
        print(_summary_text(metrics))
    return EXIT_OK


def parse_values(text: str) -> list:
    """``"20,1000"`` or a JSON list such as ``"[[1,0,0],[0,1,0],[0,0,1]]"``."""
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--values: malformed JSON list ({exc})") from None
    else:
        values = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                values.append(json.loads(item))
            except json.JSONDecodeError:
                values.append(item)
    if not isinstance(values, list) or not values:
        raise UsageError("--values: need at least one value")
    return values


def cmd_sweep(args) -> int:
    base = _scenario(args)
    values = parse_values(args.values)
    try:
        base.replace(args.param, values[0])
    except UnknownParameter:
        raise UsageError(f"--param: unknown parameter {args.param!r}") from None
    rows = harness.sweep(base, args.param, values, workers=args.workers)
    names = [f.name for f in fields(Metrics)]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([args.param] + names)
        for v, m in zip(values, rows):
            d = m.to_dict()
            w.writerow([json.dumps(v)] + [_fmt_metric(d[n]) for n in names])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_check(args) -> int:
    results = checks.run_suite(args.suite, args.seed)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} properties passed")
    return EXIT_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="angspeed", description="Angular-speed observer simulations.")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
        g.add_argument("--config", help="path to a JSON scenario document")

    r = sub.add_parser("run", help="simulate one scenario")
    source(r)
    r.add_argument("--out", help="trajectory CSV path")
    r.add_argument("--summary", choices=("text", "json"), default="text")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="metrics table over one parameter")
    source(s)
    s.add_argument("--param", required=True, help="dotted config path, e.g. gains.gamma")
    s.add_argument("--values", required=True, help="comma-separated values or a JSON list")
    s.add_argument("--out", help="metrics CSV path (default stdout)")
    s.add_argument("--workers", type=int, default=None, help="process pool size")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", help="run randomized invariant suites")
    c.add_argument("--suite", choices=checks.SUITES + ("all",), default="all")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, InvalidField) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownParameter as exc:
        print(f"error: unknown parameter {exc.args[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    except NonFinite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
