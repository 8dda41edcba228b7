"""Command-line entry point: ``weakmeas run | validate | presets list``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from ..errors import ConfigError, GridError
from .config import preset_names, resolve
from .runner import HEADER, NUMERIC_COLUMNS, run_scenario
from .validation import SUITES, run_validation

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _fmt(v):
    if isinstance(v, str):
        return v
    return "" if math.isnan(v) else repr(float(v))


def table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for row in rows:
        w.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def plot_csv(rows) -> str:
    """Long-format ``(x, y, series)`` plot data: every quantity against g."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x [length/A]", "y", "series"])
    for row in rows:
        if row.status != "ok":
            continue
        for name, unit in NUMERIC_COLUMNS[1:]:
            w.writerow([_fmt(row.g), _fmt(getattr(row, name)), f"{row.method}:{name} [{unit}]"])
    return buf.getvalue()


def table_json(cfg, rows, seed) -> str:
    def clean(v):
        return None if isinstance(v, float) and math.isnan(v) else v

    records = [dict(zip(HEADER, (clean(v) for v in row.values()))) for row in rows]
    payload = {"scenario": cfg.name, "seed": seed, "rows": records}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_run(args) -> int:
    cfg = resolve(args.config, args.grid_points)
    try:
        rows = run_scenario(cfg, threads=args.threads)
    except GridError as exc:
        raise ConfigError("$.detector", str(exc)) from None
    out = Path(args.out)
    if args.format == "json":
        _write(out / f"{cfg.table_name}.json", table_json(cfg, rows, args.seed))
    else:
        _write(out / f"{cfg.table_name}.csv", table_csv(rows))
    _write(out / f"{cfg.plot_name}.csv", plot_csv(rows))
    bad = sum(r.status != "ok" for r in rows)
    print(f"{cfg.name}: {len(rows)} rows written to {out} ({bad} not ok)")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = run_validation(args.suite, args.seed, args.tolerance_scale)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(Path(args.out) / "validation.json", text)
    else:
        sys.stdout.write(text)
    status = "passed" if report["passed"] else "FAILED"
    print(f"validate {args.suite}: {report['n_checks'] - report['n_failed']}/{report['n_checks']} {status}",
          file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_presets(args) -> int:
    for name in preset_names():
        print(name)
    return EXIT_OK


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakmeas", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid-points", type=_positive_int, default=None)
    common.add_argument("--threads", type=_positive_int, default=1)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="evaluate a scenario config or preset")
    run.add_argument("config", help="path to a JSON scenario or a preset name")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", parents=[common], help="run randomised property checks")
    val.add_argument("--suite", choices=("all",) + SUITES, default="all")
    val.add_argument(
        "--tolerance-scale", type=float, default=1.0,
        help="multiply every tolerance (values below 1 tighten the checks)",
    )
    val.set_defaults(func=cmd_validate)

    pre = sub.add_parser("presets", help="list shipped scenario presets")
    pre_sub = pre.add_subparsers(dest="action", required=True)
    pre_sub.add_parser("list").set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "run" and args.out is None:
        args.out = "."
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
