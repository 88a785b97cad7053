"""Command-line entry point.

    cvt scenario run configs/backtest.toml --engine both
    cvt figure threshold --range eta=0.51:1:50 --svg threshold.svg
    cvt sweep configs/backtest.toml --axis eta=0.6:1:5 --axis r=0:2:21
    cvt backtest

Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, NumericalError
from .scenario import (
    FIGURES,
    ENGINES,
    ScenarioConfig,
    backtest,
    execute,
    figure,
    parse_range,
    render_svg,
    sweep,
    sweep_points,
    json_safe,
    to_json,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("cvteleport")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cell(v):
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else v


def _write_csv_rows(fh, rows) -> None:
    writer = None
    for row in rows:
        if writer is None:
            writer = csv.DictWriter(fh, fieldnames=list(row), lineterminator="\n")
            writer.writeheader()
        writer.writerow({k: _cell(v) for k, v in row.items()})


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    _write_csv_rows(buf, rows)
    return buf.getvalue()


def _common(p: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    p.add_argument("--out", help="write to this file instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def _engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engine", choices=ENGINES, help="override the config's engine")
    p.add_argument("--grid-size", type=int, help="phase-space points per axis (power of two)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvt", description="CV teleportation negativity calculator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sc = sub.add_parser("scenario", help="run a scenario file")
    sc_sub = sc.add_subparsers(dest="action", required=True)
    run = sc_sub.add_parser("run")
    run.add_argument("file")
    _engine_flags(run)
    _common(run)

    fig = sub.add_parser("figure", help="dataset behind a named figure")
    fig.add_argument("name", help=" | ".join(FIGURES))
    fig.add_argument("--range", action="append", default=[], metavar="K=A:B:N", help="axis override")
    fig.add_argument("--svg", metavar="PATH", help="also render an SVG plot")
    _common(fig, ("csv", "json"))

    sw = sub.add_parser("sweep", help="Cartesian sweep over a scenario template")
    sw.add_argument("file")
    sw.add_argument("--axis", action="append", required=True, metavar="K=A:B:N")
    sw.add_argument("--workers", type=int, default=1)
    _engine_flags(sw)
    _common(sw, ("csv", "json"))

    bt = sub.add_parser("backtest", help="pinned experimental back-test")
    _engine_flags(bt)
    _common(bt)
    return parser


def _scenario(args) -> int:
    cfg = ScenarioConfig.from_file(args.file)
    if args.engine or args.grid_size:
        cfg = cfg.with_overrides(args.engine, args.grid_size)
    result = execute(cfg)
    report = result.report
    if args.format == "csv":
        _emit(_rows_csv([report.flat()]), args.out)
    else:
        _emit(to_json(report.to_dict()), args.out)
    stem = Path(args.out).with_suffix("") if args.out else Path(Path(args.file).stem)
    if "input-wigner" in cfg.outputs:
        result.input_wigner.save(f"{stem}.input.wig")
    if "output-wigner" in cfg.outputs:
        result.output_wigner.save(f"{stem}.output.wig")
    return EXIT_OK


def _figure(args) -> int:
    ranges = dict(parse_range(r) for r in args.range)
    data = figure(args.name, ranges)
    _emit(data.to_csv() if args.format == "csv" else data.to_json(), args.out)
    if args.svg:
        render_svg(data, args.svg, args.name)
    return EXIT_OK


def _sweep(args) -> int:
    cfg = ScenarioConfig.from_file(args.file)
    if args.engine or args.grid_size:
        cfg = cfg.with_overrides(args.engine, args.grid_size)
    axes = dict(parse_range(a) for a in args.axis)
    n = sweep_points(axes, cfg.engine)
    log.info("sweeping %d points", n)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        rows = sweep(cfg, axes, workers=args.workers)
        if args.format == "csv":
            _write_csv_rows(fh, rows)
        else:
            # streamed as a JSON array, one row per line
            fh.write("[\n")
            for i, row in enumerate(rows):
                fh.write(("" if i == 0 else ",\n") + json.dumps(json_safe(row), allow_nan=False))
            fh.write("\n]\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _backtest(args) -> int:
    result = backtest(args.engine or "analytic", args.grid_size)
    if args.format == "csv":
        row = dict(result["report"]["fidelities"], **{k: v for k, v in result["report"].items() if not isinstance(v, dict)})
        row.update({f"limit.{k}": v for k, v in result["limits"].items()})
        row["pass"] = result["pass"]
        _emit(_rows_csv([row]), args.out)
    else:
        _emit(to_json(result), args.out)
    return EXIT_OK if result["pass"] else EXIT_NUMERICAL


COMMANDS = {"scenario": _scenario, "figure": _figure, "sweep": _sweep, "backtest": _backtest}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
