"""Command-line entry point: ``hetmem {eval,compare,sweep,trace-sim,config}``."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import config as cfg
from .dramcache import CacheConfig, trace_sim
from .engine import MODES, REPORT_COLUMNS, Scenario, compare, evaluate, records_to_csv, scenario_from_doc
from .placement import OutOfMemory
from .sweeps import SWEEPS, SweepGrid, write_svg
from .workload import generate_trace, read_trace_file, workload_from_doc

EXIT_OK, EXIT_INVALID, EXIT_CAPACITY, EXIT_USAGE = 0, 1, 2, 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _doc_or_path(text: str):
    """JSON from a file path or inline JSON text; anything else is returned as is."""
    if os.path.isfile(text):
        with open(text) as fh:
            return json.load(fh)
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    return text


def _load_config(path: str | None) -> cfg.MachineConfig:
    if path is None:
        return cfg.default_paper_config()
    with open(path) as fh:
        return cfg.load_config(fh.read())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hetmem", description="DRAM + persistent-memory performance and energy model")
    p.add_argument("--seed", type=int, default=0, help="seed for generated traces")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate one scenario")
    e.add_argument("--scenario", required=True, help=f"scenario JSON file or a mode name ({', '.join(MODES)})")
    e.add_argument("--workload", default="read_only", help="preset name, workload JSON file or inline JSON (mode-name scenarios)")
    e.add_argument("--data-size", type=float, help="data size in bytes (mode-name scenarios)")
    e.add_argument("--config", help="machine config JSON file")
    e.add_argument("--out", choices=("json", "csv"), default="json")

    c = sub.add_parser("compare", help="compare scenarios against the first one")
    c.add_argument("--scenarios", required=True, help="JSON file holding a list of scenarios")
    c.add_argument("--config")
    c.add_argument("--out", choices=("json", "csv"), default="csv")

    s = sub.add_parser("sweep", help="roofline / power-line / arch-line sweep as CSV")
    s.add_argument("--kind", required=True, choices=tuple(SWEEPS))
    s.add_argument("--grid", help="grid JSON file: {ai_values, distributions}")
    s.add_argument("--svg", help="also write a line plot here")
    s.add_argument("--config")

    t = sub.add_parser("trace-sim", help="replay a trace through a direct-mapped cache")
    t.add_argument("--trace", help="trace file of 'R <line>' / 'W <line>' records")
    t.add_argument("--sets", type=int, required=True)
    t.add_argument("--line-bytes", type=int, default=64)
    t.add_argument("--workload", default="random_read", help="workload for a generated trace (no --trace)")
    t.add_argument("--events", type=int, default=100_000, help="length of a generated trace")
    t.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    k = sub.add_parser("config", help="machine configuration utilities")
    g = k.add_mutually_exclusive_group(required=True)
    g.add_argument("--print-default", action="store_true", help="dump the built-in calibration")
    g.add_argument("--validate", metavar="FILE", help="validate a config file and print it merged")
    return p


def _cmd_eval(args) -> str:
    config = _load_config(args.config)
    if args.scenario in MODES:
        spec = workload_from_doc(_doc_or_path(args.workload))
        if args.data_size is not None:
            spec = spec.replace(data_size=int(args.data_size))
        scenario = Scenario(args.scenario, args.scenario, spec)
    else:
        doc = _doc_or_path(args.scenario)
        if isinstance(doc, str):
            raise ValueError(f"{doc!r} is neither a scenario file nor a mode name")
        scenario = scenario_from_doc(doc)
    report = evaluate(scenario, config)
    row = report.row(scenario.name)
    if args.out == "csv":
        return records_to_csv([row], REPORT_COLUMNS)
    row["hit_rate"] = report.hit_rate
    row["capacity_limit"] = report.capacity_limit
    row["bytes_moved"] = report.bytes_moved
    return json.dumps(row, indent=2) + "\n"


def _cmd_compare(args) -> str:
    config = _load_config(args.config)
    with open(args.scenarios) as fh:
        docs = json.load(fh)
    if not isinstance(docs, list):
        raise ValueError("scenario file must hold a JSON list")
    table = compare([scenario_from_doc(d) for d in docs], config)
    return table.to_csv() if args.out == "csv" else table.to_json() + "\n"


def _cmd_sweep(args) -> str:
    config = _load_config(args.config)
    grid = SweepGrid()
    if args.grid:
        with open(args.grid) as fh:
            grid = SweepGrid.from_doc(fh.read())
    result = SWEEPS[args.kind](config, grid)
    if args.svg:
        write_svg(result, args.svg)
    return result.to_csv()


def _cmd_trace_sim(args) -> str:
    if args.sets < 1 or args.line_bytes < 1:
        raise ValueError("--sets and --line-bytes must be >= 1")
    if args.trace:
        trace = read_trace_file(args.trace, args.line_bytes)
    else:
        spec = workload_from_doc(_doc_or_path(args.workload))
        trace = generate_trace(spec, args.seed, args.events, args.line_bytes)
    stats = trace_sim(trace, CacheConfig.with_sets(args.sets, args.line_bytes))
    doc = {
        "accesses": stats.accesses,
        "hits": stats.hits,
        "misses": stats.misses,
        "dirty_evictions": stats.dirty_evictions,
        "hit_rate": float(f"{stats.hit_rate:.6g}"),
    }
    return json.dumps(doc, indent=2) + "\n"


def _cmd_config(args) -> str:
    if args.print_default:
        return cfg.dumps(cfg.default_paper_config()) + "\n"
    return cfg.dumps(_load_config(args.validate)) + "\n"


_COMMANDS = {
    "eval": _cmd_eval,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "trace-sim": _cmd_trace_sim,
    "config": _cmd_config,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        out = _COMMANDS[args.command](args)
    except OutOfMemory as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(out)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
