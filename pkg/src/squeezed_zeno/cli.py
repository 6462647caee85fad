"""Command-line scenario runner.

Exit status is 0 on success, 2 for configuration errors and 3 when an
integrated state leaves the Bloch ball.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .dynamics import InvariantViolation
from .scenarios import ConfigError, Table, execute, load_config, load_preset

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_SUBCOMMAND_KIND = {
    "evolve": "evolve",
    "table1": "table1",
    "zeno-compare": "zeno_compare",
    "scan-phase": "phase_scan",
}
_DEFAULT_PRESET = {"table1": "table1", "zeno-compare": "zeno", "scan-phase": "fig1"}


def format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def merge_tables(named: list[tuple[str, Table]]) -> Table:
    """Single table as-is; several get a leading ``scenario`` column over the union of columns."""
    if len(named) == 1:
        return named[0][1]
    columns = []
    for _, table in named:
        columns += [c for c in table.columns if c not in columns]
    merged = Table(["scenario"] + columns)
    for name, table in named:
        idx = {c: i for i, c in enumerate(table.columns)}
        merged.rows.extend([name] + [row[idx[c]] if c in idx else "" for c in columns] for row in table.rows)
    return merged


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        rows = []
        for row in table.rows:
            obj = {}
            for c, v in zip(table.columns, row):
                obj[c] = float(format_value(v)) if isinstance(v, float) else v
            rows.append(obj)
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario config file ([scenario.NAME] sections)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, metavar="U64", help="override the Monte Carlo seed")
    common.add_argument("--dt", type=float, metavar="F", help="override the output time step")
    common.add_argument("--steps", type=int, metavar="N", help="override the number of time steps")

    parser = argparse.ArgumentParser(
        prog="squeezed-zeno",
        description="Two-level atom in a squeezed vacuum bath: free, monitored and indirectly measured dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="tabulate the Bloch vector for each scenario")
    sub.add_parser("table1", parents=[common], help="analytic vs fitted decay rates at the four exponential phases")
    sub.add_parser("zeno-compare", parents=[common], help="undisturbed vs monitored rho_x at phi = 0, phi_Z, phi_AZ")
    sub.add_parser("scan-phase", parents=[common], help="free evolution over a (phi, t) grid")
    fig = sub.add_parser("figure", parents=[common], help="regenerate the data behind a figure preset")
    fig.add_argument("number", type=int, choices=range(1, 7))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "dt": args.dt, "steps": args.steps}
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.config:
            jobs = load_config(args.config, **overrides)
        elif args.command == "figure":
            jobs = load_preset(f"fig{args.number}", **overrides)
        elif args.command in _DEFAULT_PRESET:
            jobs = load_preset(_DEFAULT_PRESET[args.command], **overrides)
        else:
            print(f"error: {args.command} needs --config PATH", file=sys.stderr)
            return EXIT_CONFIG
        kind = _SUBCOMMAND_KIND.get(args.command)
        if kind is not None:
            jobs = [_as_kind(job, kind) for job in jobs]
        table = merge_tables([(job.name, execute(job)) for job in jobs])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = render(table, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _as_kind(job, kind):
    if job.kind == kind:
        return job
    s = job.scenario
    defaults = {
        "evolve": {},
        "table1": {"n_values": (float(s.params.n_bar),)},
        "zeno_compare": {"mc_dt": s.grid.dt},
        "phase_scan": {"phi_min": 0.0, "phi_max": 6.283185307179586, "phi_points": 101},
    }
    return replace(job, kind=kind, extras=defaults[kind])


if __name__ == "__main__":
    sys.exit(main())
