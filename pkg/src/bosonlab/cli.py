"""Command line entry point: ``bosonlab run|validate|report``."""
from __future__ import annotations

import argparse
import sys

from . import harness


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("config_pos", nargs="?", metavar="CONFIG")
    p.add_argument("--config", help="TOML or JSON experiment file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonlab")
    sub = parser.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="run every experiment in a config")
    _add_common(run)
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    val = sub.add_parser("validate", help="check a config without running it")
    _add_common(val)
    rep = sub.add_parser("report", help="summarise an exported table")
    rep.add_argument("table")
    return parser


def _config_path(args) -> str:
    path = args.config or args.config_pos
    if not path:
        raise SystemExit("a config file is required (positional or --config)")
    return path


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "validate":
        try:
            cfg = harness.load_config(_config_path(args), args.seed)
        except (harness.ConfigError, OSError, ValueError) as err:
            print(f"invalid: {err}", file=sys.stderr)
            return 1
        print(f"ok: {len(cfg.experiments)} experiments, hash {cfg.config_hash}")
        return 0
    if args.verb == "run":
        cfg = harness.load_config(_config_path(args), args.seed)
        tables = harness.run_config(cfg, args.out, args.format, args.threads)
        status = 0
        for t in tables:
            ok = harness.table_passes(t)
            status |= 0 if ok else 1
            print(f"{t.name}: {len(t.rows)} rows, {'pass' if ok else 'FAIL'}")
        return status
    table = harness.read_table(args.table)
    statuses: dict[str, int] = {}
    for r in table.rows:
        statuses[str(r.get("status"))] = statuses.get(str(r.get("status")), 0) + 1
    print(f"{table.name}: {len(table.rows)} rows; status counts {statuses}")
    if table.provenance:
        print(f"config hash {table.provenance.get('config_hash')}, seed {table.provenance.get('seed')}")
    for key, val in table.summary.items():
        print(f"{key}: {val}")
    return 0 if harness.table_passes(table) else 1


if __name__ == "__main__":
    sys.exit(main())
