"""Command-line entry point: ``multirsp <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 degenerate scenario (an
outcome or acceptance set with zero probability).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_scenario, parse_basis
from .qstate import NullOutcomeError, PureState
from .reports import (
    TOMOGRAPHY_BASES,
    cmd_decompose,
    cmd_run,
    cmd_selftest,
    cmd_sweep,
    cmd_table1,
    cmd_tomography,
    to_csv,
    to_json,
)

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE = 0, 2, 3


def _common(p: argparse.ArgumentParser, config=False):
    if config:
        p.add_argument("--config", help="scenario JSON file")
    p.add_argument("--shots", type=int, default=None, help="0 for exact probabilities")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multirsp",
        description="Remote state preparation over multiqubit singlets: exact and photonic simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("table1", help="success probabilities on ideal singlets"))

    p = sub.add_parser("tomography", help="per-basis outcome probabilities of a prepared state")
    _common(p, config=True)
    p.add_argument("--state", help="product label such as HDV, used instead of --config")
    p.add_argument("--bases", default=",".join(TOMOGRAPHY_BASES), help="comma list of HV, DA, LR")

    p = sub.add_parser("run", help="run one scenario")
    _common(p, config=True)
    p.add_argument("--clicks", action="store_true", help="CSV of click patterns (photonic mode)")

    p = sub.add_parser("sweep", help="rate, contamination and fidelity across a parameter range")
    _common(p, config=True)
    p.add_argument("--param", required=True, choices=("K", "tanh2K", "eta"))
    p.add_argument("--values", required=True, help="comma-separated values")

    p = sub.add_parser("decompose", help="branch structure of a singlet in Alice's basis")
    _common(p)
    p.add_argument("--k", type=int, default=6, choices=(4, 6))
    p.add_argument("--basis", default="HV")

    _common(sub.add_parser("selftest", help="internal consistency checks"))
    return parser


def _load(args):
    if args.config is None:
        raise ConfigError("--config is required")
    cfg = load_scenario(args.config)
    changes = {}
    if args.shots is not None:
        changes["shots"] = args.shots
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.format is not None:
        changes["output"] = args.format
    return replace(cfg, **changes)


def _dispatch(args):
    """Return (report, format, out_path, csv_table)."""
    fmt, out, table = args.format, args.out, None
    if args.command == "table1":
        report = cmd_table1()
    elif args.command == "decompose":
        report = cmd_decompose(args.k, parse_basis(args.basis))
    elif args.command == "selftest":
        report = cmd_selftest(shots=args.shots or 20000, seed=args.seed or 0)
    elif args.command == "tomography":
        bases = [b.strip() for b in args.bases.split(",") if b.strip()]
        bad = [b for b in bases if b not in TOMOGRAPHY_BASES]
        if bad or not bases:
            raise ConfigError(f"unknown tomography bases {bad}; choose from {TOMOGRAPHY_BASES}")
        if args.state:
            try:
                state = PureState.from_label(args.state)
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad --state {args.state!r}: {exc}") from exc
            report = cmd_tomography(state, bases, shots=args.shots or 0, seed=args.seed or 0)
        else:
            cfg = _load(args)
            report = cmd_tomography(cfg, bases, shots=cfg.shots, seed=cfg.seed)
            fmt, out = fmt or cfg.output, out or cfg.out_path
    elif args.command == "run":
        cfg = _load(args)
        report = cmd_run(cfg)
        fmt, out = fmt or cfg.output, out or cfg.out_path
        if args.clicks:
            if cfg.mode != "photonic":
                raise ConfigError("--clicks needs a photonic scenario")
            table = "clicks"
    elif args.command == "sweep":
        cfg = _load(args)
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --values: {exc}") from exc
        report = cmd_sweep(args.param, values, cfg)
        fmt, out = fmt or "csv", out or cfg.out_path
    else:  # pragma: no cover - argparse rejects unknown commands
        raise ConfigError(f"unknown command {args.command}")
    return report, fmt or "json", out, table


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, fmt, out, table = _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NullOutcomeError as exc:
        print(f"degenerate scenario: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    text = to_csv(report, table) if fmt == "csv" else to_json(report) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.command == "selftest" and not report["passed"]:
        return 1
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
