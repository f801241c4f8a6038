"""Command line front end.

    cqsd run --config dialogue.yaml [--seed N] [--out transcript.jsonl]
    cqsd attack-stats --config attack.yaml [--trials N] [--seed N] [--out report.json]
    cqsd codec-table

Exit codes: 0 session closed (or command succeeded), 2 session aborted,
1 bad configuration or arguments.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Sequence

from .codec import ALL_BIT_PAIRS, encode, format_pairs, induced_bell_class
from .config import ConfigError, RunConfig, load_config
from .experiments import attack_stats
from .protocol import SessionState, run_dialogue

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORTED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cqsd", description="Continuous quantum secure dialogue simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one scripted dialogue")
    run.add_argument("--config", required=True, metavar="PATH")
    run.add_argument("--seed", type=_seed, help="override the config seed")
    run.add_argument("--out", metavar="PATH", help="transcript path (overrides config output)")

    stats = sub.add_parser("attack-stats", help="Monte Carlo abort statistics under an attack")
    stats.add_argument("--config", required=True, metavar="PATH")
    stats.add_argument("--seed", type=_seed, help="master seed (overrides config)")
    stats.add_argument("--trials", type=_positive, default=10_000)
    stats.add_argument("--workers", type=_positive, default=1)
    stats.add_argument("--out", metavar="PATH", help="write the report as JSON")

    sub.add_parser("codec-table", help="print the message/operator/Bell-class table")
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def cmd_run(args: argparse.Namespace) -> int:
    config = _load(args)
    channel = config.with_scope_default("all")
    script = [(step.sender, step.payload) for step in config.script]
    result = run_dialogue(
        config.params,
        script,
        channel.build(),
        attack_transmissions_only=channel.scope == "transmissions",
    )
    session = result.session
    out = args.out or config.output
    if out is not None:
        session.transcript.write(out)

    for delivery in result.deliveries:
        receiver = delivery.sender.other.value
        print(f"{delivery.sender.value} -> {receiver}: {format_pairs(delivery.payload)}")
    if session.state is SessionState.ABORTED:
        assert session.abort is not None
        print(f"aborted during {session.abort.stage}: {session.abort.reason}")
        return EXIT_ABORTED
    print(f"closed after {session.transmissions} transmissions")
    return EXIT_OK


def cmd_attack_stats(args: argparse.Namespace) -> int:
    config = _load(args)
    channel = config.with_scope_default("transmissions")
    report = attack_stats(
        config.m,
        config.n,
        channel,
        args.trials,
        config.seed,
        error_threshold=config.error_threshold,
        workers=args.workers,
    )
    print(report.format())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_codec_table() -> int:
    print(f"{'message':<8} {'operator':<9} {'gate':<5} bell_class")
    for bits in ALL_BIT_PAIRS:
        op = encode(bits)
        print(f"{str(bits):<8} {op.name:<9} {op.gate:<5} {induced_bell_class(op).label}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "attack-stats":
            return cmd_attack_stats(args)
        return cmd_codec_table()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
