"""Command line entry point: ``run``, ``count-partitions`` and ``selftest``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .config import ConfigError
from .grouping import partition_count
from .harness import emit_results, format_results, load_spec, run_experiment, summarize


def _error(kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybrid-precoding",
                                     description="Hybrid precoding simulator for mmWave MIMO-OFDM")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment")
    run.add_argument("--spec", help="JSON experiment spec (defaults to the full-scale 8x8 setup)")
    run.add_argument("--out", help="output file; stdout when omitted")
    run.add_argument("--format", choices=("csv", "json"), help="output format (default: from spec)")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="override a spec field, e.g. trials=5 or config.quant_bits=3")
    run.add_argument("--summary", help="also write per-(scheme, SNR, architecture) means as JSON")

    cnt = sub.add_parser("count-partitions", help="number of groupings of nt antennas into nrf subarrays")
    cnt.add_argument("--nt", type=int, required=True)
    cnt.add_argument("--nrf", type=int, required=True)

    st = sub.add_parser("selftest", help="run the numerical identity checks")
    st.add_argument("--instances", type=int, default=20)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "count-partitions":
            n = partition_count(args.nt, args.nrf)
            print(f"{n} ({float(n):.4e})")
            return 0
        if args.command == "selftest":
            from .selftest import run_selftest

            checks = run_selftest(args.instances)
            for c in checks:
                print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
            return 0 if all(c.passed for c in checks) else 1
        spec = load_spec(args.spec, args.override)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        fmt = args.format or spec.format
        rows = run_experiment(spec, threads=args.threads)
        out = args.out or spec.output
        if out:
            emit_results(rows, fmt, out)
        else:
            sys.stdout.write(format_results(rows, fmt))
        if args.summary:
            with open(args.summary, "w", encoding="utf-8") as fh:
                json.dump(summarize(rows), fh, indent=1)
        return 0
    except (ConfigError, ValueError) as exc:
        return _error(type(exc).__name__, str(exc))
    except OSError as exc:
        return _error("OSError", str(exc))


if __name__ == "__main__":
    sys.exit(main())
