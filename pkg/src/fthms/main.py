from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Sequence

from fthms.app import SimulationApp
from fthms.benchmarks.catalog import list_benchmarks, run_benchmark
from fthms.config import apply_environment, load_config
from fthms.errors import ConfigError, FthmsError
from fthms.harness.acceptance import run_acceptance
from fthms.runtime_logging import close_runtime_log, configure_runtime_log, resolve_log_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fthms", description="Frequency-time hybrid multiple-scattering solver")
    parser.add_argument("--out", type=Path, default=None, help="output directory (overrides config and FTHMS_OUTPUT_DIR)")
    parser.add_argument("--workers", type=int, default=None, help="patch worker threads (overrides FTHMS_WORKERS)")
    parser.add_argument("--seed-free", action="store_true", help="reserved; the solver is deterministic")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one JSON config")
    run.add_argument("config", type=Path)

    bench = commands.add_parser("bench", help="run a named benchmark")
    bench.add_argument("name")

    commands.add_parser("list-benches", help="print the benchmark catalog")

    check = commands.add_parser("check", help="run the acceptance criteria")
    check.add_argument("--only", type=int, nargs="+", default=None, metavar="N")
    check.add_argument("--quick", action="store_true", help="low-band runs for the benchmark criteria")
    return parser


def _env_workers() -> int:
    raw = os.getenv("FTHMS_WORKERS", "").strip()
    try:
        return int(raw) if raw else 1
    except ValueError:
        raise ConfigError("FTHMS_WORKERS", f"must be an integer, got '{raw}'") from None


def _output_dir(args: argparse.Namespace, default: Path) -> Path:
    if args.out is not None:
        return args.out
    raw = os.getenv("FTHMS_OUTPUT_DIR", "").strip()
    return Path(raw) if raw else default


def _cmd_run(args: argparse.Namespace) -> int:
    config = apply_environment(load_config(args.config))
    if args.out is not None:
        config = replace(config, output=replace(config.output, directory=str(args.out)))
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    log_path = configure_runtime_log(resolve_log_path(config.output_dir))
    print(f"[BOOT] command=run config={args.config} workers={config.workers} out={config.output_dir} log_file={log_path}")
    app = SimulationApp(config)
    app.run()
    app.finalize()
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    out_dir = _output_dir(args, Path("runs") / args.name)
    workers = args.workers if args.workers is not None else _env_workers()
    log_path = configure_runtime_log(resolve_log_path(out_dir))
    print(f"[BOOT] command=bench name={args.name} workers={workers} out={out_dir} log_file={log_path}")
    outcome = run_benchmark(args.name, out_dir, workers)
    print(f"[BENCH] {outcome.name}: {'PASS' if outcome.passed else 'FAIL'} ({len(outcome.checks)} checks)")
    return 0 if outcome.passed else 1


def _cmd_list() -> int:
    for spec in list_benchmarks():
        tag = " [smoke]" if spec.smoke else ""
        print(f"{spec.name:<24} {spec.description}{tag}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    out_dir = _output_dir(args, Path("runs") / "acceptance")
    workers = args.workers if args.workers is not None else _env_workers()
    log_path = configure_runtime_log(resolve_log_path(out_dir))
    print(f"[BOOT] command=check only={args.only or 'all'} quick={args.quick} workers={workers} out={out_dir} log_file={log_path}")
    results = run_acceptance(args.only, workers, out_dir, args.quick)
    failed = [r for r in results if not r.passed]
    print(f"[ACCEPT] {len(results) - len(failed)}/{len(results)} passed")
    return 1 if failed else 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed_free:
            raise ConfigError("--seed-free", "reserved flag; the solver has no random state")
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers", f"must be at least 1, got {args.workers}")
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "list-benches":
            return _cmd_list()
        return _cmd_check(args)
    except FthmsError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return 2
    finally:
        close_runtime_log()


if __name__ == "__main__":
    sys.exit(main())
