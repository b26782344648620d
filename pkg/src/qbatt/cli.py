"""``qbatt`` command line entry point."""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

from qbatt import __version__
from qbatt.config import ConfigError, ExperimentConfig
from qbatt.experiments import COMMANDS, default_threads

ALL_COMMANDS = (*COMMANDS, "validate")


def resolve_out_dir(cli_out: str | None, cfg: ExperimentConfig) -> Path:
    """``--out`` beats the config's ``output_dir``, which beats ``$QBATT_OUT``; default ``./qbatt-out``."""
    for candidate in (cli_out, cfg.output_dir, os.environ.get("QBATT_OUT")):
        if candidate:
            return Path(candidate)
    return Path("qbatt-out")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


def write_manifest(out_dir: Path, command: str, cfg: ExperimentConfig, result: dict, wall: float, checks=None) -> Path:
    files = list(dict.fromkeys(result.pop("files", [])))
    manifest = {
        "command": command,
        "version": __version__,
        "python": platform.python_version(),
        "config": cfg.as_dict(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "wall_clock_seconds": wall,
        "checks": checks or [],
        "all_checks_passed": all(c["passed"] for c in checks or []),
        "summary": result,
        "csv_files": files,
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=False)
        fh.write("\n")
    return path


def run(command: str, cfg: ExperimentConfig, out_dir: Path, threads: int, generator_fn=None) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if command == "validate":
        from qbatt.collision import generator
        from qbatt.validation import format_table, run_checks

        results = run_checks(cfg, generator_fn or generator)
        print(format_table(results))
        checks = [r.as_dict() for r in results]
        write_manifest(out_dir, command, cfg, {"files": []}, time.perf_counter() - t0, checks)
        return 0 if all(r.passed for r in results) else 1
    result = COMMANDS[command](cfg, out_dir, threads)
    files = result.get("files", [])
    write_manifest(out_dir, command, cfg, result, time.perf_counter() - t0)
    for name in files:
        print(out_dir / name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qbatt", description="Collisional quantum battery experiments.")
    ap.add_argument("command", choices=ALL_COMMANDS)
    ap.add_argument("--config", required=True, help="key = value config file")
    ap.add_argument("--out", default=None, help="output directory (falls back to output_dir, then $QBATT_OUT)")
    ap.add_argument("--threads", type=int, default=None, help="worker processes for sweeps (default: all cores)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
    except (OSError, ConfigError) as exc:
        print(f"qbatt: {exc}", file=sys.stderr)
        return 2
    threads = args.threads if args.threads is not None else default_threads()
    if threads < 1:
        print("qbatt: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return run(args.command, cfg, resolve_out_dir(args.out, cfg), threads)
    except OSError as exc:
        print(f"qbatt: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
