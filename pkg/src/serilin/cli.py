"""Command-line experiment runner.

``serilin list`` prints the preset catalogue; ``serilin run`` executes
presets or JSON config files and writes CSV artifacts plus a JSON manifest
per run.  Exit codes: 0 success, 2 configuration/schema error, 3 solver
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import ConfigError, SerilinError
from .presets import default_config, list_presets, run_config, validate_config


def _load_config(target, seed):
    if target.endswith(".json") or "/" in target or os.sep in target:
        path = Path(target)
        if not path.exists():
            raise ConfigError(f"config file {target!r} does not exist")
        try:
            config = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {target!r} is not valid JSON: {exc}")
    else:
        config = default_config(target)
    if seed is not None:
        config["seed"] = seed
    return validate_config(config)


def _error_json(code, message):
    return json.dumps({"error": {"code": code, "message": str(message)}})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="serilin",
        description="Series-linearization experiments for nonlinear "
                    "advection-diffusion equations.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run presets or JSON config files")
    run_p.add_argument("targets", nargs="+",
                       help="preset names or paths to config JSON files")
    run_p.add_argument("--out", default=None,
                       help="output directory (default: ./serilin-out or "
                            "$SERILIN_OUT)")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    run_p.add_argument("--jobs", type=int, default=1,
                       help="run independent targets across worker threads")

    sub.add_parser("list", help="list available presets")

    args = parser.parse_args(argv)

    if args.command == "list":
        for name, description in list_presets():
            print(f"{name:22s} {description}")
        return 0

    out_dir = args.out or os.environ.get("SERILIN_OUT") or "serilin-out"
    try:
        configs = [_load_config(t, args.seed) for t in args.targets]
    except ConfigError as exc:
        print(_error_json(2, exc), file=sys.stderr)
        return 2

    def execute(config):
        return run_config(config, Path(out_dir) / config["experiment"])

    try:
        if args.jobs > 1 and len(configs) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                manifests = list(pool.map(execute, configs))
        else:
            manifests = [execute(c) for c in configs]
    except ConfigError as exc:
        print(_error_json(2, exc), file=sys.stderr)
        return 2
    except SerilinError as exc:
        print(_error_json(3, exc), file=sys.stderr)
        return 3

    for manifest in manifests:
        print(manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
