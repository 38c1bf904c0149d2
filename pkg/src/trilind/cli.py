"""Command-line entry point.

    trilind <task> [--config FILE] [--preset NAME] [--out DIR] [--jobs N] [--set key=value ...]
    trilind validate [--config FILE] [--preset NAME]
    trilind presets

A preset is loaded first, the config file overrides it, ``--set`` overrides
both, and the subcommand fixes ``task``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import load_preset, parse_text, preset_names, validate_config
from .errors import ConfigError, TrilindError
from .experiments import EXIT_CONFIG, EXIT_FAILED, run

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
TASK_COMMANDS = ("dynamics", "steady", "sweep", "wigner", "spectrum", "g2tau")


def configure_logging() -> None:
    level_name = os.environ.get("TRILIND_LOG", "warn").strip().lower()
    level = LOG_LEVELS.get(level_name, logging.WARNING)
    root = logging.getLogger("trilind")
    root.handlers[:] = []
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("trilind %(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False
    if level_name not in LOG_LEVELS:
        root.warning("TRILIND_LOG=%r not recognised; using warn", level_name)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trilind", description="Spin-photon-phonon master-equation experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in TASK_COMMANDS + ("validate",):
        sp = sub.add_parser(name, help=f"run the {name} task" if name != "validate" else "check a config and print its effective form")
        sp.add_argument("--config", help="key-value or JSON config file")
        sp.add_argument("--preset", help="named preset (see 'trilind presets')")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
        if name != "validate":
            sp.add_argument("--out", help="output directory (default: output_dir from the config)")
            sp.add_argument("--jobs", type=int, default=None, help="worker processes (default: available cores)")
    sub.add_parser("presets", help="list shipped presets")
    return p


def load_config(config_path=None, preset=None, overrides=(), task=None):
    flat = {}
    if preset:
        flat.update(parse_text(load_preset(preset)))
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                flat.update(parse_text(fh.read()))
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {config_path}: {exc.strerror}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError("--set", f"expected KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        flat[key] = value
    if task is not None:
        current = flat.get("task")
        if current is not None and str(current).strip() != task:
            logging.getLogger(__name__).info("subcommand %s replaces task = %s", task, current)
        flat["task"] = task
    return validate_config(flat)


def main(argv=None) -> int:
    configure_logging()
    args = _parser().parse_args(argv)
    log = logging.getLogger("trilind.cli")
    if args.command == "presets":
        for name, fname in sorted(preset_names().items()):
            print(name if name == fname[:-4] else f"{name} -> {fname[:-4]}")
        return 0
    if not args.config and not args.preset:
        print("trilind: error: give --config or --preset", file=sys.stderr)
        return EXIT_CONFIG
    task = None if args.command == "validate" else args.command
    try:
        cfg = load_config(args.config, args.preset, args.set, task)
    except ConfigError as exc:
        print(f"trilind: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(json.dumps(cfg.echo(), indent=2, default=str))
        return 0
    if args.jobs is not None and args.jobs < 1:
        print("trilind: config error: --jobs: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run(cfg, args.out, args.jobs)
    except ConfigError as exc:
        print(f"trilind: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrilindError as exc:
        print(f"trilind: error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    log.info("wrote %s to %s (exit %d)", ", ".join(report.files), report.out_dir, report.exit_code)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
