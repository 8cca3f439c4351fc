"""Command-line entry point.

    sim <scenario> [--config file.json] [--out dir] [--set key.path=value ...]

The scenario is one of eigens, ldos, dynamics, shape, adiabaticity; the
configuration file is JSON (see :mod:`cavshape.config` for the schema and
defaults) and every field can be overridden from the command line, e.g.

    sim shape --config run.json --out results --set system.eta=20 \\
        --set target.width=30

Prints the headline metrics and writes CSV artifacts plus manifest.json
into the output directory.  Exit status 0 on success, 2 on configuration
errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._version import __version__
from .config import SCENARIOS, ConfigError, apply_overrides, build_config
from .design import InfeasibleTargetError
from .dynamics import IntegrationInstabilityError
from .pulse import AliasingError
from .scenarios import run_scenario

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Coupled three-cavity single-photon simulations",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "scenario",
        choices=SCENARIOS,
        help="study to run",
    )
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        metavar="FILE",
        help="JSON configuration file (defaults apply when omitted)",
    )
    parser.add_argument(
        "--out",
        type=Path,
        default=Path("sim_out"),
        metavar="DIR",
        help="output directory (default: ./sim_out)",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY.PATH=VALUE",
        help="override a config field (JSON value syntax; repeatable)",
    )
    return parser


def _load_raw_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    import json

    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return raw


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        raw = _load_raw_config(args.config)
        raw = apply_overrides(raw, args.overrides)
        config = build_config(raw, scenario=args.scenario)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = run_scenario(config, args.out)
    except (InfeasibleTargetError, IntegrationInstabilityError, AliasingError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1

    print(f"scenario: {manifest['scenario']}  (backend: {manifest['backend']})")
    for key in sorted(manifest["metrics"]):
        value = manifest["metrics"][key]
        if isinstance(value, float):
            print(f"  {key} = {value:.6g}")
        else:
            print(f"  {key} = {value}")
    for warning in manifest["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"artifacts in {args.out}: {', '.join(manifest['artifacts'])}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
