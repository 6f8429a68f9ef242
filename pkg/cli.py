#!/usr/bin/env python3
"""
AirForge command line
Simulate controllers, train PPO agents and explain trained policies
"""

import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from agents.coordinator import CONTROLLERS, EXPLAIN_KINDS, CoordinatorAgent
from explain.attribution import TimeScenario
from settings import __version__, get_settings, setup_logging

EXIT_OK = 0
EXIT_CONFIGURATION = 2
EXIT_RUNTIME = 3


def print_response(response: Dict[str, Any]) -> None:
    """Pretty print the coordinator response"""
    if "error" in response:
        print(f"\n❌ Error ({response.get('error_kind', 'runtime')}): {response['error']}\n")
        return
    print(f"\n✅ {response['command']} finished for {response['scenario']}")
    print(f"📁 {response['out_dir']}")
    for artifact in response.get("artifacts", []):
        print(f"   - {artifact}")
    summary = response.get("summary")
    if summary:
        print(json.dumps(summary, indent=2, default=str))
    print()


def exit_code(response: Dict[str, Any]) -> int:
    if "error" not in response:
        return EXIT_OK
    return EXIT_CONFIGURATION if response.get("error_kind") == "configuration" else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airforge", description="Compressed-air plant control with explainable PPO")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default from AIRFORGE_LOG_LEVEL)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default=None, help="preset name: 1C1F, 3C1F, 3C3F, 3C5F")
    common.add_argument("--config", default=None, help="YAML scenario file (overrides --scenario)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="run directory")

    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="run a controller against the plant")
    simulate.add_argument("--controller", choices=CONTROLLERS, default="baseline")
    simulate.add_argument("--policy", default=None, help="policy file for --controller policy")
    simulate.add_argument("--demand", default=None, help="CSV path or synthetic:PATTERN")
    simulate.add_argument("--steps", type=int, default=None)
    simulate.add_argument("--start", type=int, default=None)

    train = sub.add_parser("train", parents=[common], help="train a PPO agent")
    train.add_argument("--iterations", type=int, default=None)
    train.add_argument("--workers", type=int, default=None)

    explain = sub.add_parser("explain", parents=[common], help="explain a trained policy")
    explain.add_argument("--kind", choices=EXPLAIN_KINDS, required=True)
    explain.add_argument("--policy", required=True)
    explain.add_argument("--time-scenario", choices=[t.value for t in TimeScenario], default=None)
    explain.add_argument("--length", type=int, default=None)
    return parser


def to_request(args: argparse.Namespace) -> Dict[str, Any]:
    request = {k: v for k, v in vars(args).items() if k != "log_level"}
    # presets take the worker count from the environment; config files set their own
    if args.command == "train" and request.get("workers") is None and not args.config:
        request["workers"] = get_settings().workers
    return request


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    print("=" * 60)
    print(f"AirForge {__version__}: {args.command}")
    print("=" * 60)
    print("\n🤖 Processing...")
    response = CoordinatorAgent().process_request(to_request(args))
    print_response(response)
    return exit_code(response)


if __name__ == "__main__":
    sys.exit(main())
