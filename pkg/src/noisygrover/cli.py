"""Command-line entry point.

Configuration is resolved in four layers, later layers winning: built-in
defaults (the full-scale grid), then --preset, then --config key=value file,
then explicit flags. Progress goes to stderr; stdout carries only data and
reports so it can be piped.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from .errors import ConfigError, NoisyGroverError
from .experiment import (
    DESK_D_SIGMA_LIST,
    DESK_N_LIST,
    DESK_P_CUT_LIST,
    DESK_RUNS,
    PAPER_D_SIGMA_LIST,
    PAPER_N_LIST,
    PAPER_P_CUT_LIST,
    PAPER_RUNS,
    DEFAULT_MASTER_SEED,
    ExperimentConfig,
    cmd_exact,
    cmd_fit,
    cmd_sigma_max,
    cmd_sweep,
    cmd_table1,
    cmd_trajectory,
)
from .noise import DEFAULT_CONVENTION, NoiseConvention

log = logging.getLogger(__name__)

_PRESETS = {
    "desk": {
        "n_list": DESK_N_LIST,
        "p_cut_list": DESK_P_CUT_LIST,
        "d_sigma_list": DESK_D_SIGMA_LIST,
        "runs": DESK_RUNS,
    },
    "paper": {
        "n_list": PAPER_N_LIST,
        "p_cut_list": PAPER_P_CUT_LIST,
        "d_sigma_list": PAPER_D_SIGMA_LIST,
        "runs": PAPER_RUNS,
    },
}

_CONFIG_KEYS = (
    "n_list",
    "p_cut_list",
    "d_sigma_list",
    "runs",
    "master_seed",
    "convention",
    "threads",
    "output_dir",
)


def _parse_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from exc


def _parse_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {value!r}") from exc


def _parse_list(value: str, key: str, cast) -> tuple:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"{key} must be a non-empty comma-separated list")
    return tuple(cast(v, key) for v in items)


def _resolve_threads(value, key: str = "threads") -> int:
    if isinstance(value, int):
        return value
    text = str(value).strip()
    if text == "auto":
        return os.cpu_count() or 1
    return _parse_int(text, key)


def parse_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    try:
        text = open(path).read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    settings: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} (known: {', '.join(_CONFIG_KEYS)})")
        if key == "n_list":
            settings[key] = _parse_list(value, key, _parse_int)
        elif key in ("p_cut_list", "d_sigma_list"):
            settings[key] = _parse_list(value, key, _parse_float)
        elif key in ("runs", "master_seed"):
            settings[key] = _parse_int(value, key)
        elif key == "threads":
            settings[key] = _resolve_threads(value)
        elif key == "convention":
            settings[key] = _parse_convention(value)
        else:
            settings[key] = value
    return settings


def _parse_convention(value: str) -> NoiseConvention:
    try:
        return NoiseConvention(value)
    except ValueError as exc:
        raise ConfigError(f"convention must be 'paper' or 'stddev', got {value!r}") from exc


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    settings = {
        "n_list": PAPER_N_LIST,
        "p_cut_list": PAPER_P_CUT_LIST,
        "d_sigma_list": PAPER_D_SIGMA_LIST,
        "runs": PAPER_RUNS,
        "master_seed": DEFAULT_MASTER_SEED,
        "convention": DEFAULT_CONVENTION,
        "threads": 1,
        "output_dir": "out",
        "figures": True,
    }
    if getattr(args, "preset", None):
        settings.update(_PRESETS[args.preset])
    if getattr(args, "config", None):
        settings.update(parse_config_file(args.config))
    if getattr(args, "seed", None) is not None:
        settings["master_seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        settings["threads"] = _resolve_threads(args.threads)
    if getattr(args, "out", None):
        settings["output_dir"] = args.out
    if getattr(args, "noise_convention", None):
        settings["convention"] = _parse_convention(args.noise_convention)
    if getattr(args, "no_figures", False):
        settings["figures"] = False
    if getattr(args, "runs", None) is not None:
        if args.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {args.runs}")
        settings["runs"] = args.runs
    return ExperimentConfig(**settings)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed (64-bit)")
    common.add_argument("--threads", metavar="INT|auto", help="worker processes (default 1)")
    common.add_argument("--out", metavar="DIR", help="output directory (default ./out)")
    common.add_argument("--preset", choices=sorted(_PRESETS), help="desk: small grid; paper: full grid")
    common.add_argument(
        "--noise-convention",
        choices=["paper", "stddev"],
        dest="noise_convention",
        help="width parameter convention: 'stddev' (sigma is the SD, default) or 'paper' (sigma is the variance)",
    )
    common.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    parser = argparse.ArgumentParser(
        prog="noisygrover",
        description="Grover search with per-step Gaussian noise: exact curves, "
        "breaking-noise ladders, scaling fits and break-even tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", parents=[common], help="noiseless closed-form trajectory")
    p.add_argument("--n", type=int, default=10, help="qubit count (N = 2^n)")
    p.add_argument("--steps", type=int, default=None, help="steps to tabulate (default m_max)")

    p = sub.add_parser("trajectory", parents=[common], help="one noisy trajectory over 2*m_max steps")
    p.add_argument("--n", type=int, default=10, help="qubit count (N = 2^n)")
    p.add_argument("--sigma", type=float, required=True, help="noise width parameter")

    p = sub.add_parser("sigma-max", parents=[common], help="one (n, p_cut, d_sigma) ladder cell")
    p.add_argument("--n", type=int, default=None, help="qubit count (default: first of n_list)")
    p.add_argument("--p-cut", type=float, default=None, dest="p_cut", help="success threshold")
    p.add_argument("--d-sigma", type=float, default=None, dest="d_sigma", help="ladder step size")
    p.add_argument("--runs", type=int, default=None, help="runs to average")

    p = sub.add_parser("sweep", parents=[common], help="full grid + extrapolations + fits + report")
    p.add_argument("--runs", type=int, default=None, help="runs per cell override")

    p = sub.add_parser("table1", parents=[common], help="break-even table at the minimum useful p_cut")
    p.add_argument("--runs", type=int, default=None, help="runs per cell override")

    p = sub.add_parser("fit", parents=[common], help="re-fit a persisted x,y[,y_err] csv")
    p.add_argument("csv", help="input csv with columns x,y[,y_err]")
    p.add_argument("--model", required=True, choices=["power", "linear", "shifted-power"])

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "fit":
        cmd_fit(args.csv, args.model)
        return 0
    config = resolve_config(args)
    if args.command == "exact":
        cmd_exact(config, args.n, args.steps)
    elif args.command == "trajectory":
        cmd_trajectory(config, args.n, args.sigma, seed=config.master_seed)
    elif args.command == "sigma-max":
        n = args.n if args.n is not None else config.n_list[0]
        p_cut = args.p_cut if args.p_cut is not None else config.p_cut_list[0]
        d_sigma = args.d_sigma if args.d_sigma is not None else config.d_sigma_list[0]
        cmd_sigma_max(config, n, p_cut, d_sigma)
    elif args.command == "sweep":
        cmd_sweep(config)
    elif args.command == "table1":
        cmd_table1(config)
    else:
        raise ConfigError(f"unknown command {args.command!r}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoisyGroverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
