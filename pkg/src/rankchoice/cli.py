"""Command-line interface.

Subcommands: generate | fit-static | fit-dynamic | evaluate | sweep | probe |
oracle.  Every subcommand also accepts ``--config FILE`` (JSON) supplying
defaults for any flag not given explicitly (keys use the flag's underscore
name, e.g. ``{"m_list": [10, 20], "stop_mae": 0.001}``).

Exit codes: 0 success, 2 configuration/usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .distances import DISTANCE_KINDS
from .experiments import (
    ConfigError,
    evaluate,
    fit_dynamic,
    fit_static,
    generate_bundle,
    oracle_call,
    probe,
    run_sweep,
)


def _parse_kappa(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"kappa must be a positive integer or 'inf', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("kappa must be >= 1")
    return value


def _parse_stop(text: str):
    if text.strip().lower() in ("none", "off"):
        return None
    return float(text)


def _parse_list(conv):
    def parse(text: str):
        return [conv(part) for part in text.split(",") if part.strip()]

    return parse


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON file with flag defaults")
    common.add_argument("--seed", type=int, default=0, help="master random seed")

    parser = argparse.ArgumentParser(
        prog="rankchoice",
        description="Sparse rank-based choice models by distance minimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write seeded instance directories")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n", type=int, default=10, help="number of products (no-buy excluded)")
    p.add_argument("--k-mix", type=int, default=5)
    p.add_argument("--intensity", type=float, default=5.0)
    p.add_argument("--m-train", type=int, default=20)
    p.add_argument("--m-test", type=int, default=100)
    p.add_argument("--instances", type=int, default=10)

    def add_fit_args(p, dynamic: bool):
        p.add_argument("--instance-dir", type=Path, required=True)
        p.add_argument("--algo", choices=("fw", "dual"), default="dual")
        p.add_argument("--distance", choices=DISTANCE_KINDS, default="l2")
        p.add_argument("--T", type=int, default=10_000, dest="T", help="iteration budget")
        p.add_argument("--stop-mae", type=_parse_stop, default=0.001)
        p.add_argument("--train-m", type=int, default=None)
        if dynamic:
            p.add_argument("--kappa", type=_parse_kappa, default=50)
            p.add_argument("--initial-obs", type=int, default=2000)
            p.add_argument("--log-observations", action="store_true")

    p = sub.add_parser("fit-static", parents=[common], help="fit the exact train vector")
    add_fit_args(p, dynamic=False)

    p = sub.add_parser("fit-dynamic", parents=[common], help="fit a growing observation stream")
    add_fit_args(p, dynamic=True)

    p = sub.add_parser("evaluate", parents=[common], help="test MAE of a fitted model")
    p.add_argument("--instance-dir", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)

    p = sub.add_parser("sweep", parents=[common], help="generate/fit/evaluate over a grid")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--mode", choices=("static", "dynamic"), default="static")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k-mix", type=int, default=5)
    p.add_argument("--intensity", type=float, default=5.0)
    p.add_argument("--m-list", type=_parse_list(int), default=[10, 20, 50])
    p.add_argument("--m-test", type=int, default=100)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--distances", type=_parse_list(str), default=["l1", "l2", "linf"])
    p.add_argument("--algo", choices=("fw", "dual"), default="dual")
    p.add_argument("--kappa-list", type=_parse_list(_parse_kappa), default=[50, 500, math.inf])
    p.add_argument("--T", type=int, default=10_000, dest="T")
    p.add_argument("--stop-mae", type=_parse_stop, default=0.001)
    p.add_argument("--initial-obs", type=int, default=2000)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("probe", parents=[common], help="curvature probe at the train vector")
    p.add_argument("--instance-dir", type=Path, required=True)
    p.add_argument("--distance", choices=DISTANCE_KINDS, required=True)
    p.add_argument("--alphas", type=_parse_list(float), default=[1e-1, 1e-2, 1e-3, 1e-4])
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("oracle", parents=[common], help="solve one linear subproblem from files")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--cost", type=Path, required=True)
    p.add_argument("--method", choices=("bnb", "enum"), default="bnb")
    p.add_argument("--export-ip", type=Path, default=None)

    return parser


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    if args.config is None:
        return
    try:
        overrides = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(overrides, dict):
        raise ConfigError("config file must hold a JSON object")
    given = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    for key, value in overrides.items():
        flag = "--" + key.replace("_", "-")
        if not hasattr(args, key):
            raise ConfigError(f"config key {key!r} matches no flag of this subcommand")
        if flag not in given:
            setattr(args, key, value)


def _cmd_generate(args) -> None:
    dirs = generate_bundle(
        args.out,
        n=args.n,
        k_mix=args.k_mix,
        intensity=args.intensity,
        m_train=args.m_train,
        m_test=args.m_test,
        n_instances=args.instances,
        seed=args.seed,
    )
    for d in dirs:
        print(d)


def _print_row(row: dict) -> None:
    print(" ".join(f"{k}={v}" for k, v in row.items()))


def _cmd_fit_static(args) -> None:
    _print_row(
        fit_static(
            args.instance_dir,
            algo=args.algo,
            distance=args.distance,
            iterations=args.T,
            stop_mae=args.stop_mae,
            train_m=args.train_m,
        )
    )


def _cmd_fit_dynamic(args) -> None:
    _print_row(
        fit_dynamic(
            args.instance_dir,
            algo=args.algo,
            distance=args.distance,
            kappa=args.kappa,
            iterations=args.T,
            stop_mae=args.stop_mae,
            seed=args.seed,
            initial_observations=args.initial_obs,
            train_m=args.train_m,
            log_observations=args.log_observations,
        )
    )


def _cmd_evaluate(args) -> None:
    _print_row(evaluate(args.instance_dir, args.model))


def _cmd_sweep(args) -> None:
    out = run_sweep(
        args.out,
        mode=args.mode,
        n=args.n,
        k_mix=args.k_mix,
        intensity=args.intensity,
        m_list=args.m_list,
        m_test=args.m_test,
        n_instances=args.instances,
        distances=args.distances,
        algo=args.algo,
        kappa_list=args.kappa_list,
        iterations=args.T,
        stop_mae=args.stop_mae,
        initial_observations=args.initial_obs,
        seed=args.seed,
        jobs=args.jobs,
    )
    for row in out["aggregate"]:
        _print_row(row)
    print(f"wrote {args.out}/cells.csv and {args.out}/sweep.csv")


def _cmd_probe(args) -> None:
    for row in probe(
        args.instance_dir, args.distance, alphas=args.alphas, seed=args.seed, out_file=args.out
    ):
        _print_row(row)


def _cmd_oracle(args) -> None:
    out = oracle_call(args.instance, args.cost, method=args.method, export_path=args.export_ip)
    print("ranking:", " ".join(str(i) for i in out["ranking"]))
    print("value:", repr(out["value"]))
    print("nodes:", out["nodes"])


_COMMANDS = {
    "generate": _cmd_generate,
    "fit-static": _cmd_fit_static,
    "fit-dynamic": _cmd_fit_dynamic,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "probe": _cmd_probe,
    "oracle": _cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, argv)
        _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- surface runtime failures as exit 3
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
