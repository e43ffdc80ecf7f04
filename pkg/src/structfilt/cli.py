"""Command-line entry points: run, ensemble, sweep, export-tree.

Configuration comes from an optional JSON file (``--config``) mirroring
the trial-config fields, with individual flags overriding file values.
Exit codes: 0 on success, 1 for configuration errors, 2 for runtime
failures (outputs written so far are preserved).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from structfilt.harness import (
    SWEEP_PARAMETERS,
    TrialConfig,
    _append_losses,
    _write_trial_files,
    run_ensemble,
    run_sweep,
    run_trial,
)
from structfilt.tree import snapshot_to_dot

_FIELD_PARSERS = {
    "model": str,
    "n_experiments": int,
    "seed": int,
    "n_particles": int,
    "n_min_particles": int,
    "d_max": int,
    "resample_threshold": float,
    "liu_west_a": float,
    "decision_floor": float,
    "mixture_floor": float,
    "champion_threshold": float,
    "region_champions": int,
    "pgh_constant": float,
    "pgh_exponent": int,
    "t_max": float,
    "n_levels": int,
    "n_meas": int,
    "hedging": float,
    "n_truth_eigenvalues": int,
    "region_alpha": float,
    "snapshot_every": int,
}
_BOOL_FIELDS = {"baseline", "prune_enabled", "hedge_to_half", "champion_flatten"}
_LIST_FIELDS = {"n_cluster_set": int, "truth": float}


class _Parser(argparse.ArgumentParser):
    # Usage and config mistakes exit 1; code 2 is reserved for runtime failures.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON trial config")
    for name, parse in _FIELD_PARSERS.items():
        parser.add_argument(f"--{name.replace('_', '-')}", type=parse, default=None)
    for name in _BOOL_FIELDS:
        parser.add_argument(
            f"--{name.replace('_', '-')}",
            action=argparse.BooleanOptionalAction,
            default=None,
        )
    for name in _LIST_FIELDS:
        parser.add_argument(
            f"--{name.replace('_', '-')}",
            type=str,
            default=None,
            help="comma-separated values",
        )


def _config_from_args(args: argparse.Namespace) -> TrialConfig:
    data: dict = {}
    if args.config is not None:
        data.update(json.loads(Path(args.config).read_text()))
    for name in list(_FIELD_PARSERS) + sorted(_BOOL_FIELDS):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    for name, item_parse in _LIST_FIELDS.items():
        value = getattr(args, name)
        if value is not None:
            data[name] = tuple(item_parse(v) for v in value.split(","))
    return TrialConfig.from_dict(data)


def _build_parser() -> _Parser:
    parser = _Parser(prog="structfilt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single trial")
    _add_config_flags(p_run)
    p_run.add_argument("--out-dir", type=Path, default=None)

    p_ens = sub.add_parser("ensemble", help="run many trials and aggregate")
    _add_config_flags(p_ens)
    p_ens.add_argument("--trials", type=int, required=True)
    p_ens.add_argument("--jobs", type=int, default=1)
    p_ens.add_argument("--out-dir", type=Path, required=True)

    p_sweep = sub.add_parser("sweep", help="ensembles over one parameter grid")
    _add_config_flags(p_sweep)
    p_sweep.add_argument(
        "--parameter", required=True, choices=sorted(SWEEP_PARAMETERS)
    )
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--trials", type=int, required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out-dir", type=Path, required=True)

    p_export = sub.add_parser("export-tree", help="convert a tree snapshot to DOT")
    p_export.add_argument("snapshot", type=Path, help="tree_*.json file")
    p_export.add_argument("-o", "--out", type=Path, default=None)

    return parser


def _cmd_run(args: argparse.Namespace, cfg: TrialConfig) -> int:
    record = run_trial(cfg)
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        losses = out / "losses.csv"
        if losses.exists():
            losses.unlink()
        _write_trial_files(out, 0, record)
        _append_losses(out, 0, record)
        (out / "record_0.json").write_text(record.to_json())
    status = "failed" if record.error else "ok"
    print(
        f"trial {status}: model={cfg.model} seed={cfg.seed} "
        f"final_loss={record.final_loss:.3e}"
        + (f" error={record.error}" if record.error else "")
    )
    return 0


def _cmd_ensemble(args: argparse.Namespace, cfg: TrialConfig) -> int:
    result = run_ensemble(cfg, args.trials, jobs=args.jobs, out_dir=args.out_dir)
    n_failed = int(result.failed_matrix.any(axis=1).sum())
    final = result.median_loss[-1] if result.median_loss.size else float("nan")
    print(
        f"ensemble done: {args.trials} trials, {n_failed} failed, "
        f"final median loss {final:.3e}, outputs in {args.out_dir}"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace, cfg: TrialConfig) -> int:
    values = [float(v) for v in args.values.split(",")]
    results = run_sweep(
        cfg, args.parameter, values, args.trials, jobs=args.jobs, out_dir=args.out_dir
    )
    for value, result in results.items():
        final = result.median_loss[-1] if result.median_loss.size else float("nan")
        print(f"{args.parameter}={value:g}: final median loss {final:.3e}")
    return 0


def _cmd_export_tree(args: argparse.Namespace) -> int:
    snapshot = json.loads(Path(args.snapshot).read_text())
    dot = snapshot_to_dot(snapshot)
    if args.out is None:
        print(dot)
    else:
        Path(args.out).write_text(dot)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "export-tree":
        try:
            return _cmd_export_tree(args)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
    try:
        cfg = _config_from_args(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            return _cmd_run(args, cfg)
        if args.command == "ensemble":
            return _cmd_ensemble(args, cfg)
        if args.command == "sweep":
            return _cmd_sweep(args, cfg)
    except Exception as exc:  # noqa: BLE001 - partial outputs are preserved
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
