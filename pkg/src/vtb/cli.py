"""Command-line front end: run, sweep, serve, import, list, compare.

Exit codes: 0 success, 1 usage error (one-line reason plus usage), 2
runtime error. The ``VTB_SEED`` environment variable supplies a default
seed; an explicit --seed flag wins.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import presets
from .bench import (
    EpisodeLog,
    ExperimentConfig,
    Metrics,
    SweepConfig,
    aggregate_metrics,
    compare,
    compute_metrics,
    grid_sweep,
    run_experiment,
    write_compare_csv,
)
from .controllers import CemConfig, cem_train, save_policy
from .envcore import make_env
from .weather import import_epw, write_weather_csv
from .wire import serve, serve_stdio

CONTROLLER_CHOICES = ("static", "rbc", "random", "cem")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("VTB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"VTB_SEED is not an integer: {raw!r}") from None


def _controller_spec(name: str) -> dict:
    if name.startswith("policy:"):
        path = name.split(":", 1)[1]
        if not path:
            raise UsageError("policy controller needs a file: policy:<file>")
        return {"kind": "policy", "path": path}
    if name not in CONTROLLER_CHOICES:
        raise UsageError(
            f"unknown controller {name!r}; choose from "
            f"{', '.join(CONTROLLER_CHOICES)} or policy:<file>"
        )
    return {"kind": name}


def _resolve_env_arg(value: str):
    """Preset name, or a path to an EnvConfig JSON document."""
    if value in presets.list_presets():
        return value
    path = Path(value)
    if path.is_file():
        from .wire import _config_from_doc

        return _config_from_doc(json.loads(path.read_text()))
    raise UsageError(f"unknown preset or missing config file: {value}")


def build_parser() -> _Parser:
    parser = _Parser(prog="vtb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="<command>")

    sub.add_parser("list-envs", help="print the preset catalog")

    run = sub.add_parser("run", help="run a controller for N episodes")
    run.add_argument("--env", required=True, help="preset name or EnvConfig JSON file")
    run.add_argument("--controller", required=True,
                     help="static|rbc|random|cem|policy:<file>")
    run.add_argument("--episodes", type=int, default=1)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", required=True)
    run.add_argument("--overwrite", action="store_true")

    train = sub.add_parser("train-cem", help="train the cross-entropy controller")
    train.add_argument("--env", required=True)
    train.add_argument("--config", required=True, help="CemConfig JSON file")
    train.add_argument("--out", required=True)
    train.add_argument("--overwrite", action="store_true")

    sweep = sub.add_parser("sweep", help="run a parameter grid")
    sweep.add_argument("--config", required=True, help="sweep JSON file")
    sweep.add_argument("--parallel", type=int, default=1)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--overwrite", action="store_true")

    srv = sub.add_parser("serve", help="expose environments over the wire protocol")
    group = srv.add_mutually_exclusive_group(required=True)
    group.add_argument("--port", type=int)
    group.add_argument("--stdio", action="store_true")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--idle-timeout", type=float, default=300.0)
    srv.add_argument("--output-root", default=None)

    imp = sub.add_parser("import-weather", help="convert an EPW file to the CSV schema")
    imp.add_argument("--epw", required=True)
    imp.add_argument("--out", required=True)

    cmp_ = sub.add_parser("compare", help="savings of candidates vs a reference run")
    cmp_.add_argument("--ref", required=True, help="progress.csv of the reference")
    cmp_.add_argument("--cand", required=True, nargs="+",
                      help="progress.csv files of the candidates")
    cmp_.add_argument("--out", required=True)

    return parser


def _cmd_list_envs() -> int:
    names = presets.list_presets()
    print(f"{len(names)} presets:")
    for name in names:
        print(f"  {name}")
    return 0


def _cmd_run(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    config = ExperimentConfig(
        env=_resolve_env_arg(args.env),
        controller=_controller_spec(args.controller),
        episodes=args.episodes,
        seed=seed,
        out_dir=args.out,
        overwrite=args.overwrite,
    )
    result = run_experiment(config)
    agg = result.aggregate
    print(f"wrote {result.progress_path}")
    print(
        f"aggregate: mean_reward={agg.mean_reward:.6f} "
        f"mean_power_W={agg.mean_power_W:.1f} "
        f"comfort_time_violation_pct={agg.comfort_time_violation_pct:.3f} "
        f"mean_temp_violation_C={agg.mean_temp_violation_C:.5f}"
    )
    return 0


def _cmd_train_cem(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    env_overrides = doc.pop("env", None)
    seed = doc.pop("seed", _default_seed())
    cem = CemConfig(seed=seed, **doc)
    env_cfg = _resolve_env_arg(args.env)
    if isinstance(env_cfg, str):
        env_cfg = presets.preset_config(env_cfg)
    if env_overrides:
        from .bench import _apply_env_overrides

        env_cfg = _apply_env_overrides(env_cfg, env_overrides)
    out = Path(args.out)
    if out.exists() and not args.overwrite:
        raise FileExistsError(f"output dir exists: {out} (use --overwrite)")
    out.mkdir(parents=True, exist_ok=True)
    env = make_env(env_cfg, output_root=out)
    try:
        policy, curve = cem_train(env, cem)
    finally:
        env.close()
    save_policy(policy, out / "policy.json")
    curve.to_csv(out / "training_curve.csv")
    best = max(r for r in curve.max_reward)
    print(f"wrote {out / 'policy.json'} (best candidate mean reward {best:.6f})")
    return 0


def _cmd_sweep(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    base_doc = doc["base"]
    env = _resolve_env_arg(base_doc["env"]) if isinstance(base_doc["env"], str) else base_doc["env"]
    base = ExperimentConfig(
        env=env,
        controller=base_doc["controller"],
        episodes=base_doc.get("episodes", 1),
        seed=base_doc.get("seed", _default_seed()),
        out_dir=args.out,
        overwrite=True,
    )
    out = Path(args.out)
    if out.exists() and not args.overwrite:
        raise FileExistsError(f"output dir exists: {out} (use --overwrite)")
    sweep_cfg = SweepConfig(base=base, grids=doc["grids"], parallelism=args.parallel)
    rows, results_path, failures = grid_sweep(sweep_cfg, out_dir=out)
    print(f"wrote {results_path} ({len(rows)} rows, {len(failures)} failures)")
    if rows:
        top = rows[0]
        print(f"best combination {top['combination']}: mean_reward={top['mean_reward']:.6f}")
    return 0 if not failures else 2


def _cmd_serve(args) -> int:
    if args.stdio:
        serve_stdio(sys.stdin, sys.stdout, output_root=args.output_root)
        return 0
    server = serve(
        host=args.host,
        port=args.port,
        output_root=args.output_root,
        idle_timeout=args.idle_timeout,
        background=True,
    )
    print(f"listening on {args.host}:{server.port}", flush=True)
    try:
        while True:
            import time

            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
    return 0


def _cmd_import_weather(args) -> int:
    series = import_epw(args.epw)
    write_weather_csv(series, args.out)
    print(
        f"wrote {args.out} ({series.location_name}, "
        f"mean annual temperature {series.mean_annual_temp:.2f} C)"
    )
    return 0


def _metrics_from_progress(path: str) -> Metrics:
    """Aggregate metrics for a finished run.

    Prefers the sibling metrics.json (which carries the monthly arrays);
    falls back to re-reading the per-episode monitor.csv files.
    """
    progress = Path(path)
    sibling = progress.parent / "metrics.json"
    if sibling.is_file():
        doc = json.loads(sibling.read_text())["aggregate"]
        return Metrics(
            mean_reward=doc["mean_reward"],
            mean_power_W=doc["mean_power_W"],
            comfort_time_violation_pct=doc["comfort_time_violation_pct"],
            mean_temp_violation_C=doc["mean_temp_violation_C"],
            monthly_mean_power_W=tuple(doc["monthly_mean_power_W"]),
            monthly_comfort_violation_C=tuple(doc["monthly_comfort_violation_C"]),
        )
    monitors = sorted(progress.parent.glob("*/episode-*/monitor.csv"))
    if not monitors:
        raise FileNotFoundError(
            f"no metrics.json next to {progress} and no monitor.csv files found"
        )
    return aggregate_metrics([compute_metrics(EpisodeLog.from_monitor_csv(m)) for m in monitors])


def _cmd_compare(args) -> int:
    ref = _metrics_from_progress(args.ref)
    cands = [_metrics_from_progress(c) for c in args.cand]
    labels = [str(Path(c).parent.name) for c in args.cand]
    rows = compare(ref, cands, labels=labels)
    write_compare_csv(rows, args.out)
    print(f"wrote {args.out}")
    for row in rows:
        print(f"  {row['label']}: total power savings {row['total_power_savings_pct']:.2f} %")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("no command given")
        if args.command == "list-envs":
            return _cmd_list_envs()
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "train-cem":
            return _cmd_train_cem(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "import-weather":
            return _cmd_import_weather(args)
        if args.command == "compare":
            return _cmd_compare(args)
        raise UsageError(f"unknown command: {args.command}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as exc:  # noqa: BLE001 - reported with exit code 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
