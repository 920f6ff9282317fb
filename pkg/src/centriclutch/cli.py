"""
Command-line front end.

    centriclutch simulate  -> trace_<A|B>.csv
    centriclutch sweep     -> surface_<A|B>.csv
    centriclutch dataset   -> dataset.csv
    centriclutch train     -> model.json, metrics.json, decision_grid.csv
    centriclutch predict   -> prints probability and label
    centriclutch report    -> fig4.csv, fig5.csv, fig6.csv, fig7.csv, fig_prediction.csv

Every written file gets a ``<name>.manifest.json`` next to it. Exit codes:
0 success, 1 usage/config/missing-input error, 2 runtime failure.
"""

import argparse
import csv
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import mlp, sweep
from .config import load_config
from .errors import ConfigError, DomainError, IntegrationError, TrainingError
from .sim import run_scenario

REPORT_INPUTS = {
    "fig4.csv": "trace_A.csv",
    "fig5.csv": "trace_B.csv",
    "fig6.csv": "surface_A.csv",
    "fig7.csv": "surface_B.csv",
    "fig_prediction.csv": "decision_grid.csv",
}
RPM = 60.0 / (2.0 * math.pi)


class UsageError(Exception):
    pass


def _timestamp():
    # SOURCE_DATE_EPOCH pins the manifest time for reproducible outputs
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def write_manifest(output, args, cfg, extra=None):
    manifest = {
        "config_path": str(args.config) if args.config else cfg.path,
        "command": args.command,
        "output": output.name,
        "output_dir": str(args.out),
        "seed": cfg.seed,
        "configuration": cfg.drive.configuration.value,
        "overrides": list(args.set or ()),
        "timestamp": _timestamp(),
    }
    if extra:
        manifest.update(extra)
    path = output.with_name(output.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _config(args):
    cfg = load_config(args.config, args.set or (), args.seed)
    if args.configuration:
        cfg = cfg.with_configuration(args.configuration)
    return cfg


def _out(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    cfg = _config(args)
    trace = run_scenario(cfg.scenario, cfg.clutch, cfg.drive, cfg.sim)
    path = _out(args) / f"trace_{cfg.drive.configuration.value}.csv"
    trace.to_csv(path, cfg.decimation)
    write_manifest(path, args, cfg, {"modes": [m.value for m in trace.mode_sequence()]})
    print(path)


def cmd_sweep(args):
    cfg = _config(args)
    samples = sweep.sweep_engagement_speed(cfg.grid, cfg.clutch, cfg.drive, cfg.engagement_scenario,
                                           cfg.sim, cfg.workers)
    path = _out(args) / f"surface_{cfg.grid.configuration.value}.csv"
    sweep.write_samples_csv(samples, path)
    write_manifest(path, args, cfg)
    print(path)


def cmd_dataset(args):
    cfg = _config(args)
    data = sweep.generate_dataset(cfg.grid, cfg.clutch, cfg.drive, cfg.engagement_scenario, cfg.sim,
                                  cfg.seed, cfg.jitter_points, cfg.workers)
    path = _out(args) / "dataset.csv"
    data.to_csv(path)
    write_manifest(path, args, cfg)
    print(path)


def _require(path, what):
    if not Path(path).is_file():
        raise UsageError(f"missing {what}: {path}")
    return Path(path)


def cmd_train(args):
    cfg = _config(args)
    out = _out(args)
    data_path = _require(args.dataset or out / "dataset.csv", "dataset")
    data = sweep.EngagementDataset.from_csv(data_path)
    model, metrics = mlp.train(data, cfg.mlp, cfg.train)
    model_path = out / "model.json"
    mlp.save_model(model, model_path)
    metrics_path = out / "metrics.json"
    metrics_path.write_text(json.dumps(metrics, indent=1, sort_keys=True) + "\n")
    grid_path = out / "decision_grid.csv"
    mlp.write_decision_grid_csv(mlp.decision_grid(model, cfg.grid), grid_path)
    # relative to OUT when possible, so manifests do not depend on where OUT lives
    dataset = data_path.name if data_path.resolve().parent == out.resolve() else str(data_path)
    for p in (model_path, metrics_path, grid_path):
        write_manifest(p, args, cfg, {"dataset": dataset})
    print(f"validation accuracy={metrics['accuracy']!r} precision={metrics['precision']!r} "
          f"recall={metrics['recall']!r}")


def cmd_predict(args):
    model_path = _require(args.model or Path(args.out) / "model.json", "model file")
    if args.mass is None or args.preload is None:
        raise UsageError("predict needs --mass and --preload")
    model = mlp.load_model(model_path)
    p = mlp.forward(model, [args.mass, args.preload])
    print(f"probability={p!r} engaged={int(p >= 0.5)}")


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _rpm(value):
    return repr(float(value) * RPM) if value != "" else ""


def cmd_report(args):
    out = Path(args.out)
    needed = list(REPORT_INPUTS.values()) + ["dataset.csv"]
    missing = [name for name in needed if not (out / name).is_file()]
    if missing:
        raise UsageError("missing inputs: " + ", ".join(missing))

    for fig, src in (("fig4.csv", "trace_A.csv"), ("fig5.csv", "trace_B.csv")):
        rows = _read_rows(out / src)
        _write_rows(out / fig,
                    ("t", "omega_input", "omega_driven", "omega_input_rpm", "omega_driven_rpm",
                     "T_centrifugal", "alpha_input", "alpha_driven", "mode"),
                    [(r["t"], r["omega_input"], r["omega_driven"], _rpm(r["omega_input"]),
                      _rpm(r["omega_driven"]), r["T_centrifugal"], r["alpha_input"], r["alpha_driven"],
                      r["mode"]) for r in rows])
    for fig, src in (("fig6.csv", "surface_A.csv"), ("fig7.csv", "surface_B.csv")):
        rows = _read_rows(out / src)
        _write_rows(out / fig,
                    ("shoe_mass", "preload", "full_engagement_speed", "full_engagement_rpm", "engaged"),
                    [(r["shoe_mass"], r["preload"], r["full_engagement_speed"],
                      _rpm(r["full_engagement_speed"]), r["engaged"]) for r in rows])

    simulated = {(float(r["shoe_mass"]), float(r["preload"])): r["engaged"]
                 for r in _read_rows(out / "dataset.csv")}
    rows = _read_rows(out / "decision_grid.csv")
    _write_rows(out / "fig_prediction.csv",
                ("shoe_mass", "preload", "probability", "predicted", "simulated"),
                [(r["shoe_mass"], r["preload"], r["probability"], r["engaged"],
                  simulated.get((float(r["shoe_mass"]), float(r["preload"])), "")) for r in rows])
    for fig in REPORT_INPUTS:
        print(out / fig)


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "predict": cmd_predict,
    "report": cmd_report,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML config (default: bundled reference set)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--configuration", choices=("A", "B"), help="clutch pairing")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config key (repeatable)")

    parser = argparse.ArgumentParser(prog="centriclutch", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run the shift scenario and write a trace")
    sub.add_parser("sweep", parents=[common], help="full-engagement speed over the mass/preload grid")
    sub.add_parser("dataset", parents=[common], help="simulator-labeled engagement dataset")
    p = sub.add_parser("train", parents=[common], help="train the engagement classifier")
    p.add_argument("--dataset", type=Path, help="dataset CSV (default: OUT/dataset.csv)")
    p = sub.add_parser("predict", parents=[common], help="predict engagement for one design")
    p.add_argument("--model", type=Path, help="model file (default: OUT/model.json)")
    p.add_argument("--mass", type=float, help="shoe mass, kg")
    p.add_argument("--preload", type=float, help="spring preload, N")
    sub.add_parser("report", parents=[common], help="collect figure CSVs from OUT")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationError, TrainingError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
