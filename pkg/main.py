#!/usr/bin/env python3
"""
TopoHopf - point/cycle attractor classification of planar vector fields
Entry point for the command line
"""

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import List, Optional

import pandas as pd

from metadata import APP_NAME, APP_VERSION, DEFAULT_PROFILE
from utils.errors import ConfigError, TopoHopfError
from utils.logging_utils import TopoHopfLogger, get_module_logger

# Get module logger
log = get_module_logger()

BASELINE_METHODS = ("critical_points", "lyapunov", "parameters")
SWEEP_KINDS = ("bound", "datasize", "arch")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with global flags and one subparser per command."""
    parser = argparse.ArgumentParser(prog="topohopf", description=f"{APP_NAME} {APP_VERSION}")
    parser.add_argument("--profile", default=DEFAULT_PROFILE, help="Profile preset (desk or paper)")
    parser.add_argument("--config", type=Path, help="JSON file overriding profile keys")
    parser.add_argument("--seed", type=int, help="Base seed")
    parser.add_argument("--out", type=Path, default=Path("results"), help="Output directory")
    parser.add_argument("--threads", type=int, help="Worker threads for data generation and baselines")
    parser.add_argument("--log-level", default="INFO", help="Console log level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="Zoo test set of one system")
    p.add_argument("--system", required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--split", default="test")
    p.add_argument("--no-raw", action="store_true", help="Omit the raw vector section")

    p = sub.add_parser("augment", help="Augmented SO train/test sets")
    p.add_argument("--n-train", type=int)
    p.add_argument("--n-test", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--bound", type=float)
    p.add_argument("--bins", type=int)

    p = sub.add_parser("train", help="Train one model")
    p.add_argument("--data", type=Path, help="Training set (.twaf); Augmented SO is generated when omitted")
    p.add_argument("--no-attention", action="store_true")
    p.add_argument("--input-mode", choices=("angles", "vectors"))
    p.add_argument("--epochs", type=int)
    p.add_argument("--model", type=Path, help="Checkpoint destination")

    p = sub.add_parser("predict", help="Classify a dataset or a scattered-velocity CSV")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--mc-evals", type=int)
    p.add_argument("--neighbors", type=int, default=8)
    p.add_argument("--power", type=float, default=2.0)

    p = sub.add_parser("interp", help="Interpolate a scattered-velocity CSV into an unlabeled dataset")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--neighbors", type=int, default=8)
    p.add_argument("--power", type=float, default=2.0)

    p = sub.add_parser("baseline", help="Evaluate a classical baseline on a dataset")
    p.add_argument("--method", choices=BASELINE_METHODS, required=True)
    p.add_argument("--data", type=Path, required=True)

    p = sub.add_parser("boundary", help="Boundary map of one system")
    p.add_argument("--system", default="simple_oscillator")
    p.add_argument("--resolution", type=int)

    p = sub.add_parser("repressilator", help="Repressilator (alpha, beta) study")
    p.add_argument("--grid", type=int)
    p.add_argument("--horizon", type=float, help="Integration horizon in time units")

    sub.add_parser("ablate", help="Ablation table")

    p = sub.add_parser("accuracy", help="Accuracy table over systems and methods")
    p.add_argument("--sigma", type=float)

    sub.add_parser("noise", help="Noise sweep on Augmented SO")
    sub.add_parser("probe", help="Subcritical Hopf probe")

    p = sub.add_parser("sweep", help="Bound, data-size or architecture sweep")
    p.add_argument("--kind", choices=SWEEP_KINDS, required=True)

    p = sub.add_parser("report", help="Render tables and heatmaps from a result directory")
    p.add_argument("--results", type=Path, help="Result directory (defaults to --out)")
    return parser


def load_config(args):
    """Profile preset, user overrides, then command-line flags."""
    from utils.config import Config
    config = Config(args.profile, args.config)
    if args.seed is not None:
        config.set("seed", args.seed)
    if args.threads is not None:
        config.set("threads", args.threads)
    if getattr(args, "horizon", None) is not None:
        config.set("repressilator/horizon", args.horizon)
    return config


def experiment_config(config, out: Path):
    from harness.config import ExperimentConfig
    return ExperimentConfig.from_config(config, str(out))


def emit(table: pd.DataFrame, out: Path, name: str, config_hash: str) -> None:
    from reports.tables import emit_csv
    path = emit_csv(table, out / f"{name}.csv", config_hash)
    print(path)


# Commands

def cmd_generate(args, config) -> int:
    from dynamics.rasterize import make_zoo_dataset
    from utils.dataset_io import write_dataset
    count = args.count or int(config.get("experiment/test_size"))
    dataset = make_zoo_dataset(args.system, count, int(config.get("seed")), args.sigma,
                               int(config.get("grid/size")), not args.no_raw, args.split)
    print(write_dataset(dataset, args.out / f"{args.system}-{args.split}"))
    return 0


def cmd_augment(args, config) -> int:
    from dynamics.warp import make_augmented_dataset
    from harness.config import ExperimentConfig
    from utils.dataset_io import write_dataset
    if args.bound is not None:
        config.set("augment/bound", args.bound)
    if args.bins is not None:
        config.set("augment/bins", args.bins)
    exp = ExperimentConfig.from_config(config)
    sigma = args.sigma if args.sigma is not None else exp.train_sigma
    train_set, test_set = make_augmented_dataset(args.n_train or exp.n_train, args.n_test or exp.test_size,
                                                 exp.seed, sigma, exp.augment, exp.grid_size,
                                                 bool(config.get("data/keep_raw", True)), exp.threads)
    print(write_dataset(train_set, args.out / "augmented_so-train"))
    print(write_dataset(test_set, args.out / "augmented_so-test"))
    return 0


def cmd_train(args, config) -> int:
    from dataclasses import replace
    from classifier import build_model, save, train
    from harness.experiments import ExperimentRunner
    from utils.dataset_io import read_dataset
    if args.no_attention:
        config.set("model/attention", False)
    if args.input_mode:
        config.set("model/input_mode", args.input_mode)
    if args.epochs:
        config.set("train/epochs", args.epochs)
    exp = experiment_config(config, args.out)
    data = read_dataset(args.data) if args.data else ExperimentRunner(exp).training_set(True)
    model = build_model(exp.arch, exp.seed)
    report = train(model, data, replace(exp.train, seed=exp.seed))
    path = save(model, args.model or args.out / "model")
    summary = {"checkpoint": str(path), "train_accuracy": report.train_accuracy,
               "val_accuracy": report.val_accuracy, "final_loss": report.epoch_losses[-1],
               "config_hash": exp.config_hash()}
    print(json.dumps(summary, indent=2))
    return 0


def _input_fields(args, model):
    """Fields (or stored inputs) to classify, plus their labels when known."""
    from dynamics.odeint import scattered_to_field
    from utils.dataset_io import read_dataset, read_scattered_csv
    if args.input.suffix.lower() == ".csv":
        scattered = read_scattered_csv(args.input)
        field = scattered_to_field(scattered, model.arch.input_size, args.neighbors, args.power)
        return None, [field], None
    dataset = read_dataset(args.input)
    return dataset, None, dataset.labels()


def cmd_predict(args, config) -> int:
    from classifier import load, predict
    from classifier.inference import predict_dataset
    from models.arch import ClassProbs
    model = load(args.model)
    mc_evals = args.mc_evals or int(config.get("inference/mc_evals"))
    seed = int(config.get("seed"))
    dataset, fields, labels = _input_fields(args, model)
    if dataset is not None:
        probs = [ClassProbs.from_logits(row) for row in predict_dataset(model, dataset, mc_evals, seed)]
    else:
        probs = [predict(model, f, mc_evals, seed) for f in fields]
    table = pd.DataFrame([{"index": i, "point_logit": p.point_logit, "cycle_logit": p.cycle_logit,
                           "point_prob": p.point_prob, "cycle_prob": p.cycle_prob,
                           "prediction": p.label.short} for i, p in enumerate(probs)])
    if labels is not None:
        table["true_label"] = ["" if l < 0 else ("cycle" if l == 1 else "point") for l in labels]
    table.to_csv(sys.stdout, index=False, lineterminator="\n")
    return 0


def cmd_interp(args, config) -> int:
    from dynamics.odeint import scattered_to_field
    from dynamics.rasterize import make_sample
    from models.dataset import Dataset
    from utils.dataset_io import read_scattered_csv, write_dataset
    size = args.size or int(config.get("grid/size"))
    field = scattered_to_field(read_scattered_csv(args.input), size, args.neighbors, args.power)
    sample = make_sample(field, None, [], 0.0, True)
    manifest = {"kind": "scattered", "source": args.input.name, "count": 1, "grid": [size, size],
                "extent": [list(field.grid.extent[0]), list(field.grid.extent[1])],
                "interpolation": {k: field.provenance[k] for k in ("interpolation", "k", "power", "samples")},
                "augmentation": None}
    print(write_dataset(Dataset([sample], manifest), args.out / args.input.stem))
    return 0


def cmd_baseline(args, config) -> int:
    from harness.experiments import ExperimentRunner
    from utils.dataset_io import read_dataset
    exp = experiment_config(config, args.out)
    dataset = read_dataset(args.data)
    if not dataset.has_raw:
        raise ConfigError(f"{args.data}: baselines need the raw vector section")
    runner = ExperimentRunner(exp)
    accuracies = runner.method_accuracies(args.method, dataset)
    table = pd.DataFrame([runner.row("baseline", accuracies, system=dataset.manifest.get("system", ""),
                                     method=args.method, sigma=dataset.manifest.get("noise_sigma", 0.0),
                                     source=args.data.name)])
    emit(table, args.out, f"baseline-{args.method}-{args.data.stem}", exp.config_hash())
    return 0


def cmd_boundary(args, config) -> int:
    from harness.experiments import run_boundary_map
    from reports.tables import emit_boundary_map
    exp = experiment_config(config, args.out)
    boundary = run_boundary_map(exp, args.system, args.resolution)
    for path in emit_boundary_map(boundary, args.out, f"boundary-{boundary.system}", exp.config_hash(), exp.seed):
        print(path)
    print(f"accuracy={boundary.accuracy():.4f}")
    return 0


def cmd_repressilator(args, config) -> int:
    from harness.experiments import run_repressilator_study
    from reports.tables import emit_boundary_map
    exp = experiment_config(config, args.out)
    study = run_repressilator_study(exp, args.grid)
    for path in emit_boundary_map(study, args.out, "repressilator", exp.config_hash(), exp.seed):
        print(path)
    print(f"accuracy={study.accuracy():.4f}")
    return 0


def cmd_ablate(args, config) -> int:
    from harness.experiments import run_ablations
    exp = experiment_config(config, args.out)
    emit(run_ablations(exp), args.out, "ablations", exp.config_hash())
    return 0


def cmd_accuracy(args, config) -> int:
    from harness.experiments import run_accuracy_table
    exp = experiment_config(config, args.out)
    sigma = exp.noise_sigma if args.sigma is None else args.sigma
    emit(run_accuracy_table(exp, sigma), args.out, f"accuracy-sigma{sigma:g}", exp.config_hash())
    return 0


def cmd_noise(args, config) -> int:
    from harness.experiments import run_noise_sweep
    exp = experiment_config(config, args.out)
    emit(run_noise_sweep(exp), args.out, "noise", exp.config_hash())
    return 0


def cmd_probe(args, config) -> int:
    from harness.experiments import run_subhopf_probe
    exp = experiment_config(config, args.out)
    emit(run_subhopf_probe(exp), args.out, "subhopf_probe", exp.config_hash())
    return 0


def cmd_sweep(args, config) -> int:
    from harness import experiments
    exp = experiment_config(config, args.out)
    runners = {"bound": experiments.run_bound_sweep, "datasize": experiments.run_datasize_sweep,
               "arch": experiments.run_arch_variants}
    emit(runners[args.kind](exp), args.out, f"sweep-{args.kind}", exp.config_hash())
    return 0


def cmd_report(args, config) -> int:
    from reports.tables import build_report
    for path in build_report(args.results or args.out):
        print(path)
    return 0


COMMANDS = {
    "generate": cmd_generate, "augment": cmd_augment, "train": cmd_train, "predict": cmd_predict,
    "interp": cmd_interp, "baseline": cmd_baseline, "boundary": cmd_boundary,
    "repressilator": cmd_repressilator, "ablate": cmd_ablate, "accuracy": cmd_accuracy,
    "noise": cmd_noise, "probe": cmd_probe, "sweep": cmd_sweep, "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    TopoHopfLogger.initialize(app_name=APP_NAME, console_level=args.log_level, file_level="DEBUG",
                              log_dir=args.out / "logs", log_to_file=args.command != "predict",
                              command=args.command)
    log.debug(f"Python version: {sys.version}")
    log.info(f"Running '{args.command}' (profile {args.profile})")

    try:
        args.out.mkdir(parents=True, exist_ok=True)
        config = load_config(args)
        config.export_to_json(args.out / "config.json")
        TopoHopfLogger.set_run(experiment_config(config, args.out).config_hash())
        return COMMANDS[args.command](args, config)
    except TopoHopfError as e:
        log.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        log.critical(f"Unhandled exception: {e}")
        log.critical(traceback.format_exc())
        return 1


if __name__ == "__main__":
    sys.exit(main())
