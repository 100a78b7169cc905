"""Command-line entry point.

Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import logging
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import __version__
from .data import (
    DEFAULT_FEATURES,
    Dataset,
    has_labels,
    label_of,
    load_csv,
    preprocess,
    read_samples,
    split,
    write_samples,
)
from .exceptions import ConfigurationError, DataError, NumericalError, UsageError
from .model import ModelConfig, predict_batch
from .noise import DEFAULT_GRID, NOISE_KINDS
from .optimizers import OPTIMIZER_KINDS
from .training import (
    TrainConfig,
    classify,
    evaluate,
    run_noise_sweep,
    run_optimizer_comparison,
    substream,
    train,
)

logger = logging.getLogger("qloan")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4
THREADS_ENV = "LEPQNN_THREADS"


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _csv_list(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def _float_list(value):
    try:
        return [float(v) for v in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {value!r}") from None


def _on_off(value):
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value


def _fmt(value):
    if value is None:
        return "undefined"
    return repr(float(value))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# -- data directory helpers ------------------------------------------------

def _load_split(data_dir, name, required=True):
    path = os.path.join(data_dir, f"{name}.csv")
    if not os.path.exists(path):
        if required:
            raise DataError(f"{path}: file not found (run 'preprocess' first)")
        return None
    return Dataset.from_samples(read_samples(path))


def _data_inputs(data_dir):
    return [os.path.join(data_dir, f) for f in ("train.csv", "test.csv", "stats.json")
            if os.path.exists(os.path.join(data_dir, f))]


def _model_config(args, n_features):
    return ModelConfig(
        n_qubits=n_features,
        depth=args.depth,
        readout_qubit=args.readout_qubit,
        dropout_base=args.dropout_base,
        dropout_decrement=args.dropout_decrement,
        dropout_granularity=args.dropout_granularity,
    )


def _theta_payload(theta, config: TrainConfig):
    return {
        "shape": list(theta.shape),
        "index": ["layer", "qubit", "slot"],
        "slots": ["RY", "RX"],
        "seed": config.seed,
        "model": config.model.to_dict(),
        "values": theta.tolist(),
    }


def _load_theta(path):
    payload = _load_json(path)
    try:
        theta = np.array(payload["values"], dtype=float)
        model = ModelConfig(**payload["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed parameter file ({exc})") from exc
    if theta.shape != model.param_shape:
        raise DataError(f"{path}: values shape {theta.shape} != declared {model.param_shape}")
    return theta, model


# -- subcommands -----------------------------------------------------------

def cmd_preprocess(args):
    features = args.features
    if len(features) != args.n_qubits:
        raise UsageError(f"--features lists {len(features)} columns but the model has {args.n_qubits} qubits")
    records = load_csv(args.train)
    test_records = load_csv(args.test) if args.test else None
    predict_records = None
    if test_records is not None and has_labels(test_records):
        train_records = records
    else:
        # Unlabeled (or absent) test file: hold out a stratified part of the training file.
        labels = [label_of(r) for r in records]
        train_records, test_records = split(records, args.test_fraction, substream(args.seed, "split"), labels=labels)
        predict_records = load_csv(args.test) if args.test else None
    train_samples, stats = preprocess(train_records, None, features)
    test_samples, _ = preprocess(test_records, stats, features)
    os.makedirs(args.out, exist_ok=True)
    write_samples(os.path.join(args.out, "train.csv"), train_samples)
    write_samples(os.path.join(args.out, "test.csv"), test_samples)
    if predict_records is not None:
        samples, _ = preprocess(predict_records, stats, features, require_labels=False)
        write_samples(os.path.join(args.out, "predict.csv"), samples)
    stats.save(os.path.join(args.out, "stats.json"))
    logger.info("preprocessed %d train / %d test samples", len(train_samples), len(test_samples))
    return [p for p in (args.train, args.test) if p]


def _train_config(args, n_features, optimizer=None):
    return TrainConfig(
        model=_model_config(args, n_features),
        optimizer=optimizer or args.optimizer,
        lr=getattr(args, "lr", None),
        iterations=args.iterations,
        seed=args.seed,
        dropout=args.dropout == "on",
    )


def cmd_train(args):
    train_set = _load_split(args.data, "train")
    test_set = _load_split(args.data, "test", required=False)
    config = _train_config(args, train_set.X.shape[1])
    result = train(train_set, config)
    os.makedirs(args.out, exist_ok=True)
    _dump_json(os.path.join(args.out, "theta.json"), _theta_payload(result.theta, config))
    _write_rows(os.path.join(args.out, "loss_history.csv"), ["iteration", "loss"],
                [[t + 1, repr(loss)] for t, loss in enumerate(result.loss_history)])
    metrics = {
        "seed": config.seed,
        "optimizer": result.optimizer,
        "final_train_loss": result.loss_history[-1],
        "train": evaluate(train_set, result.theta, config.model).to_dict(),
    }
    if test_set is not None and test_set.labeled and len(test_set):
        metrics["test"] = evaluate(test_set, result.theta, config.model).to_dict()
    _dump_json(os.path.join(args.out, "metrics.json"), metrics)
    return _data_inputs(args.data)


def cmd_evaluate(args):
    theta, model = _load_theta(args.theta)
    test_set = _load_split(args.data, "test")
    os.makedirs(args.out, exist_ok=True)
    _dump_json(os.path.join(args.out, "metrics.json"), {"test": evaluate(test_set, theta, model).to_dict()})
    return _data_inputs(args.data) + [args.theta]


def cmd_predict(args):
    theta, model = _load_theta(args.theta)
    path = os.path.join(args.data, "predict.csv")
    samples = read_samples(path)
    dataset = Dataset.from_samples(samples, model.n_qubits)
    probs = predict_batch(dataset.X, theta, model, evaluation=True) if len(dataset) else []
    os.makedirs(args.out, exist_ok=True)
    _write_rows(os.path.join(args.out, "predictions.csv"), ["loan_id", "probability", "prediction"],
                [[s.loan_id, repr(float(p)), "Y" if c else "N"] for s, p, c in zip(samples, probs, classify(probs))])
    return [path, args.theta]


def cmd_compare(args):
    train_set = _load_split(args.data, "train")
    test_set = _load_split(args.data, "test")
    config = _train_config(args, train_set.X.shape[1], optimizer="adam")
    report = run_optimizer_comparison(train_set, test_set, config)
    os.makedirs(args.out, exist_ok=True)
    columns = ["optimizer", "precision", "recall", "f1", "accuracy", "mse", "final_train_loss"]
    _write_rows(os.path.join(args.out, "metrics.csv"), columns,
                [[row["optimizer"]] + [_fmt(row[c]) for c in columns[1:]] for row in report.table()])
    for kind, result in report.results.items():
        _write_rows(os.path.join(args.out, f"loss_{kind}.csv"), ["iteration", "loss"],
                    [[t + 1, repr(loss)] for t, loss in enumerate(result.loss_history)])
        _dump_json(os.path.join(args.out, f"theta_{kind}.json"), _theta_payload(result.theta, result.config))
    _dump_json(os.path.join(args.out, "summary.json"), {
        "seed": config.seed,
        "best": report.best,
        "metrics": {k: m.to_dict() for k, m in report.metrics.items()},
        "learning_rates": {k: r.optimizer["lr"] for k, r in report.results.items()},
    })
    return _data_inputs(args.data)


def cmd_noise_sweep(args):
    theta, model = _load_theta(args.theta)
    test_set = _load_split(args.data, "test")
    for p in args.grid:
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"noise strength {p} outside [0, 1]")
    unknown = [k for k in args.kinds if k not in NOISE_KINDS]
    if unknown:
        raise UsageError(f"unknown noise kind(s) {unknown}; expected {list(NOISE_KINDS)}")
    report = run_noise_sweep(test_set, theta, model, args.kinds, args.grid)
    os.makedirs(args.out, exist_ok=True)
    _write_rows(os.path.join(args.out, "accuracy.csv"), ["kind"] + [repr(p) for p in report.grid],
                [[k] + [repr(float(a)) for a in row] for k, row in zip(report.kinds, report.accuracy)])
    _dump_json(os.path.join(args.out, "sweep.json"), {
        "kinds": report.kinds,
        "grid": report.grid,
        "noiseless_accuracy": report.noiseless_accuracy,
        "p0_max_deviation": report.p0_max_deviation,
        "class1_fraction": report.class1_fraction,
    })
    return _data_inputs(args.data) + [args.theta]


# -- parser ----------------------------------------------------------------

def _add_model_args(p):
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--readout-qubit", type=int, default=0)
    p.add_argument("--dropout-base", type=float, default=0.2)
    p.add_argument("--dropout-decrement", type=float, default=0.02)
    p.add_argument("--dropout-granularity", choices=("gate", "layer"), default="gate")


def _add_train_args(p, optimizer=True):
    p.add_argument("--data", required=True, help="directory written by 'preprocess'")
    if optimizer:
        p.add_argument("--optimizer", choices=OPTIMIZER_KINDS, default="adam")
        p.add_argument("--lr", type=float, default=None, help="learning rate (default: per optimizer)")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dropout", type=_on_off, default="on")
    _add_model_args(p)


def build_parser():
    parser = argparse.ArgumentParser(prog="qloan", description="Quantum circuit classifier for loan eligibility.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean, encode and normalize loan CSV files")
    p.add_argument("--train", required=True)
    p.add_argument("--test", default=None)
    p.add_argument("--features", type=_csv_list, default=list(DEFAULT_FEATURES))
    p.add_argument("--n-qubits", type=int, default=6)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train one optimizer and evaluate on the test split")
    _add_train_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate saved parameters on the test split")
    p.add_argument("--data", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="score the unlabeled prediction file")
    p.add_argument("--data", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="train all four optimizers from a shared initialization")
    _add_train_args(p, optimizer=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("noise-sweep", help="accuracy under each noise channel and strength")
    p.add_argument("--data", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--kinds", type=_csv_list, default=list(NOISE_KINDS))
    p.add_argument("--grid", type=_float_list, default=list(DEFAULT_GRID))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("rerun", help="re-execute a job from its manifest.json")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="alternative output directory")
    p.set_defaults(func=None)
    return parser


def _resolved_argv(args):
    # Rebuild an argv with every option materialized, so the manifest alone re-runs the job.
    argv = [args.command]
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func", "verbose") or value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, list):
            value = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, str) and key in ("train", "test", "data", "theta", "out"):
            value = os.path.abspath(value)
        argv += [flag, str(value)]
    return argv


def _thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return nullcontext()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def _run(args):
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    argv = _resolved_argv(args)
    with _thread_limit():
        inputs = args.func(args)
    manifest = {
        "subcommand": args.command,
        "argv": argv,
        "config": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")},
        "seed": getattr(args, "seed", None),
        "inputs": {os.path.abspath(p): _sha256(p) for p in inputs},
        "version": __version__,
        "started": started,
        "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    _dump_json(os.path.join(args.out, "manifest.json"), manifest)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "rerun":
            manifest = _load_json(args.manifest)
            replay = list(manifest["argv"])
            if args.out is not None:
                replay[replay.index("--out") + 1] = os.path.abspath(args.out)
            args = parser.parse_args(replay)
        _run(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
