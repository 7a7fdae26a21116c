"""Command-line pipeline driver.

Commands: build-kernels, train, predict, evaluate, sweep, tune.  Settings
come from a JSON config file (--config), with individual flags overriding
config values.  Every command emits one JSON document to --out or stdout.

Exit codes: 0 success, 2 configuration error, 3 data/kernel error,
4 solver failure.  LMMK_THREADS caps repetition parallelism.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from .classify import knn_predict
from .data import (
    PerBlockBuilder,
    PerFeatureBuilder,
    PrecomputedBuilder,
    load_features_csv,
    make_builder,
    normalize_mode,
    save_matrix,
)
from .errors import (
    ConfigError,
    DataError,
    KernelError,
    NeighborhoodError,
    ParseError,
    SolverError,
)
from .model import Hyperparams, TrainedModel, train as train_model
from .pipeline import (
    RunConfig,
    canonical_json,
    run_sweep,
    run_train,
    tune as tune_grid,
)

__all__ = ["main"]

CONFIG_KEYS = {
    "data",
    "labels",
    "test_data",
    "kernel_mode",
    "blocks",
    "kernels",
    "test_kernels",
    "hyperparams",
    "split",
    "sweep",
    "tune",
    "k_classify",
    "out",
}
SPLIT_KEYS = {"train_fraction", "repetitions", "seed"}
SWEEP_KEYS = {"parameter", "grid"}
TUNE_KEYS = {"folds", "k_grid", "mu_grid", "lambda_grid"}


def _load_config(path) -> tuple[dict, Path | None]:
    if path is None:
        return {}, None
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{p} must hold a JSON object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, allowed in (("split", SPLIT_KEYS), ("sweep", SWEEP_KEYS), ("tune", TUNE_KEYS)):
        section = doc.get(key)
        if section is not None:
            if not isinstance(section, dict):
                raise ConfigError(f"config section {key!r} must be an object")
            bad = set(section) - allowed
            if bad:
                raise ConfigError(f"unknown keys in config section {key!r}: {sorted(bad)}")
    return doc, p.parent


def _apply_overrides(doc: dict, args) -> dict:
    doc = dict(doc)
    hp = dict(doc.get("hyperparams", {}))
    if args.k is not None:
        hp["k"] = args.k
    if args.mu is not None:
        hp["mu"] = args.mu
    if args.lam is not None:
        hp["lambda"] = args.lam
    if args.outer_iters is not None:
        hp["outer_iters"] = args.outer_iters
    if args.constraint_form is not None:
        hp["constraint_form"] = args.constraint_form
    doc["hyperparams"] = hp
    split = dict(doc.get("split", {}))
    if args.train_fraction is not None:
        split["train_fraction"] = args.train_fraction
    if args.reps is not None:
        split["repetitions"] = args.reps
    if args.seed is not None:
        split["seed"] = args.seed
    doc["split"] = split
    if args.kernel_mode is not None:
        doc["kernel_mode"] = args.kernel_mode
    if args.out is not None:
        doc["out"] = args.out
    # flag paths anchor to the working directory, config paths to the config
    if getattr(args, "data", None) is not None:
        doc["data"] = str(Path(args.data).absolute())
    if getattr(args, "labels", None) is not None:
        doc["labels"] = str(Path(args.labels).absolute())
    return doc


def _hyperparams(doc: dict) -> Hyperparams:
    return Hyperparams.from_dict(doc.get("hyperparams", {}))


def _run_config(doc: dict) -> RunConfig:
    split = doc.get("split", {})
    kc = doc.get("k_classify")
    return RunConfig(
        hyperparams=_hyperparams(doc),
        train_fraction=float(split.get("train_fraction", 0.7)),
        repetitions=split.get("repetitions", 10),
        seed=int(split.get("seed", 0)),
        k_classify=kc if kc is None else int(kc),
    )


def _emit(doc: dict, out) -> None:
    text = canonical_json(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _safe_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name) or "kernel"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_build_kernels(doc: dict, base_dir, args) -> int:
    builder, labels = make_builder(doc, base_dir)
    ks = builder.fit(np.arange(len(labels)))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, kernel in zip(ks.names, ks.kernels):
        fname = _safe_filename(name) + ".lmk"
        save_matrix(out_dir / fname, kernel.values)
        files[name] = fname
    manifest = {
        "format": "lmmk-kernels",
        "version": 1,
        "kernel_mode": builder.mode,
        "n_samples": int(len(labels)),
        "names": list(ks.names),
        "bandwidths": {
            n: (float(b) if b is not None else None)
            for n, b in zip(builder.names, builder.bandwidths)
        },
        "files": files,
    }
    (out_dir / "kernels.json").write_text(canonical_json(manifest))
    _emit(manifest, doc.get("out"))
    return 0


def _cmd_train(doc: dict, base_dir, args) -> int:
    from .pipeline import _bundle

    builder, labels = make_builder(doc, base_dir)
    labels = np.asarray(labels)
    ks = builder.fit(np.arange(labels.shape[0]))
    model = train_model(ks, labels, _hyperparams(doc))
    _emit(_bundle(model, builder), doc.get("out"))
    return 0


def _load_bundle(path) -> tuple[TrainedModel, dict]:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise DataError(f"cannot read model {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != "lmmk-model-bundle":
        raise ParseError(f"{p} is not a model bundle")
    model = TrainedModel.from_dict(doc.get("model", {}))
    context = doc.get("context", {})
    if not isinstance(context, dict):
        raise ParseError(f"{p}: bundle context must be an object")
    return model, context


def _cmd_predict(doc: dict, base_dir, args) -> int:
    model, context = _load_bundle(args.model)
    mode = normalize_mode(context.get("kernel_mode", doc.get("kernel_mode", "per-feature")))
    n_train = int(context.get("n_train", len(model.labels)))
    kc = args.k_classify if args.k_classify is not None else doc.get("k_classify")

    if mode == "precomputed":
        builder = PrecomputedBuilder(doc.get("kernels", []), base_dir=base_dir)
        if builder.n_samples != n_train:
            raise DataError(
                f"config kernels cover {builder.n_samples} samples, model was "
                f"trained on {n_train}"
            )
        ks = builder.fit(np.arange(n_train))
        entries = doc.get("test_kernels")
        if not entries:
            raise ConfigError("precomputed prediction needs 'test_kernels' in the config")
        cross = builder.cross_from_files(entries, base_dir=base_dir)
        truth = None
    else:
        train_path = args.train_data or doc.get("data")
        if train_path is None:
            raise ConfigError("prediction needs --train-data (or 'data' in the config)")
        test_path = args.test_data or doc.get("test_data")
        if test_path is None:
            raise ConfigError("prediction needs --test-data (or 'test_data' in the config)")
        if base_dir is not None:
            tp = Path(train_path)
            train_path = tp if tp.is_absolute() or args.train_data else base_dir / tp
            sp = Path(test_path)
            test_path = sp if sp.is_absolute() or args.test_data else base_dir / sp
        X_train, train_labels, f_train = load_features_csv(train_path)
        X_test, test_labels, f_test = load_features_csv(test_path)
        if f_train != f_test:
            raise DataError(
                "training and test files must share the same feature columns "
                f"({f_train} vs {f_test})"
            )
        if X_train.shape[0] != n_train:
            raise DataError(
                f"{train_path} has {X_train.shape[0]} rows, model was trained on {n_train}"
            )
        stacked = np.vstack([X_train, X_test])
        if mode == "per-feature":
            builder = PerFeatureBuilder(stacked, f_train)
        else:
            blocks = context.get("blocks") or doc.get("blocks") or {}
            builder = PerBlockBuilder(stacked, f_train, blocks)
        ks = builder.fit(np.arange(n_train))
        if tuple(builder.names) != tuple(model.kernel_names):
            raise DataError(
                "rebuilt kernels do not match the model "
                f"({list(builder.names)} vs {list(model.kernel_names)}); "
                "is this the original training data?"
            )
        stored = context.get("bandwidths", {})
        for n, b in zip(builder.names, builder.bandwidths):
            if n in stored and stored[n] is not None and float(stored[n]) != float(b):
                raise DataError(
                    f"bandwidth for kernel {n!r} differs from the model "
                    f"({b!r} vs {stored[n]!r}); is this the original training data?"
                )
        cross = builder.cross(np.arange(n_train, stacked.shape[0]))
        truth = test_labels

    if args.test_labels:
        from .data import load_labels_csv

        truth = load_labels_csv(args.test_labels)

    report = knn_predict(
        model,
        cross,
        ks,
        k_classify=None if kc is None else int(kc),
        truth=truth,
        with_distances=args.with_distances,
    )
    out_doc = {"schema": "lmmk-predict", "version": 1, **report.to_dict()}
    _emit(out_doc, doc.get("out"))
    return 0


def _cmd_evaluate(doc: dict, base_dir, args) -> int:
    builder, labels = make_builder(doc, base_dir)
    result = run_train(builder, np.asarray(labels), _run_config(doc))
    _emit(result, doc.get("out"))
    return 0


def _cmd_sweep(doc: dict, base_dir, args) -> int:
    sweep = dict(doc.get("sweep", {}))
    if args.parameter is not None:
        sweep["parameter"] = args.parameter
    if args.grid is not None:
        sweep["grid"] = args.grid
    if "parameter" not in sweep or not sweep.get("grid"):
        raise ConfigError("sweep needs a parameter and a non-empty grid")
    builder, labels = make_builder(doc, base_dir)
    result = run_sweep(
        builder, np.asarray(labels), _run_config(doc), sweep["parameter"], list(sweep["grid"])
    )
    if args.csv:
        _write_sweep_csv(args.csv, result)
    _emit(result, doc.get("out"))
    return 0


def _write_sweep_csv(path, result: dict) -> None:
    import csv as _csv

    cols = [
        "value",
        "mean_accuracy",
        "std_accuracy",
        "mean_baseline_accuracy",
        "mean_beta_l0",
        "mean_sum_beta",
        "error",
    ]
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(cols)
        for p in result["points"]:
            w.writerow([p.get(c, "") for c in cols])


def _cmd_tune(doc: dict, base_dir, args) -> int:
    builder, labels = make_builder(doc, base_dir)
    section = doc.get("tune") or {}
    split = doc.get("split", {})
    base = _hyperparams(doc)
    kwargs = {}
    if args.folds is not None:
        kwargs["folds"] = args.folds
    elif "folds" in section:
        kwargs["folds"] = int(section["folds"])
    for key, name in (("k_grid", "k_grid"), ("mu_grid", "mu_grid"), ("lambda_grid", "lambda_grid")):
        if section.get(key):
            kwargs[name] = list(section[key])
    kc = doc.get("k_classify")
    result = tune_grid(
        builder,
        np.asarray(labels),
        base,
        seed=int(split.get("seed", 0)),
        k_classify=kc if kc is None else int(kc),
        **kwargs,
    )
    _emit(result, doc.get("out"))
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--k", type=int, help="neighbor count")
    p.add_argument("--mu", type=float, help="pull/push trade-off in [0,1]")
    p.add_argument("--lambda", dest="lam", type=float, help="l1 sparsity weight")
    p.add_argument("--outer-iters", type=int, help="neighbor-refresh rounds")
    p.add_argument(
        "--constraint-form",
        choices=["derived", "literal"],
        help="margin row form (derived: distance difference; literal: keeps the constant term)",
    )
    p.add_argument("--train-fraction", type=float, help="training fraction of each split")
    p.add_argument("--reps", type=int, help="number of seeded repetitions")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument(
        "--kernel-mode",
        help="per-feature, per-representation, or precomputed",
    )
    p.add_argument("--out", help="write the JSON report here instead of stdout")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmmk",
        description=(
            "Multiple kernel learning with large-margin neighborhood constraints: "
            "learns sparse non-negative kernel weights and classifies by kNN in "
            "the combined feature space."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-kernels", help="build and save normalized kernels")
    _add_common(p)
    p.add_argument("--data", help="features CSV (overrides config)")
    p.add_argument("--labels", help="labels CSV (overrides config)")
    p.add_argument("--out-dir", required=True, help="directory for .lmk kernels + manifest")
    p.set_defaults(func=_cmd_build_kernels)

    p = sub.add_parser("train", help="train on the full dataset, write a model bundle")
    _add_common(p)
    p.add_argument("--data", help="features CSV (overrides config)")
    p.add_argument("--labels", help="labels CSV (overrides config)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="label new points with a trained model")
    _add_common(p)
    p.add_argument("--model", required=True, help="model bundle from the train command")
    p.add_argument("--train-data", help="the original training CSV")
    p.add_argument("--test-data", help="CSV of points to label")
    p.add_argument("--test-labels", help="labels CSV for scoring (precomputed mode)")
    p.add_argument("--k-classify", type=int, help="neighbor count at prediction time")
    p.add_argument(
        "--with-distances",
        action="store_true",
        help="include per-test nearest indices and distances",
    )
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="repeated-split evaluation with baseline")
    _add_common(p)
    p.add_argument("--data", help="features CSV (overrides config)")
    p.add_argument("--labels", help="labels CSV (overrides config)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="evaluate across a hyperparameter grid")
    _add_common(p)
    p.add_argument("--data", help="features CSV (overrides config)")
    p.add_argument("--labels", help="labels CSV (overrides config)")
    p.add_argument("--parameter", choices=["k", "mu", "lambda", "outer_iters"])
    p.add_argument("--grid", type=_float_list, help="comma-separated values")
    p.add_argument("--csv", help="also write the grid as CSV here")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("tune", help="grid cross-validation on the training data")
    _add_common(p)
    p.add_argument("--data", help="features CSV (overrides config)")
    p.add_argument("--labels", help="labels CSV (overrides config)")
    p.add_argument("--folds", type=int, help="CV fold count (default 3)")
    p.set_defaults(func=_cmd_tune)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc, base_dir = _load_config(args.config)
        doc = _apply_overrides(doc, args)
        return args.func(doc, base_dir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, KernelError, NeighborhoodError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
