"""End-to-end runs: repeated splits, sweeps, and grid cross-validation.

Every run expands one master seed into per-repetition seeds, so reports are
deterministic for a fixed seed regardless of how many worker threads execute
the repetitions (results are assembled in repetition order).  Wall-clock
numbers live in a separate "timings" section that canonical_bytes() skips,
keeping the comparable part of a report byte-stable.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classify import knn_predict, knn_vote, accuracy, uniform_weights
from .errors import (
    ConfigError,
    DataError,
    EmptyTripleSet,
    LmmkError,
    NeighborhoodError,
)
from .kernels import rkhs_cross_distance_matrix
from .model import Hyperparams, TrainedModel, train
from .splits import expand_seeds, stratified_folds, stratified_split

__all__ = [
    "RunConfig",
    "run_single_repetition",
    "run_train",
    "run_sweep",
    "tune",
    "canonical_json",
    "canonical_bytes",
    "worker_count",
]

EVAL_SCHEMA = "lmmk-eval"
EVAL_VERSION = 1

SWEEPABLE = ("k", "mu", "lambda", "outer_iters")

VOLATILE_KEYS = ("timings",)


def worker_count() -> int:
    """Parallelism cap from LMMK_THREADS (default 1, minimum 1)."""
    raw = os.environ.get("LMMK_THREADS", "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LMMK_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def canonical_json(doc) -> str:
    """Stable serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def canonical_bytes(doc: dict) -> bytes:
    """Report bytes with the volatile sections (wall-clock timings) removed."""
    trimmed = {k: v for k, v in doc.items() if k not in VOLATILE_KEYS}
    for key in ("report", "evaluation"):
        if isinstance(trimmed.get(key), dict):
            trimmed[key] = {
                k: v for k, v in trimmed[key].items() if k not in VOLATILE_KEYS
            }
    return canonical_json(trimmed).encode()


@dataclass(frozen=True)
class RunConfig:
    """Parsed split/evaluation settings shared by the pipeline entry points."""

    hyperparams: Hyperparams
    train_fraction: float = 0.7
    repetitions: int = 10
    seed: int = 0
    k_classify: int | None = None

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigError(
                f"train fraction must lie in (0, 1), got {self.train_fraction!r}"
            )
        if not isinstance(self.repetitions, int) or isinstance(self.repetitions, bool) or self.repetitions < 1:
            raise ConfigError(f"repetitions must be an integer >= 1, got {self.repetitions!r}")
        if self.k_classify is not None and (
            not isinstance(self.k_classify, int)
            or isinstance(self.k_classify, bool)
            or self.k_classify < 1
        ):
            raise ConfigError(f"k_classify must be an integer >= 1, got {self.k_classify!r}")

    def to_dict(self) -> dict:
        doc = {
            "hyperparams": self.hyperparams.to_dict(),
            "train_fraction": self.train_fraction,
            "repetitions": self.repetitions,
            "seed": int(self.seed),
        }
        if self.k_classify is not None:
            doc["k_classify"] = self.k_classify
        return doc


def _universe(builder) -> list[str]:
    # full ordered candidate kernel names, before any degenerate drops
    if hasattr(builder, "all_names"):
        return list(builder.all_names)
    if hasattr(builder, "block_cols"):
        return [b for b, _ in builder.block_cols]
    return list(builder.names)


def run_single_repetition(
    builder, labels: np.ndarray, cfg: RunConfig, rep: int, seed: int
) -> dict:
    """One seeded split: fit kernels on train, learn weights, score the rest."""
    t0 = time.perf_counter()
    train_idx, test_idx = stratified_split(labels, cfg.train_fraction, seed)
    ks = builder.fit(train_idx)
    t_kernels = time.perf_counter()
    y_train = labels[train_idx]
    y_test = labels[test_idx]
    model = train(ks, y_train, cfg.hyperparams)
    t_train = time.perf_counter()
    cross = builder.cross(test_idx)
    k_cls = cfg.k_classify if cfg.k_classify is not None else cfg.hyperparams.k
    report = knn_predict(model, cross, ks, k_classify=k_cls, truth=y_test)
    base_dist = rkhs_cross_distance_matrix(cross, ks, uniform_weights(ks.d))
    base_pred = knn_vote(base_dist, list(y_train), k_cls)
    base_acc = accuracy(base_pred, [_plain(v) for v in y_test])
    t_done = time.perf_counter()
    beta = model.weights.beta
    return {
        "record": {
            "rep": rep,
            "seed": int(seed),
            "n_train": int(train_idx.shape[0]),
            "n_test": int(test_idx.shape[0]),
            "accuracy": report.accuracy,
            "baseline_accuracy": base_acc,
            "fallback_uniform": report.fallback_uniform,
            "beta_l0": model.weights.l0(),
            "sum_beta": float(beta.sum()),
            "beta": {n: float(v) for n, v in zip(model.kernel_names, beta)},
            "best_round": model.best_round,
        },
        "timings": {
            "kernels_s": t_kernels - t0,
            "train_s": t_train - t_kernels,
            "predict_s": t_done - t_train,
        },
    }


def _plain(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.str_):
        return str(v)
    return v


def _summarize(records: list[dict], universe: list[str]) -> dict:
    acc = np.array([r["accuracy"] for r in records])
    base = np.array([r["baseline_accuracy"] for r in records])
    l0 = np.array([r["beta_l0"] for r in records], dtype=np.float64)
    sums = np.array([r["sum_beta"] for r in records])
    mean_beta = {}
    for name in universe:
        mean_beta[name] = float(
            np.mean([r["beta"].get(name, 0.0) for r in records])
        )
    return {
        "mean_accuracy": float(acc.mean()),
        "std_accuracy": float(acc.std()),
        "min_accuracy": float(acc.min()),
        "max_accuracy": float(acc.max()),
        "mean_baseline_accuracy": float(base.mean()),
        "mean_beta_l0": float(l0.mean()),
        "mean_sum_beta": float(sums.mean()),
        "mean_beta": mean_beta,
        "kernel_names": list(universe),
    }


def _run_repetitions(builder, labels, cfg: RunConfig) -> tuple[list[dict], list[dict]]:
    """Execute all repetitions, each on its own builder clone, in stable order."""
    seeds = expand_seeds(cfg.seed, cfg.repetitions)

    def one(rep: int) -> dict:
        try:
            return run_single_repetition(builder.clone(), labels, cfg, rep, seeds[rep])
        except LmmkError as exc:
            raise type(exc)(f"repetition {rep} (seed {seeds[rep]}): {exc}") from exc

    workers = worker_count()
    if workers == 1 or cfg.repetitions == 1:
        results = [one(r) for r in range(cfg.repetitions)]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, cfg.repetitions)) as pool:
            results = list(pool.map(one, range(cfg.repetitions)))
    return [r["record"] for r in results], [r["timings"] for r in results]


def run_train(builder, labels, cfg: RunConfig) -> dict:
    """Repeated-split evaluation plus a model trained on the full dataset.

    Repetitions run on clones of the builder (split-local state), possibly
    in parallel under LMMK_THREADS; the report order never depends on it.
    """
    labels = np.asarray(labels)
    t0 = time.perf_counter()
    records, rep_timings = _run_repetitions(builder, labels, cfg)
    t_reps = time.perf_counter()

    final_builder = builder.clone()
    all_idx = np.arange(labels.shape[0])
    ks = final_builder.fit(all_idx)
    model = train(ks, labels, cfg.hyperparams)
    t_final = time.perf_counter()

    universe = _universe(final_builder)
    report = {
        "schema": EVAL_SCHEMA,
        "version": EVAL_VERSION,
        "config": cfg.to_dict(),
        "repetitions": records,
        "summary": _summarize(records, universe),
    }
    doc = {
        "model": _bundle(model, final_builder),
        "report": report,
        "timings": {
            "repetitions_s": t_reps - t0,
            "final_train_s": t_final - t_reps,
            "total_s": t_final - t0,
            "per_repetition": rep_timings,
        },
    }
    return doc


def _bundle(model: TrainedModel, builder) -> dict:
    """Model document plus the context needed to rebuild prediction kernels."""
    context: dict = {"kernel_mode": builder.mode, "n_train": int(len(model.labels))}
    if builder.mode in ("per-feature", "per-representation"):
        context["bandwidths"] = {
            n: float(b) for n, b in zip(builder.names, builder.bandwidths)
        }
        if builder.mode == "per-representation":
            context["blocks"] = {
                b: [int(c) for c in cols] for b, cols in builder.block_cols
            }
    else:
        context["bandwidths"] = {
            n: (float(b) if b is not None else None)
            for n, b in zip(builder.names, builder.bandwidths)
        }
        context["raw_diagonals"] = {
            n: ([float(v) for v in dg] if dg is not None else None)
            for n, dg in zip(builder.names, builder.raw_diagonals)
        }
    return {
        "format": "lmmk-model-bundle",
        "version": 1,
        "model": model.to_dict(),
        "context": context,
    }


def run_sweep(builder, labels, cfg: RunConfig, parameter: str, grid: list) -> dict:
    """One run_train-style evaluation per grid value, shared seeds throughout.

    A failing grid point is recorded with its error and the sweep continues.
    """
    if parameter not in SWEEPABLE:
        raise ConfigError(f"sweep parameter must be one of {SWEEPABLE}, got {parameter!r}")
    if not grid:
        raise ConfigError("sweep grid must be non-empty")
    labels = np.asarray(labels)
    t0 = time.perf_counter()
    points = []
    for value in grid:
        try:
            hp = _with_param(cfg.hyperparams, parameter, value)
            point_cfg = RunConfig(
                hyperparams=hp,
                train_fraction=cfg.train_fraction,
                repetitions=cfg.repetitions,
                seed=cfg.seed,
                k_classify=cfg.k_classify,
            )
            records, _ = _run_repetitions(builder, labels, point_cfg)
            summary = _summarize(records, _universe(builder))
            points.append(
                {
                    "value": value,
                    "mean_accuracy": summary["mean_accuracy"],
                    "std_accuracy": summary["std_accuracy"],
                    "mean_baseline_accuracy": summary["mean_baseline_accuracy"],
                    "mean_beta_l0": summary["mean_beta_l0"],
                    "mean_sum_beta": summary["mean_sum_beta"],
                }
            )
        except LmmkError as exc:
            points.append({"value": value, "error": f"{type(exc).__name__}: {exc}"})
    return {
        "schema": "lmmk-sweep",
        "version": 1,
        "parameter": parameter,
        "grid": list(grid),
        "config": cfg.to_dict(),
        "points": points,
        "timings": {"total_s": time.perf_counter() - t0},
    }


def _with_param(hp: Hyperparams, parameter: str, value) -> Hyperparams:
    doc = hp.to_dict()
    if parameter in ("k", "outer_iters"):
        iv = int(value)
        if iv != value:
            raise ConfigError(f"{parameter} grid values must be integers, got {value!r}")
        doc[parameter] = iv
    else:
        doc[parameter] = float(value)
    return Hyperparams.from_dict(doc)


DEFAULT_K_GRID = (1, 2, 3, 4, 5)
DEFAULT_MU_GRID = (0.5, 0.6, 0.7)
DEFAULT_LAMBDA_GRID = (0.0, 0.25, 1.0, 4.0, 16.0)


def _cv_score(builder, labels, folds, hp: Hyperparams, k_classify: int | None) -> float | None:
    """Mean validation accuracy across folds; None when every fold fails."""
    scores = []
    for fold_train, fold_val in folds:
        try:
            ks = builder.fit(fold_train)
            model = train(ks, labels[fold_train], hp)
            cross = builder.cross(fold_val)
            k_cls = k_classify if k_classify is not None else hp.k
            rep = knn_predict(
                model, cross, ks, k_classify=k_cls, truth=labels[fold_val]
            )
            scores.append(rep.accuracy)
        except (NeighborhoodError, EmptyTripleSet, DataError):
            continue
    if not scores:
        return None
    return float(np.mean(scores))


def tune(
    builder,
    labels,
    base: Hyperparams,
    seed: int = 0,
    folds: int = 3,
    k_grid=DEFAULT_K_GRID,
    mu_grid=DEFAULT_MU_GRID,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    k_classify: int | None = None,
    subset=None,
) -> dict:
    """Two-stage grid cross-validation on the given (training) data.

    Stage A scans (k, mu) with lambda = 0; ties prefer higher accuracy, then
    smaller k, then mu nearest 0.5.  Stage B scans lambda at the stage-A
    winner; ties prefer the larger lambda (the sparser model).  Folds are
    fixed once from the seed, so every grid point sees identical splits.
    """
    labels = np.asarray(labels)
    if subset is not None:
        subset = np.asarray(subset, dtype=np.int64)
    else:
        subset = np.arange(labels.shape[0], dtype=np.int64)
    if not list(k_grid) or not list(mu_grid) or not list(lambda_grid):
        raise ConfigError("tune grids must be non-empty")
    fold_seed = expand_seeds(seed, 1)[0]
    local_folds = stratified_folds(labels[subset], folds, fold_seed)
    global_folds = [(subset[tr], subset[va]) for tr, va in local_folds]

    stage_a = []
    for k in k_grid:
        for mu in mu_grid:
            hp = _with_param(_with_param(base, "k", k), "mu", mu)
            hp = _with_param(hp, "lambda", 0.0)
            score = _cv_score(builder, labels, global_folds, hp, k_classify)
            stage_a.append({"k": int(k), "mu": float(mu), "cv_accuracy": score})
    scored_a = [p for p in stage_a if p["cv_accuracy"] is not None]
    if not scored_a:
        raise ConfigError("every (k, mu) grid point failed cross-validation")
    best_a = min(
        scored_a,
        key=lambda p: (-p["cv_accuracy"], p["k"], abs(p["mu"] - 0.5), p["mu"]),
    )

    stage_b = []
    for lam in lambda_grid:
        hp = _with_param(_with_param(base, "k", best_a["k"]), "mu", best_a["mu"])
        hp = _with_param(hp, "lambda", lam)
        score = _cv_score(builder, labels, global_folds, hp, k_classify)
        stage_b.append({"lambda": float(lam), "cv_accuracy": score})
    scored_b = [p for p in stage_b if p["cv_accuracy"] is not None]
    if not scored_b:
        raise ConfigError("every lambda grid point failed cross-validation")
    best_b = min(scored_b, key=lambda p: (-p["cv_accuracy"], -p["lambda"]))

    return {
        "schema": "lmmk-tune",
        "version": 1,
        "folds": folds,
        "seed": int(seed),
        "selected": {
            "k": best_a["k"],
            "mu": best_a["mu"],
            "lambda": best_b["lambda"],
        },
        "stage_a": stage_a,
        "stage_b": stage_b,
    }
