"""Margin LP assembly, the outer training loop, and the trained model.

The optimization selects non-negative kernel weights beta so that, for every
anchor, same-label targets sit at least a unit margin closer than
other-label impostors in the combined feature space.  Margin violations are
absorbed by slack variables, and an l1 term on beta prunes kernels.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .errors import (
    AllZeroWeightsWarning,
    ConfigError,
    EmptyTripleSet,
    LPNotOptimal,
    ParseError,
)
from .kernels import KernelSet, KernelWeights, rkhs_distance_matrix
from .neighbors import NeighborhoodSpec, TripleSet, build_triples, select_impostors, select_targets

__all__ = [
    "Hyperparams",
    "TrainedModel",
    "pull_coefficients",
    "margin_row",
    "margin_matrix",
    "assemble_lp",
    "train",
    "sparsity",
    "true_objective",
]

CONSTRAINT_FORMS = ("derived", "literal")

MODEL_FORMAT = "lmmk-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Hyperparams:
    """Training knobs.

    mu trades the pull term against margin violations, lam weights the l1
    penalty on beta, and constraint_form picks the margin row: "derived" is
    the distance-difference form 2(K_ij - K_il); "literal" keeps the constant
    inside the bracket, 2(1 + K_ij - K_il), which adds a 2*sum(beta) reward
    to every row and therefore interacts with lam.
    """

    k: int = 3
    mu: float = 0.5
    lam: float = 1.0
    outer_iters: int = 3
    constraint_form: str = "derived"

    def __post_init__(self):
        if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
            raise ConfigError(f"k must be an integer >= 1, got {self.k!r}")
        if not np.isfinite(self.mu) or not (0.0 <= self.mu <= 1.0):
            raise ConfigError(f"mu must lie in [0, 1], got {self.mu!r}")
        if not np.isfinite(self.lam) or self.lam < 0.0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam!r}")
        if not isinstance(self.outer_iters, int) or isinstance(self.outer_iters, bool) or not (
            1 <= self.outer_iters <= 10
        ):
            raise ConfigError(f"outer_iters must be an integer in 1..10, got {self.outer_iters!r}")
        if self.constraint_form not in CONSTRAINT_FORMS:
            raise ConfigError(
                f"constraint_form must be one of {CONSTRAINT_FORMS}, got {self.constraint_form!r}"
            )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "mu": self.mu,
            "lambda": self.lam,
            "outer_iters": self.outer_iters,
            "constraint_form": self.constraint_form,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Hyperparams":
        known = {"k", "mu", "lambda", "outer_iters", "constraint_form"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown hyperparameter keys: {sorted(extra)}")
        kwargs = {}
        if "k" in doc:
            kwargs["k"] = doc["k"]
        if "mu" in doc:
            kwargs["mu"] = float(doc["mu"])
        if "lambda" in doc:
            kwargs["lam"] = float(doc["lambda"])
        if "outer_iters" in doc:
            kwargs["outer_iters"] = doc["outer_iters"]
        if "constraint_form" in doc:
            kwargs["constraint_form"] = doc["constraint_form"]
        return cls(**kwargs)


def pull_coefficients(ks: KernelSet, triples: TripleSet) -> np.ndarray:
    """Per-kernel cost of pulling targets in: p_m = sum over target pairs of (1 - K_m,ij).

    Each (anchor, target) pair is counted once no matter how many impostors
    share it.  Kernels are assumed normalized, so 1 - K_m,ij is half the
    squared distance and p >= 0 up to roundoff (clamped).
    """
    pairs = triples.target_pairs()
    d = ks.d
    if pairs.shape[0] == 0:
        return np.zeros(d)
    i, j = pairs[:, 0], pairs[:, 1]
    p = np.empty(d)
    for m in range(d):
        p[m] = np.sum(1.0 - ks.stacked[m][i, j])
    return np.maximum(p, 0.0)


def margin_row(ks: KernelSet, triple, form: str = "derived") -> np.ndarray:
    """Coefficients a with a . beta = margin gained by triple (i, j, l).

    "derived": a_m = 2(K_m,ij - K_m,il), the distance difference
    D(i,l) - D(i,j) under unit-diagonal kernels.  "literal": keeps the
    constant inside, a_m = 2(1 + K_m,ij - K_m,il).
    """
    if form not in CONSTRAINT_FORMS:
        raise ConfigError(f"constraint_form must be one of {CONSTRAINT_FORMS}, got {form!r}")
    i, j, l = (int(t) for t in triple)
    kij = ks.stacked[:, i, j]
    kil = ks.stacked[:, i, l]
    if form == "literal":
        return 2.0 * (1.0 + kij - kil)
    return 2.0 * (kij - kil)


def margin_matrix(ks: KernelSet, triples: TripleSet, form: str = "derived") -> np.ndarray:
    """(n_triples, d) stack of margin rows, in triple order."""
    if form not in CONSTRAINT_FORMS:
        raise ConfigError(f"constraint_form must be one of {CONSTRAINT_FORMS}, got {form!r}")
    t = triples.triples
    if t.shape[0] == 0:
        return np.empty((0, ks.d))
    i, j, l = t[:, 0], t[:, 1], t[:, 2]
    out = np.empty((t.shape[0], ks.d))
    for m in range(ks.d):
        km = ks.stacked[m]
        if form == "literal":
            out[:, m] = 2.0 * (1.0 + km[i, j] - km[i, l])
        else:
            out[:, m] = 2.0 * (km[i, j] - km[i, l])
    return out


def assemble_lp(ks: KernelSet, triples: TripleSet, hp: Hyperparams) -> lp.LPProblem:
    """Non-negative LP over [beta (d) | xi (n_triples)].

    minimize  ((1-mu) p + lam) . beta + mu sum(xi)
    s.t.      margin_row(t) . beta + xi_t >= 1   for every triple t
    """
    T = triples.n_triples
    if T == 0:
        raise EmptyTripleSet("no (anchor, target, impostor) triples; cannot assemble the margin LP")
    d = ks.d
    p = pull_coefficients(ks, triples)
    c = np.concatenate([(1.0 - hp.mu) * p + hp.lam, np.full(T, hp.mu)])
    A = np.hstack([margin_matrix(ks, triples, hp.constraint_form), np.eye(T)])
    b = np.ones(T)
    return lp.LPProblem(c=c, A=A, b=b)


def true_objective(
    ks: KernelSet, triples: TripleSet, beta: np.ndarray, hp: Hyperparams
) -> float:
    """Pull + hinge + l1 objective of a weight vector on a triple set.

    The hinge slack of each triple is recomputed from the distances rather
    than read off the LP, so values are comparable across rounds.
    """
    w = KernelWeights(beta)
    dist = rkhs_distance_matrix(ks, w)
    pairs = triples.target_pairs()
    pull = float(dist[pairs[:, 0], pairs[:, 1]].sum()) if pairs.shape[0] else 0.0
    t = triples.triples
    if t.shape[0]:
        gap = dist[t[:, 0], t[:, 2]] - dist[t[:, 0], t[:, 1]]
        hinge = float(np.maximum(0.0, 1.0 - gap).sum())
    else:
        hinge = 0.0
    return (1.0 - hp.mu) * pull + hp.mu * hinge + hp.lam * float(beta.sum())


def sparsity(w: KernelWeights) -> int:
    """Number of weights strictly above the zero tolerance."""
    return w.l0()


def _canon_label(v):
    # json round-trips str, int, bool, float; numpy scalars need unwrapping
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.str_,)):
        return str(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


@dataclass(frozen=True)
class TrainedModel:
    """Learned kernel weights plus everything needed to predict with them."""

    weights: KernelWeights
    kernel_names: tuple
    hyperparams: Hyperparams
    labels: tuple
    objective_trace: tuple
    best_round: int
    classes: tuple = field(default=())

    def __post_init__(self):
        if len(self.kernel_names) != self.weights.d:
            raise ConfigError(
                f"{len(self.kernel_names)} kernel names for {self.weights.d} weights"
            )
        if not all(np.isfinite(v) for v in self.objective_trace):
            raise ConfigError("objective trace must be finite")
        if not (0 <= self.best_round < len(self.objective_trace)):
            raise ConfigError("best_round must index the objective trace")
        if not self.classes:
            object.__setattr__(
                self, "classes", tuple(sorted(set(self.labels)))
            )

    @property
    def beta(self) -> np.ndarray:
        return self.weights.beta

    def effective_weights(self) -> tuple[KernelWeights, bool]:
        """The weights predictions should use, with an all-zero fallback flag.

        When every learned weight sits below the zero tolerance the model
        cannot rank anything; prediction falls back to uniform weights
        (the kernel-average baseline) and flags it.
        """
        if self.weights.l0() == 0:
            warnings.warn(
                "all learned kernel weights are zero (lambda too large or mu = 0); "
                "falling back to uniform weights",
                AllZeroWeightsWarning,
                stacklevel=2,
            )
            return KernelWeights(np.ones(self.weights.d)), True
        return self.weights, False

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "beta": [float(v) for v in self.weights.beta],
            "kernel_names": list(self.kernel_names),
            "hyperparams": self.hyperparams.to_dict(),
            "zero_tolerance": self.weights.zero_tolerance,
            "labels": [_canon_label(v) for v in self.labels],
            "classes": [_canon_label(v) for v in self.classes],
            "objective_trace": [float(v) for v in self.objective_trace],
            "best_round": self.best_round,
        }

    def to_json(self) -> str:
        # repr-exact floats: json emits the shortest string that round-trips
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainedModel":
        if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
            raise ParseError(f"not a {MODEL_FORMAT} document")
        if doc.get("version") != MODEL_VERSION:
            raise ParseError(f"unsupported model version {doc.get('version')!r}")
        try:
            weights = KernelWeights(
                np.asarray(doc["beta"], dtype=np.float64),
                zero_tolerance=float(doc["zero_tolerance"]),
            )
            return cls(
                weights=weights,
                kernel_names=tuple(doc["kernel_names"]),
                hyperparams=Hyperparams.from_dict(doc["hyperparams"]),
                labels=tuple(doc["labels"]),
                objective_trace=tuple(float(v) for v in doc["objective_trace"]),
                best_round=int(doc["best_round"]),
                classes=tuple(doc["classes"]),
            )
        except KeyError as exc:
            raise ParseError(f"model document missing key {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"model document is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def train(
    ks: KernelSet,
    labels,
    hp: Hyperparams,
    solver_method: str = "auto",
) -> TrainedModel:
    """Iterate neighbor selection and the margin LP, keep the best round.

    Round 1 selects neighbors under uniform weights; later rounds use the
    previous round's beta (or uniform again if it was all zero).  Each
    round's LP must certify optimality.  The returned model is the round
    whose weights score the lowest pull + hinge + l1 objective on that
    round's own triples.
    """
    labels = np.asarray(labels)
    d = ks.d
    spec = NeighborhoodSpec(k=hp.k)
    geometry = KernelWeights(np.ones(d))
    trace: list[float] = []
    betas: list[np.ndarray] = []
    for rnd in range(hp.outer_iters):
        dist = rkhs_distance_matrix(ks, geometry)
        targets = select_targets(dist, labels, spec)
        impostors = select_impostors(dist, labels, spec)
        triples = build_triples(targets, impostors)
        problem = assemble_lp(ks, triples, hp)
        sol = lp.solve(problem, method=solver_method)
        if sol.status is not lp.LPStatus.OPTIMAL:
            raise LPNotOptimal(
                f"round {rnd + 1} LP ended {sol.status.value} "
                f"after {sol.n_iterations} iterations"
            )
        beta = sol.values[:d].copy()
        betas.append(beta)
        trace.append(true_objective(ks, triples, beta, hp))
        w = KernelWeights(beta)
        geometry = w if w.l0() > 0 else KernelWeights(np.ones(d))
    best = int(np.argmin(trace))
    return TrainedModel(
        weights=KernelWeights(betas[best]),
        kernel_names=ks.names,
        hyperparams=hp,
        labels=tuple(_canon_label(v) for v in labels),
        objective_trace=tuple(trace),
        best_round=best,
    )
