"""File formats and kernel construction from raw data.

Features and labels travel as headered CSV.  Matrices travel either as
headered CSV or as a small binary block: magic ``LMK1``, two little-endian
u32 dimensions, then row-major float64 values.

Three kernel builders cover the supported modes:

  PerFeatureBuilder       one kernel per data dimension (|x_i - x_j| distance)
  PerBlockBuilder         one kernel per named group of columns (Euclidean)
  PrecomputedBuilder      kernel or distance matrices supplied by the user

Each builder is constructed over the full dataset and then fit on a subset
of row indices; bandwidths are always estimated on the training rows only
and reused for test cross-kernels.
"""

from __future__ import annotations

import csv
import struct
import warnings
from pathlib import Path

import numpy as np

from .errors import (
    AllZeroDistances,
    ConfigError,
    DataError,
    DegenerateKernelWarning,
    LengthMismatch,
    ParseError,
    ShapeMismatch,
)
from .kernels import (
    CrossKernelSet,
    DistanceMatrix,
    KernelMatrix,
    KernelSet,
    compute_bandwidth,
    gaussian_cross_kernel,
    gaussian_kernel,
    normalize_cross_kernel,
    normalize_kernel,
)

__all__ = [
    "LABEL_COLUMN",
    "load_features_csv",
    "load_labels_csv",
    "load_matrix",
    "save_matrix",
    "PerFeatureBuilder",
    "PerBlockBuilder",
    "PrecomputedBuilder",
    "make_builder",
]

LABEL_COLUMN = "label"
LMK_MAGIC = b"LMK1"


# ---------------------------------------------------------------------------
# CSV and binary IO


def load_features_csv(path) -> tuple[np.ndarray, list | None, list[str]]:
    """Read a headered CSV of numeric features.

    A column named ``label`` (any position) is split off as the label list.
    Returns (X, labels-or-None, feature_names).
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != len(header):
                    raise ParseError(
                        f"{path}: row {lineno} has {len(row)} fields, header has {len(header)}"
                    )
                rows.append((lineno, row))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")

    label_idx = header.index(LABEL_COLUMN) if LABEL_COLUMN in header else None
    feature_names = [h for i, h in enumerate(header) if i != label_idx]
    labels: list | None = [] if label_idx is not None else None
    X = np.empty((len(rows), len(feature_names)))
    for r, (lineno, row) in enumerate(rows):
        c = 0
        for i, cell in enumerate(row):
            if i == label_idx:
                labels.append(cell.strip())
                continue
            try:
                X[r, c] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: row {lineno}, column {header[i]!r}: "
                    f"{cell!r} is not a number"
                ) from None
            c += 1
    return X, labels, feature_names


def load_labels_csv(path) -> list[str]:
    """Read labels from a one-column headered CSV (or the ``label`` column)."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise ParseError(f"{path}: empty file") from None
            if LABEL_COLUMN in header:
                idx = header.index(LABEL_COLUMN)
            elif len(header) == 1:
                idx = 0
            else:
                raise ParseError(
                    f"{path}: need a 'label' column or a single-column file, got {header}"
                )
            out = []
            for lineno, row in enumerate(reader, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) <= idx:
                    raise ParseError(f"{path}: row {lineno} is missing the label field")
                out.append(row[idx].strip())
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not out:
        raise ParseError(f"{path}: no labels")
    return out


def _read_lmk(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) != 12 or head[:4] != LMK_MAGIC:
            raise ParseError(f"{path}: not an LMK1 matrix file")
        rows, cols = struct.unpack("<II", head[4:])
        data = fh.read(8 * rows * cols)
        if len(data) != 8 * rows * cols:
            raise ParseError(
                f"{path}: truncated matrix body ({len(data)} bytes for {rows}x{cols})"
            )
        extra = fh.read(1)
        if extra:
            raise ParseError(f"{path}: trailing bytes after the matrix body")
    values = np.frombuffer(data, dtype="<f8").astype(np.float64)
    return values.reshape(rows, cols)


def _write_lmk(path: Path, m: np.ndarray):
    m = np.ascontiguousarray(m, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(LMK_MAGIC)
        fh.write(struct.pack("<II", m.shape[0], m.shape[1]))
        fh.write(m.astype("<f8").tobytes())


def _read_matrix_csv(path: Path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        ncols = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != ncols:
                raise ParseError(
                    f"{path}: row {lineno} has {len(row)} fields, header has {ncols}"
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ParseError(f"{path}: row {lineno} has a non-numeric field") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows)


def load_matrix(path) -> np.ndarray:
    """Read a numeric matrix from .lmk binary or headered CSV."""
    path = Path(path)
    try:
        if path.suffix == ".lmk":
            return _read_lmk(path)
        return _read_matrix_csv(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def save_matrix(path, m: np.ndarray):
    """Write a matrix as .lmk binary or headered CSV, by extension."""
    path = Path(path)
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeMismatch(f"matrices are 2-D, got shape {m.shape}")
    if path.suffix == ".lmk":
        _write_lmk(path, m)
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"c{i}" for i in range(m.shape[1])])
        for row in m:
            writer.writerow([repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# Kernel builders


def _abs_diff(col_a: np.ndarray, col_b: np.ndarray) -> np.ndarray:
    return np.abs(col_a[:, None] - col_b[None, :])


def _euclidean(Xa: np.ndarray, Xb: np.ndarray) -> np.ndarray:
    sq = (
        np.sum(Xa * Xa, axis=1)[:, None]
        + np.sum(Xb * Xb, axis=1)[None, :]
        - 2.0 * (Xa @ Xb.T)
    )
    return np.sqrt(np.maximum(sq, 0.0))


class PerFeatureBuilder:
    """One Gaussian kernel per data dimension, |x^m_i - x^m_j| distance.

    Dimensions that are constant on the training rows produce an all-zero
    distance matrix and are dropped with a warning.
    """

    mode = "per-feature"

    def __init__(self, X: np.ndarray, feature_names):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ShapeMismatch(f"feature matrix must be (N, F), got {X.shape}")
        names = [str(s) for s in feature_names]
        if len(names) != X.shape[1]:
            raise LengthMismatch(f"{len(names)} names for {X.shape[1]} feature columns")
        self.X = X
        self.all_names = names
        self.names: tuple = ()
        self.bandwidths: tuple = ()
        self.kept: tuple = ()
        self._train_idx: np.ndarray | None = None

    def clone(self) -> "PerFeatureBuilder":
        """Fresh unfitted builder over the same data (shared, never copied)."""
        out = object.__new__(PerFeatureBuilder)
        out.X = self.X
        out.all_names = self.all_names
        out.names = ()
        out.bandwidths = ()
        out.kept = ()
        out._train_idx = None
        return out

    def fit(self, train_idx) -> KernelSet:
        idx = np.asarray(train_idx, dtype=np.int64)
        Xt = self.X[idx]
        kernels = []
        names = []
        bandwidths = []
        kept = []
        dropped = []
        for m, name in enumerate(self.all_names):
            dmat = _abs_diff(Xt[:, m], Xt[:, m])
            np.fill_diagonal(dmat, 0.0)
            try:
                delta = compute_bandwidth(DistanceMatrix(dmat))
            except AllZeroDistances:
                dropped.append(name)
                continue
            kernels.append(gaussian_kernel(DistanceMatrix(dmat), delta))
            names.append(name)
            bandwidths.append(delta)
            kept.append(m)
        if dropped:
            warnings.warn(
                f"dropping constant feature(s) {dropped}: "
                "zero distances admit no bandwidth",
                DegenerateKernelWarning,
                stacklevel=2,
            )
        if not kernels:
            raise DataError("every feature is constant on the training rows")
        self.names = tuple(names)
        self.bandwidths = tuple(bandwidths)
        self.kept = tuple(kept)
        self._train_idx = idx
        return KernelSet(kernels=tuple(kernels), names=self.names)

    def cross(self, test_idx) -> CrossKernelSet:
        if self._train_idx is None:
            raise DataError("fit() must run before cross()")
        tidx = np.asarray(test_idx, dtype=np.int64)
        Xt = self.X[self._train_idx]
        Xs = self.X[tidx]
        kernels = []
        selfs = []
        for m, delta in zip(self.kept, self.bandwidths):
            dmat = _abs_diff(Xs[:, m], Xt[:, m])
            values, self_values = gaussian_cross_kernel(dmat, delta)
            kernels.append(values)
            selfs.append(self_values)
        return CrossKernelSet(kernels=tuple(kernels), self_values=tuple(selfs))


class PerBlockBuilder:
    """One Gaussian kernel per named column block, Euclidean distance."""

    mode = "per-representation"

    def __init__(self, X: np.ndarray, feature_names, blocks: dict):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ShapeMismatch(f"feature matrix must be (N, F), got {X.shape}")
        names = [str(s) for s in feature_names]
        if len(names) != X.shape[1]:
            raise LengthMismatch(f"{len(names)} names for {X.shape[1]} feature columns")
        if not blocks:
            raise ConfigError("per-representation mode needs a non-empty 'blocks' mapping")
        col_of = {n: i for i, n in enumerate(names)}
        self.block_cols: list[tuple[str, np.ndarray]] = []
        for bname, cols in blocks.items():
            if not cols:
                raise ConfigError(f"block {bname!r} lists no columns")
            idx = []
            for c in cols:
                if isinstance(c, str):
                    if c not in col_of:
                        raise ConfigError(f"block {bname!r} names unknown column {c!r}")
                    idx.append(col_of[c])
                else:
                    ci = int(c)
                    if not (0 <= ci < X.shape[1]):
                        raise ConfigError(f"block {bname!r} column index {ci} out of range")
                    idx.append(ci)
            self.block_cols.append((str(bname), np.asarray(idx, dtype=np.int64)))
        self.X = X
        self.names: tuple = ()
        self.bandwidths: tuple = ()
        self._train_idx: np.ndarray | None = None
        self._kept_blocks: list = []

    def clone(self) -> "PerBlockBuilder":
        """Fresh unfitted builder over the same data (shared, never copied)."""
        out = object.__new__(PerBlockBuilder)
        out.X = self.X
        out.block_cols = self.block_cols
        out.names = ()
        out.bandwidths = ()
        out._train_idx = None
        out._kept_blocks = []
        return out

    def fit(self, train_idx) -> KernelSet:
        idx = np.asarray(train_idx, dtype=np.int64)
        Xt = self.X[idx]
        kernels = []
        names = []
        bandwidths = []
        dropped = []
        for bname, cols in self.block_cols:
            dmat = _euclidean(Xt[:, cols], Xt[:, cols])
            np.fill_diagonal(dmat, 0.0)
            dmat = 0.5 * (dmat + dmat.T)
            try:
                delta = compute_bandwidth(DistanceMatrix(dmat))
            except AllZeroDistances:
                dropped.append(bname)
                continue
            kernels.append(gaussian_kernel(DistanceMatrix(dmat), delta))
            names.append(bname)
            bandwidths.append(delta)
        if dropped:
            warnings.warn(
                f"dropping degenerate block(s) {dropped}: "
                "zero distances admit no bandwidth",
                DegenerateKernelWarning,
                stacklevel=2,
            )
        if not kernels:
            raise DataError("every block is degenerate on the training rows")
        self.names = tuple(names)
        self.bandwidths = tuple(bandwidths)
        self._train_idx = idx
        self._kept_blocks = [
            (b, c) for (b, c) in self.block_cols if b in set(names)
        ]
        return KernelSet(kernels=tuple(kernels), names=self.names)

    def cross(self, test_idx) -> CrossKernelSet:
        if self._train_idx is None:
            raise DataError("fit() must run before cross()")
        tidx = np.asarray(test_idx, dtype=np.int64)
        Xt = self.X[self._train_idx]
        Xs = self.X[tidx]
        kernels = []
        selfs = []
        for (bname, cols), delta in zip(self._kept_blocks, self.bandwidths):
            dmat = _euclidean(Xs[:, cols], Xt[:, cols])
            values, self_values = gaussian_cross_kernel(dmat, delta)
            kernels.append(values)
            selfs.append(self_values)
        return CrossKernelSet(kernels=tuple(kernels), self_values=tuple(selfs))


class PrecomputedBuilder:
    """User-supplied kernel or distance matrices over the full sample set.

    Kernel matrices are normalized to unit diagonal on load (raw diagonals
    retained for normalizing prediction-time cross values); distance
    matrices go through the Gaussian map with a data-driven bandwidth.
    Entry-wise normalization commutes with row/column slicing, so split
    views stay consistent with the full matrix.
    """

    mode = "precomputed"

    def __init__(self, entries: list[dict], base_dir=None):
        if not entries:
            raise ConfigError("precomputed mode needs a non-empty 'kernels' list")
        base = Path(base_dir) if base_dir is not None else None
        self.names = []
        self.normalized = []       # full N x N unit-diagonal matrices
        self.raw_diagonals = []    # None for distance-derived entries
        self.bandwidths = []       # None for kernel entries
        n_ref = None
        for e, entry in enumerate(entries):
            if not isinstance(entry, dict) or "name" not in entry:
                raise ConfigError(f"kernels[{e}] needs a 'name' and a 'kernel' or 'distance' path")
            name = str(entry["name"])
            has_k = "kernel" in entry
            has_d = "distance" in entry
            if has_k == has_d:
                raise ConfigError(
                    f"kernels[{e}] ({name!r}) must give exactly one of 'kernel' or 'distance'"
                )
            raw_path = Path(entry["kernel"] if has_k else entry["distance"])
            if base is not None and not raw_path.is_absolute():
                raw_path = base / raw_path
            m = load_matrix(raw_path)
            if m.shape[0] != m.shape[1]:
                raise ShapeMismatch(f"{raw_path}: matrix is {m.shape}, expected square")
            m = 0.5 * (m + m.T)
            if n_ref is None:
                n_ref = m.shape[0]
            elif m.shape[0] != n_ref:
                raise ShapeMismatch(
                    f"{raw_path}: {m.shape[0]} samples, earlier matrices have {n_ref}"
                )
            if has_k:
                raw = KernelMatrix(m)
                self.raw_diagonals.append(np.diag(m).copy())
                self.normalized.append(normalize_kernel(raw).values)
                self.bandwidths.append(None)
            else:
                np.fill_diagonal(m, 0.0)
                dmat = DistanceMatrix(np.abs(m))
                delta = compute_bandwidth(dmat)
                self.raw_diagonals.append(None)
                self.normalized.append(gaussian_kernel(dmat, delta).values)
                self.bandwidths.append(delta)
            self.names.append(name)
        self.names = tuple(self.names)
        self.n_samples = n_ref
        self._train_idx: np.ndarray | None = None

    def clone(self) -> "PrecomputedBuilder":
        """Fresh unfitted builder over the same loaded matrices."""
        out = object.__new__(PrecomputedBuilder)
        out.names = self.names
        out.normalized = self.normalized
        out.raw_diagonals = self.raw_diagonals
        out.bandwidths = self.bandwidths
        out.n_samples = self.n_samples
        out._train_idx = None
        return out

    def fit(self, train_idx) -> KernelSet:
        idx = np.asarray(train_idx, dtype=np.int64)
        self._train_idx = idx
        kernels = tuple(
            KernelMatrix(np.ascontiguousarray(m[np.ix_(idx, idx)])) for m in self.normalized
        )
        return KernelSet(kernels=kernels, names=self.names)

    def cross(self, test_idx) -> CrossKernelSet:
        if self._train_idx is None:
            raise DataError("fit() must run before cross()")
        tidx = np.asarray(test_idx, dtype=np.int64)
        kernels = []
        selfs = []
        for m in self.normalized:
            kernels.append(np.ascontiguousarray(m[np.ix_(tidx, self._train_idx)]))
            selfs.append(np.ones(tidx.shape[0]))
        return CrossKernelSet(kernels=tuple(kernels), self_values=tuple(selfs))

    def cross_from_files(self, entries: list[dict], base_dir=None) -> CrossKernelSet:
        """Cross kernels for new points from user files.

        Each entry, in training kernel order, gives a 'cross' matrix
        (n_test x n_train raw values) and, for raw-kernel training entries,
        a 'self' matrix of the test points' own kernel values (n_test x 1).
        Distance-derived entries instead give cross distances, mapped with
        the stored training bandwidth.
        """
        if self._train_idx is None:
            raise DataError("fit() must run before cross_from_files()")
        if len(entries) != len(self.names):
            raise LengthMismatch(f"{len(entries)} cross entries for {len(self.names)} kernels")
        base = Path(base_dir) if base_dir is not None else None

        def _resolve(p):
            p = Path(p)
            return base / p if (base is not None and not p.is_absolute()) else p

        n_train = self._train_idx.shape[0]
        kernels = []
        selfs = []
        for e, (entry, name) in enumerate(zip(entries, self.names)):
            if not isinstance(entry, dict) or str(entry.get("name")) != name:
                raise ConfigError(
                    f"cross entry {e} must be named {name!r} to match the training kernels"
                )
            if "cross" not in entry:
                raise ConfigError(f"cross entry {name!r} needs a 'cross' matrix path")
            cm = load_matrix(_resolve(entry["cross"]))
            if cm.shape[1] != n_train:
                raise ShapeMismatch(
                    f"cross matrix for {name!r} has {cm.shape[1]} columns, "
                    f"training set has {n_train}"
                )
            delta = self.bandwidths[e]
            if delta is not None:
                values, self_values = gaussian_cross_kernel(np.abs(cm), delta)
            else:
                if "self" not in entry:
                    raise ConfigError(
                        f"cross entry {name!r} needs a 'self' matrix of test self-values"
                    )
                sv = load_matrix(_resolve(entry["self"])).reshape(-1)
                if sv.shape[0] != cm.shape[0]:
                    raise ShapeMismatch(
                        f"{sv.shape[0]} self-values for {cm.shape[0]} test rows in {name!r}"
                    )
                train_diag = self.raw_diagonals[e][self._train_idx]
                values, self_values = normalize_cross_kernel(cm, train_diag, sv)
            kernels.append(values)
            selfs.append(self_values)
        return CrossKernelSet(kernels=tuple(kernels), self_values=tuple(selfs))


def make_builder(config: dict, base_dir=None):
    """Construct the kernel builder named by config['kernel_mode'].

    Returns (builder, labels).  Raw-feature modes read config['data'] (and
    config['labels'] when the CSV has no label column); precomputed mode
    reads config['kernels'] and requires config['labels'].
    """
    mode = normalize_mode(config.get("kernel_mode", "per-feature"))
    base = Path(base_dir) if base_dir is not None else None

    def _resolve(p):
        p = Path(p)
        return base / p if (base is not None and not p.is_absolute()) else p

    if mode == "precomputed":
        builder = PrecomputedBuilder(config.get("kernels", []), base_dir=base_dir)
        if "labels" not in config:
            raise ConfigError("precomputed mode needs a 'labels' file")
        labels = load_labels_csv(_resolve(config["labels"]))
        if len(labels) != builder.n_samples:
            raise LengthMismatch(
                f"{len(labels)} labels for {builder.n_samples} kernel samples"
            )
        return builder, labels

    if "data" not in config:
        raise ConfigError(f"{mode} mode needs a 'data' CSV path")
    X, labels, feature_names = load_features_csv(_resolve(config["data"]))
    if "labels" in config and config["labels"]:
        labels = load_labels_csv(_resolve(config["labels"]))
    if labels is None:
        raise ConfigError(
            "no labels: add a 'label' column to the data CSV or a 'labels' file"
        )
    if len(labels) != X.shape[0]:
        raise LengthMismatch(f"{len(labels)} labels for {X.shape[0]} data rows")
    if mode == "per-feature":
        return PerFeatureBuilder(X, feature_names), labels
    return PerBlockBuilder(X, feature_names, config.get("blocks", {})), labels


def normalize_mode(mode) -> str:
    """Map kernel-mode spellings (PerFeature, per_feature, ...) to canonical."""
    key = str(mode).lower().replace("-", "").replace("_", "")
    table = {
        "perfeature": "per-feature",
        "perrepresentation": "per-representation",
        "perblock": "per-representation",
        "precomputed": "precomputed",
    }
    if key not in table:
        raise ConfigError(
            f"unknown kernel mode {mode!r}; use per-feature, per-representation, or precomputed"
        )
    return table[key]
