"""Dataset container, CSV ingestion, min-max normalization, and synthesis."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParseError
from .linalg import Rng

# Published shapes (n, c, d) asserted when a CSV file is named after one of
# the reference datasets.
KNOWN_SHAPES = {
    "bank": (45211, 2, 20),
    "credit": (30000, 2, 23),
    "drive": (58509, 11, 48),
    "news": (39797, 5, 59),
}


@dataclass
class Dataset:
    """Numeric feature matrix plus integer class labels."""

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int
    num_classes: int
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise InputError("features must be a 2-D matrix")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (self.features.shape[0],):
            raise InputError("labels length must equal the number of rows")
        if not self.feature_names:
            self.feature_names = [f"f{i}" for i in range(self.features.shape[1])]
        if len(self.feature_names) != self.features.shape[1]:
            raise InputError("feature_names length must equal the number of columns")
        if self.n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise InputError(f"labels must lie in 0..{self.num_classes - 1}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> "Dataset":
        return Dataset(
            self.features[idx], self.labels[idx], self.num_classes, list(self.feature_names)
        )


@dataclass(frozen=True)
class NormStats:
    """Per-feature minima and maxima captured at normalization time."""

    mins: np.ndarray
    maxs: np.ndarray


def load_csv(path, label_column: str = "label", delimiter: str = ",") -> Dataset:
    """Parse a headered numeric CSV into a Dataset.

    Every non-label column becomes a feature in file order. Ragged rows,
    non-numeric cells, and missing label columns raise ParseError with the
    offending 1-based line number.
    """
    path = str(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ParseError(f"missing label column {label_column!r}", line=1)
        label_pos = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_pos]
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} cells, found {len(row)}", line=lineno
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise ParseError("non-numeric cell", line=lineno) from None
            label = values.pop(label_pos)
            if label != int(label):
                raise ParseError(f"non-integer label {label}", line=lineno)
            rows.append(values)
            labels.append(int(label))
    if not rows:
        raise ParseError("no data rows", line=2)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0:
        raise ParseError(f"negative label {labels.min()}")
    ds = Dataset(np.asarray(rows), labels, int(labels.max()) + 1, names)
    _assert_known_shape(path, ds)
    return ds


def _assert_known_shape(path: str, ds: Dataset) -> None:
    stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0].lower()
    expected = KNOWN_SHAPES.get(stem)
    if expected and (ds.n, ds.num_classes, ds.d) != expected:
        raise InputError(
            f"file named {stem!r} should have (n, c, d)={expected}, "
            f"got {(ds.n, ds.num_classes, ds.d)}"
        )


def save_csv(ds: Dataset, path, label_column: str = "label", delimiter: str = ",") -> None:
    """Inverse of load_csv; values are written with full round-trip precision."""
    with open(str(path), "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(list(ds.feature_names) + [label_column])
        for x, y in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])


def minmax_normalize(ds: Dataset):
    """Map every feature column into [0, 1]; constant columns map to 0.5."""
    mins = ds.features.min(axis=0)
    maxs = ds.features.max(axis=0)
    span = maxs - mins
    out = np.empty_like(ds.features)
    const = span == 0
    out[:, const] = 0.5
    out[:, ~const] = (ds.features[:, ~const] - mins[~const]) / span[~const]
    return (
        Dataset(out, ds.labels, ds.num_classes, list(ds.feature_names)),
        NormStats(mins, maxs),
    )


def denormalize(x: np.ndarray, stats: NormStats) -> np.ndarray:
    """Undo minmax_normalize per column; constant columns recover their value."""
    x = np.asarray(x, dtype=np.float64)
    span = stats.maxs - stats.mins
    out = x * span + stats.mins
    const = span == 0
    out[..., const] = stats.mins[const]
    return out


@dataclass
class SynthConfig:
    """Synthetic classification data with tunable cross-feature correlation.

    Features start as i.i.d. N(0.5, 0.25^2) draws, so with mix_strength 0
    the columns are uncorrelated. Labels come from a balanced
    nearest-center assignment against c random class centers in [0,1]^d
    (linearly learnable: nearest-center boundaries are linear scores),
    and each sample is pulled toward its class center by 0.15*class_sep.
    Finally every feature is blended with a shared per-sample factor f of
    matching variance, x_j <- (1-m)*x_j + m*f, so mix_strength m controls
    the cross-feature correlation without shrinking feature variance.
    """

    n: int
    d: int
    c: int
    class_sep: float = 1.0
    mix_strength: float = 0.0
    seed: int = 0


def _balanced_nearest_center(x: np.ndarray, centers: np.ndarray, rng: Rng) -> np.ndarray:
    """Assign each sample to its closest center that still has capacity."""
    n, c = x.shape[0], centers.shape[0]
    capacity = np.full(c, n // c)
    capacity[: n % c] += 1
    preference = np.argsort(
        ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2), axis=1
    )
    labels = np.empty(n, dtype=np.int64)
    for i in rng.permutation(n):
        for k in preference[i]:
            if capacity[k] > 0:
                capacity[k] -= 1
                labels[i] = k
                break
    return labels


def synth_generate(cfg: SynthConfig) -> Dataset:
    if cfg.n < cfg.c or cfg.d < 2 or cfg.c < 2:
        raise InputError(f"invalid synthetic sizes n={cfg.n}, d={cfg.d}, c={cfg.c}")
    if not (0.0 <= cfg.mix_strength < 1.0):
        raise InputError(f"mix_strength must lie in [0, 1), got {cfg.mix_strength}")
    if cfg.class_sep <= 0:
        raise InputError(f"class_sep must be positive, got {cfg.class_sep}")
    rng = Rng(cfg.seed)
    x = 0.5 + rng.fork("base").normal(0.0, 0.25, size=(cfg.n, cfg.d))
    centers = rng.fork("centers").uniform(size=(cfg.c, cfg.d))
    labels = _balanced_nearest_center(x, centers, rng.fork("assign"))
    pull = min(0.15 * cfg.class_sep, 1.0)
    x = x + pull * (centers[labels] - x)
    m = cfg.mix_strength
    if m > 0.0:
        w = rng.fork("mixing").normal(size=cfg.d)
        w /= np.linalg.norm(w)
        factor = (x - 0.5) @ w  # unit projection keeps the factor's std at 0.25
        x = 0.5 + (1.0 - m) * (x - 0.5) + m * factor[:, None]
    x = np.clip(x, 0.0, 1.0)
    return Dataset(x, labels, cfg.c)


def split(ds: Dataset, fracs, seed: int):
    """Shuffle and cut into disjoint (train, test, pred) datasets.

    ``fracs`` is a (train, test, pred) triple summing to at most 1.
    """
    train_f, test_f, pred_f = (float(f) for f in fracs)
    if min(train_f, test_f, pred_f) < 0 or train_f + test_f + pred_f > 1.0 + 1e-12:
        raise InputError(f"split fractions must be nonnegative and sum <= 1, got {fracs}")
    perm = Rng(seed).permutation(ds.n)
    n_train = int(round(train_f * ds.n))
    n_test = int(round(test_f * ds.n))
    n_pred = int(round(pred_f * ds.n))
    n_pred = min(n_pred, ds.n - n_train - n_test)
    a, b = n_train, n_train + n_test
    return (
        ds.take(perm[:a]),
        ds.take(perm[a:b]),
        ds.take(perm[b : b + n_pred]),
    )
