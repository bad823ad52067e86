"""Dataset ingestion, group encoding, and reproducible splits."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataFormatError,
    EmptyDatasetError,
    FairRobustError,
    SchemaError,
)


@dataclass(frozen=True)
class Instance:
    """One labeled example: feature vector, protected-group id, binary label."""

    features: np.ndarray
    group: int
    label: int


@dataclass
class Dataset:
    """Column-major store of n instances.

    ``groups`` holds dense ids in ``{0, ..., group_count - 1}``;
    ``group_names`` remembers the original protected values in
    first-appearance order.
    """

    features: np.ndarray
    groups: np.ndarray
    labels: np.ndarray
    group_count: int
    group_names: tuple[str, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n

    def instance(self, i: int) -> Instance:
        return Instance(self.features[i], int(self.groups[i]), int(self.labels[i]))

    def __iter__(self):
        return (self.instance(i) for i in range(self.n))

    def subset(self, indices) -> "Dataset":
        """New dataset restricted to ``indices`` (group_count is inherited)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            groups=self.groups[idx],
            labels=self.labels[idx],
            group_count=self.group_count,
            group_names=self.group_names,
        )

    def validate(self) -> None:
        if self.n == 0:
            raise EmptyDatasetError("dataset has no instances")
        if not np.all(np.isfinite(self.features)):
            raise DataFormatError("dataset contains non-finite feature values")
        present = np.unique(self.groups)
        expected = np.arange(self.group_count)
        if not np.array_equal(present, expected):
            raise FairRobustError(
                f"group ids {present.tolist()} do not cover 0..{self.group_count - 1}"
            )
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise DataFormatError("labels must be in {0, 1}")


@dataclass(frozen=True)
class SplitSpec:
    """Seeded train/validation/test fractions (must sum to 1)."""

    seed: int
    fractions: tuple[float, float, float] = (0.64, 0.16, 0.20)

    def __post_init__(self):
        if any(not (0.0 < f < 1.0) for f in self.fractions):
            raise FairRobustError("split fractions must each lie in (0, 1)")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise FairRobustError("split fractions must sum to 1")


def load_csv(path, schema: dict) -> Dataset:
    """Read a header-first CSV into a Dataset.

    ``schema`` names exactly one ``label`` column and one ``protected``
    column; every remaining column is a numeric feature (or pass an
    explicit ``features`` list to select a subset). Protected values are
    mapped to dense group ids in order of first appearance; labels must
    literally be 0 or 1.
    """
    if "label" not in schema or "protected" not in schema:
        raise SchemaError("schema must name 'label' and 'protected' columns")
    label_col = schema["label"]
    prot_col = schema["protected"]

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        for col in (label_col, prot_col):
            if col not in header:
                raise SchemaError(f"column {col!r} not found in {path}")
        if "features" in schema:
            feature_cols = list(schema["features"])
            missing = [c for c in feature_cols if c not in header]
            if missing:
                raise SchemaError(f"feature columns {missing} not found in {path}")
        else:
            feature_cols = [c for c in header if c not in (label_col, prot_col)]
        if not feature_cols:
            raise SchemaError("schema leaves no feature columns")

        col_idx = {c: header.index(c) for c in header}
        feat_idx = [col_idx[c] for c in feature_cols]
        label_idx = col_idx[label_col]
        prot_idx = col_idx[prot_col]

        feats, groups, labels = [], [], []
        group_ids: dict[str, int] = {}
        for row_no, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(
                    f"row {row_no}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                feats.append([float(row[j]) for j in feat_idx])
            except ValueError:
                bad = [c for j, c in zip(feat_idx, (row[j] for j in feat_idx))
                       if not _is_float(c)]
                raise DataFormatError(
                    f"row {row_no}: non-numeric feature cell {bad[0]!r}"
                ) from None
            raw_label = row[label_idx].strip()
            if raw_label not in ("0", "1"):
                raise DataFormatError(f"row {row_no}: label {raw_label!r} not in {{0,1}}")
            labels.append(int(raw_label))
            key = row[prot_idx].strip()
            if key not in group_ids:
                group_ids[key] = len(group_ids)
            groups.append(group_ids[key])

    if not feats:
        raise EmptyDatasetError(f"{path} has a header but no data rows")

    ds = Dataset(
        features=np.asarray(feats, dtype=np.float64),
        groups=np.asarray(groups, dtype=np.int64),
        labels=np.asarray(labels, dtype=np.int64),
        group_count=len(group_ids),
        group_names=tuple(group_ids),
    )
    ds.validate()
    return ds


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def split_indices(n: int, spec: SplitSpec):
    """Deterministic index partition for an n-row dataset."""
    n_train = int(np.floor(spec.fractions[0] * n))
    n_val = int(np.floor(spec.fractions[1] * n))
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) <= 0:
        raise EmptyDatasetError(
            f"split of n={n} with fractions {spec.fractions} yields an empty part"
        )
    perm = np.random.default_rng(spec.seed).permutation(n)
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def split(d: Dataset, spec: SplitSpec):
    """Split into (train, validation, test). Repeated calls are identical."""
    tr, va, te = split_indices(d.n, spec)
    return d.subset(tr), d.subset(va), d.subset(te)


def make_planted(
    n: int,
    seed: int,
    group_label_skew: float = 0.2,
    signal_strength: float = 2.0,
    proxy_strength: float = 1.0,
) -> Dataset:
    """Synthetic two-group benchmark with a group-correlated feature.

    Label base rates differ across groups by ``group_label_skew``; one
    feature carries genuine signal, one is a noisy proxy for the group, and
    one is pure noise. A plain risk minimizer picks up the proxy and the
    skew, so it is measurably unfair and highly attackable under
    reweighting, while accurate fair models still exist.
    """
    rng = np.random.default_rng(seed)
    groups = rng.integers(0, 2, size=n)
    p1 = 0.5 + group_label_skew / 2.0
    p0 = 0.5 - group_label_skew / 2.0
    labels = (rng.random(n) < np.where(groups == 1, p1, p0)).astype(np.int64)
    signal = signal_strength * (labels - 0.5) + rng.normal(0, 1.0, n)
    proxy = proxy_strength * (groups - 0.5) * 2.0 + rng.normal(0, 1.0, n)
    noise = rng.normal(0, 1.0, n)
    ds = Dataset(
        features=np.column_stack([signal, proxy, noise]),
        groups=groups.astype(np.int64),
        labels=labels,
        group_count=2,
        group_names=("g0", "g1"),
    )
    ds.validate()
    return ds
