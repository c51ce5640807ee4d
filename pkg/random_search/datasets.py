"""Binary classification data for the logistic benchmark."""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .constants import DEFAULT_LAMBDA, SYNTHETIC_D, SYNTHETIC_N, SYNTHETIC_SEPARATION
from .errors import DataError, EmptyDatasetError, InvalidLabelError
from .objectives import LogisticObjective, make_logistic

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"


def standardize(features: np.ndarray) -> np.ndarray:
    """Zero mean, unit variance per column; constant columns are only centred."""
    centred = features - features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0] = 1.0
    return centred / scale


def load_dataset_csv(
    path: Path | str, *, standardize_features: bool = True, label_column: str = LABEL_COLUMN
) -> Tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"Dataset file not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDatasetError(f"{path}: file is empty") from None
        if label_column not in header:
            raise DataError(f"{path}: no '{label_column}' column in header {header}")
        label_pos = header.index(label_column)
        feature_cols = [i for i in range(len(header)) if i != label_pos]
        if not feature_cols:
            raise DataError(f"{path}: no feature columns")

        rows: List[List[float]] = []
        labels: List[float] = []
        line_numbers: List[int] = []
        for row in reader:
            row_no = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}"
                )
            values = []
            for col in range(len(header)):
                cell = row[col].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_no}, column {col + 1} ('{header[col]}'): "
                        f"cannot parse {cell!r} as a number"
                    ) from None
            labels.append(values[label_pos])
            line_numbers.append(row_no)
            rows.append([values[i] for i in feature_cols])

    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")
    features = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    y = _normalize_labels(y, path, line_numbers)
    if standardize_features:
        features = standardize(features)
    return features, y


def _normalize_labels(
    y: np.ndarray, source: Path | str, line_numbers: Optional[List[int]] = None
) -> np.ndarray:
    """Map labels to +/-1. ``line_numbers`` gives the source line of each entry of ``y``."""
    observed = set(np.unique(y).tolist())
    if observed <= {-1.0, 1.0}:
        return y
    if observed <= {0.0, 1.0}:
        logger.warning("%s: labels are 0/1; mapping 0 -> -1 and 1 -> +1", source)
        return np.where(y > 0, 1.0, -1.0)
    if observed <= {-1.0, 0.0, 1.0}:
        bad = np.flatnonzero(y == 0.0)
    else:
        bad = np.flatnonzero(~np.isin(y, (-1.0, 0.0, 1.0)))
    first = int(bad[0])
    where = f"row {line_numbers[first]}" if line_numbers else f"entry {first}"
    raise InvalidLabelError(
        f"{source}: labels must be +/-1 (or 0/1); {where} has {float(y[first])!r}"
    )


def synthetic_dataset(
    n: int = SYNTHETIC_N,
    d: int = SYNTHETIC_D,
    rng: Optional[np.random.Generator] = None,
    *,
    separation: float = SYNTHETIC_SEPARATION,
    standardize_features: bool = True,
) -> Tuple[np.ndarray, np.ndarray]:
    """Two Gaussian class clusters whose means are ``separation`` apart."""
    if n < 2:
        raise EmptyDatasetError(f"Synthetic dataset needs n >= 2, got {n}")
    rng = rng if rng is not None else np.random.default_rng(0)
    labels = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    rng.shuffle(labels)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    features = rng.standard_normal((n, d)) + 0.5 * separation * labels[:, None] * direction
    if standardize_features:
        features = standardize(features)
    return features, labels


def load_objective(
    dataset: str = "synthetic",
    *,
    lam: float = DEFAULT_LAMBDA,
    seed: int = 0,
    standardize_features: bool = True,
    separation: float = SYNTHETIC_SEPARATION,
) -> LogisticObjective:
    """The synthetic task (class means ``separation`` apart) or a CSV dataset."""
    if dataset == "synthetic":
        features, labels = synthetic_dataset(
            rng=np.random.default_rng(seed),
            separation=separation,
            standardize_features=standardize_features,
        )
    else:
        features, labels = load_dataset_csv(dataset, standardize_features=standardize_features)
    return make_logistic(features, labels, lam)
