"""Windowed feature construction and threshold-based jump labeling.

From an indexed percent-change series, each anchor row collects the
``window_len`` consecutive returns ending at the anchor as features, and
the binary target is 1 when at least ``min_jumps`` threshold-crossing
moves occur in the strictly-future lookahead range (anchor, anchor +
lookahead].  Windows and lookaheads never span a session or day boundary;
anchors that would are dropped rather than padded.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import InvalidParameterError
from .market_data import ReturnSeries

log = logging.getLogger(__name__)

DIRECTIONS = ("down", "up", "both")


@dataclass(frozen=True)
class LabelingConfig:
    """Knobs of the labeling protocol.

    threshold_pct is in the same percent units as the return series; a
    downward move of at least that magnitude is a big jump under the
    default direction.  The comparison is inclusive (>= threshold) unless
    ``strict`` is set.
    """

    window_len: int = 10
    lookahead: int = 10
    threshold_pct: float = 0.1
    min_jumps: int = 2
    direction: str = "down"
    stride: int = 1
    strict: bool = False

    def __post_init__(self):
        if self.window_len < 1 or self.lookahead < 1 or self.min_jumps < 1 or self.stride < 1:
            raise InvalidParameterError("window_len, lookahead, min_jumps and stride must be >= 1")
        if self.threshold_pct <= 0:
            raise InvalidParameterError(f"threshold_pct must be > 0, got {self.threshold_pct}")
        if self.direction not in DIRECTIONS:
            raise InvalidParameterError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")


@dataclass(frozen=True)
class IndexedReturns:
    """Return rows with a dense chronological index attached."""

    index: np.ndarray
    values: np.ndarray
    timestamps: tuple[datetime, ...]
    session_key: np.ndarray  # constant within one (day, session) block

    def __len__(self) -> int:
        return len(self.index)


def index_series(returns: ReturnSeries) -> IndexedReturns:
    """Attach the dense index 0..n-1 in chronological order."""
    n = len(returns)
    return IndexedReturns(
        index=np.arange(n, dtype=int),
        values=np.asarray(returns.values, dtype=float),
        timestamps=returns.timestamps,
        session_key=returns.session_keys(),
    )


def index_for_timestamp(indexed: IndexedReturns, ts: datetime) -> int:
    """Index of the row with exactly this timestamp (for date-based splits)."""
    for i, stamp in enumerate(indexed.timestamps):
        if stamp == ts:
            return i
    raise InvalidParameterError(f"no return row at {ts}")


def mark_big_jumps(returns, cfg: LabelingConfig) -> np.ndarray:
    """Boolean mark per return row: does it meet the threshold move?

    down marks pct <= -threshold, up marks pct >= +threshold, both marks
    |pct| >= threshold (strict comparisons when cfg.strict).
    """
    v = np.asarray(returns.values, dtype=float)
    k = cfg.threshold_pct
    if cfg.direction == "down":
        return (v < -k) if cfg.strict else (v <= -k)
    if cfg.direction == "up":
        return (v > k) if cfg.strict else (v >= k)
    return (np.abs(v) > k) if cfg.strict else (np.abs(v) >= k)


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix of consecutive returns plus the binary jump target.

    source_length is the length of the indexed return series the anchors
    were drawn from; split ranges are validated against it (anchors near
    series edges do not exist, but index ranges may still cover them).
    """

    anchor_index: np.ndarray
    features: np.ndarray
    theta: np.ndarray
    source_length: int | None = None

    def __len__(self) -> int:
        return len(self.anchor_index)

    @property
    def window_len(self) -> int:
        return self.features.shape[1] if self.features.ndim == 2 else 0

    def class_counts(self) -> tuple[int, int]:
        ones = int(np.sum(self.theta == 1))
        return len(self) - ones, ones


def build_dataset(returns: IndexedReturns, marks: np.ndarray, cfg: LabelingConfig) -> LabeledDataset:
    """Assemble anchors, feature windows and targets.

    For anchor i the features are values[i-window_len+1 .. i] and theta is
    1 iff at least cfg.min_jumps marks fall in (i, i+lookahead].  An anchor
    is kept only when that whole span lies inside one (day, session) block.
    """
    n = len(returns)
    marks = np.asarray(marks, dtype=bool)
    if len(marks) != n:
        raise InvalidParameterError("marks must align with the return rows")
    if n < cfg.window_len + cfg.lookahead:
        log.warning("series of %d rows is shorter than window_len + lookahead = %d; empty dataset",
                    n, cfg.window_len + cfg.lookahead)
        return LabeledDataset(anchor_index=np.empty(0, dtype=int),
                              features=np.empty((0, cfg.window_len)),
                              theta=np.empty(0, dtype=int), source_length=n)
    prefix = np.concatenate([[0], np.cumsum(marks)])  # prefix[j] = marks in rows < j
    anchors: list[int] = []
    rows: list[np.ndarray] = []
    targets: list[int] = []
    keys = returns.session_key
    for i in range(cfg.window_len - 1, n - cfg.lookahead, cfg.stride):
        lo = i - cfg.window_len + 1
        hi = i + cfg.lookahead
        if keys[lo] != keys[hi]:
            continue
        count = int(prefix[hi + 1] - prefix[i + 1])
        anchors.append(int(returns.index[i]))
        rows.append(returns.values[lo:i + 1])
        targets.append(1 if count >= cfg.min_jumps else 0)
    if not anchors:
        return LabeledDataset(anchor_index=np.empty(0, dtype=int),
                              features=np.empty((0, cfg.window_len)),
                              theta=np.empty(0, dtype=int), source_length=n)
    return LabeledDataset(anchor_index=np.array(anchors, dtype=int),
                          features=np.vstack(rows), theta=np.array(targets, dtype=int),
                          source_length=n)


@dataclass(frozen=True)
class SplitSpec:
    """Inclusive train/test anchor-index ranges; test may be absent."""

    train: tuple[int, int]
    test: tuple[int, int] | None = None
    name: str = ""


def split(dataset: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Partition rows by inclusive anchor-index ranges.

    Ranges live in the indexed return space: they may start before the
    first existing anchor (windowing removes early anchors) but must not
    extend past the data.
    """
    if len(dataset) == 0:
        raise InvalidParameterError("cannot split an empty dataset")
    lo_bound = 0
    if dataset.source_length is not None:
        hi_bound = dataset.source_length - 1
    else:
        hi_bound = int(dataset.anchor_index.max())

    def check(rng: tuple[int, int], label: str):
        a, b = rng
        if a > b:
            raise InvalidParameterError(f"{label} range {a}..{b} is empty or reversed")
        if a < lo_bound or b > hi_bound:
            raise InvalidParameterError(
                f"{label} range {a}..{b} outside index bounds {lo_bound}..{hi_bound}")

    check(spec.train, "train")
    if spec.test is not None:
        check(spec.test, "test")
        if spec.train[1] >= spec.test[0]:
            raise InvalidParameterError("train range must precede the test range without overlap")

    def take(rng: tuple[int, int] | None) -> LabeledDataset:
        if rng is None:
            return LabeledDataset(anchor_index=np.empty(0, dtype=int),
                                  features=np.empty((0, dataset.window_len)),
                                  theta=np.empty(0, dtype=int),
                                  source_length=dataset.source_length)
        mask = (dataset.anchor_index >= rng[0]) & (dataset.anchor_index <= rng[1])
        return LabeledDataset(anchor_index=dataset.anchor_index[mask],
                              features=dataset.features[mask], theta=dataset.theta[mask],
                              source_length=dataset.source_length)

    return take(spec.train), take(spec.test)


def write_dataset_csv(fileobj, dataset: LabeledDataset) -> None:
    """Serialize as ``index,f1..fW,theta`` with round-trip float formatting."""
    w = dataset.window_len
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["index"] + [f"f{j + 1}" for j in range(w)] + ["theta"])
    for i in range(len(dataset)):
        row = [int(dataset.anchor_index[i])]
        row += [repr(float(x)) for x in dataset.features[i]]
        row.append(int(dataset.theta[i]))
        writer.writerow(row)


def read_dataset_csv(fileobj) -> LabeledDataset:
    reader = csv.reader(fileobj)
    header = next(reader)
    if header[0] != "index" or header[-1] != "theta":
        raise InvalidParameterError(f"unexpected dataset header {header!r}")
    w = len(header) - 2
    anchors: list[int] = []
    feats: list[list[float]] = []
    targets: list[int] = []
    for row in reader:
        anchors.append(int(row[0]))
        feats.append([float(x) for x in row[1:w + 1]])
        targets.append(int(row[-1]))
    return LabeledDataset(anchor_index=np.array(anchors, dtype=int),
                          features=np.array(feats) if feats else np.empty((0, w)),
                          theta=np.array(targets, dtype=int))
