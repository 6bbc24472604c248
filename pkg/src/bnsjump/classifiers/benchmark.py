"""Benchmark harness: train/evaluate a suite of algorithms over index splits.

Each (split, algorithm) cell is trained with a seed derived from
(master_seed, split position, algorithm position), so reports are
identical no matter how many workers execute the grid.  Externally
produced prediction files (``index,predicted_theta`` CSV) are scored
through the same evaluator under the pseudo-algorithm ``external:<name>``.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InvalidParameterError
from ..labeling import LabeledDataset, SplitSpec, split
from .api import ALGORITHM_IDS, predict, resolve_hyperparams, train
from .metrics import ClassReport, evaluate

REPORT_COLUMNS = ["algorithm", "precision0", "recall0", "f1_0", "support0",
                  "precision1", "recall1", "f1_1", "support1"]


@dataclass(frozen=True)
class BenchmarkCell:
    split_name: str
    algorithm: str
    report: ClassReport
    hyperparams: dict


def load_external_predictions(source) -> dict[int, int]:
    """Read an ``index,predicted_theta`` CSV into an index -> label map."""
    fh = open(source, "r", encoding="utf-8", newline="") if isinstance(source, (str, Path)) else source
    try:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip().lower() for h in header] != ["index", "predicted_theta"]:
            raise InvalidParameterError(f"expected header 'index,predicted_theta', got {header!r}")
        out: dict[int, int] = {}
        for row in reader:
            if not row:
                continue
            label = int(row[1])
            if label not in (0, 1):
                raise InvalidParameterError(f"predicted_theta must be 0 or 1, got {label}")
            out[int(row[0])] = label
    finally:
        if isinstance(source, (str, Path)):
            fh.close()
    return out


def _score_external(name: str, predictions: dict[int, int], test: LabeledDataset) -> ClassReport:
    missing = [int(i) for i in test.anchor_index if int(i) not in predictions]
    if missing:
        raise InvalidParameterError(
            f"external predictions {name!r} missing {len(missing)} test indices (first: {missing[:5]})")
    pred = np.array([predictions[int(i)] for i in test.anchor_index], dtype=int)
    return evaluate(pred, test.theta)


def run_benchmark(
    dataset: LabeledDataset,
    splits: list[SplitSpec],
    algorithms: list[str] | None = None,
    hyperparams_bank: dict[str, dict] | None = None,
    seed: int = 0,
    external: dict[str, dict[int, int]] | None = None,
    max_workers: int | None = None,
) -> list[BenchmarkCell]:
    """One ClassReport per (split, algorithm), in deterministic order.

    Raises if the per-class supports differ across algorithms within one
    split; supports are a function of the test rows alone.
    """
    algorithms = list(algorithms) if algorithms is not None else list(ALGORITHM_IDS)
    hyperparams_bank = hyperparams_bank or {}
    external = external or {}
    for alg in algorithms:
        resolve_hyperparams(alg, hyperparams_bank.get(alg))

    prepared = []
    for si, spec in enumerate(splits):
        name = spec.name or f"S{si + 1}"
        train_set, test_set = split(dataset, spec)
        if len(train_set) == 0 or len(test_set) == 0:
            raise InvalidParameterError(f"split {name} produced an empty train or test set")
        prepared.append((si, name, train_set, test_set))

    def run_cell(args) -> BenchmarkCell:
        si, name, train_set, test_set, ai, alg = args
        hp = resolve_hyperparams(alg, hyperparams_bank.get(alg))
        model = train(alg, train_set, hyperparams_bank.get(alg), seed=(seed, si, ai))
        report = evaluate(predict(model, test_set.features), test_set.theta)
        return BenchmarkCell(split_name=name, algorithm=alg, report=report, hyperparams=hp)

    jobs = [(si, name, train_set, test_set, ai, alg)
            for si, name, train_set, test_set in prepared
            for ai, alg in enumerate(algorithms)]
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            cells = list(pool.map(run_cell, jobs))
    else:
        cells = [run_cell(job) for job in jobs]

    for si, name, train_set, test_set in prepared:
        for ext_name in sorted(external):
            report = _score_external(ext_name, external[ext_name], test_set)
            cells.append(BenchmarkCell(split_name=name, algorithm=f"external:{ext_name}",
                                       report=report, hyperparams={}))
    # regroup so each split lists its built-ins then its external rows
    cells = [c for _, name, _, _ in prepared for c in cells if c.split_name == name]

    by_split: dict[str, set[tuple[int, int]]] = {}
    for cell in cells:
        by_split.setdefault(cell.split_name, set()).add(cell.report.supports())
    for name, supports in by_split.items():
        if len(supports) != 1:
            raise AssertionError(f"supports differ across algorithms within split {name}: {supports}")
    return cells


def _row(cell: BenchmarkCell) -> list:
    r0, r1 = cell.report.class0, cell.report.class1
    return [cell.algorithm, r0.precision, r0.recall, r0.f1, r0.support,
            r1.precision, r1.recall, r1.f1, r1.support]


def write_benchmark_csv(fileobj, cells: list[BenchmarkCell]) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["split"] + REPORT_COLUMNS)
    for cell in cells:
        row = _row(cell)
        writer.writerow([cell.split_name, row[0]]
                        + [repr(float(x)) for x in row[1:4]] + [row[4]]
                        + [repr(float(x)) for x in row[5:8]] + [row[8]])


def format_benchmark_text(cells: list[BenchmarkCell]) -> str:
    """Aligned per-split blocks with two-decimal metrics."""
    lines: list[str] = []
    split_order: list[str] = []
    for cell in cells:
        if cell.split_name not in split_order:
            split_order.append(cell.split_name)
    width = max([len(c.algorithm) for c in cells] + [len("algorithm")])
    header = (f"{'algorithm':<{width}}  "
              "precision0 recall0 f1_0 support0  precision1 recall1 f1_1 support1")
    for name in split_order:
        lines.append(f"== split {name} ==")
        lines.append(header)
        for cell in cells:
            if cell.split_name != name:
                continue
            r0, r1 = cell.report.class0, cell.report.class1
            lines.append(
                f"{cell.algorithm:<{width}}  "
                f"{r0.precision:>10.2f} {r0.recall:>7.2f} {r0.f1:>4.2f} {r0.support:>8d}  "
                f"{r1.precision:>10.2f} {r1.recall:>7.2f} {r1.f1:>4.2f} {r1.support:>8d}")
        lines.append("")
    return "\n".join(lines)
