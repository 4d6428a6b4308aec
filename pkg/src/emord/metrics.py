"""Evaluation: not just how often a model is wrong, but how far off it lands.

Alongside accuracy and macro-F1, every report carries the distribution of
error distances on the emotion scale (rank gap in 1d, L1 cell gap in 2d).
Two models with identical accuracy can differ sharply here: one mistakes joy
for surprise, the other mistakes joy for sadness.

All distances are computed between the gold label and the *resolved*
predicted label.  Raw decoded grid cells (possibly unlabeled) matter only to
`holdout_proximity`, which asks where the model places a class it never saw.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint
from .data import DataError, LabeledCorpus, encode_corpus
from .infer import Prediction, predict_ids
from .taxonomy import (
    EmotionTaxonomy,
    grid_chebyshev_distance,
    label_distance,
    max_distance,
)

REPORT_FORMAT = "emord.report/1"


class MetricsError(ValueError):
    """Evaluation request that cannot be satisfied (empty corpus, bad shapes)."""


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    support: int  # gold count
    predicted: int

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "predicted": self.predicted,
        }


@dataclass(frozen=True)
class MetricsReport:
    """Full evaluation of one model on one labeled corpus."""

    mode: str
    labels: tuple[str, ...]
    n_examples: int
    accuracy: float
    macro_f1: float
    confusion: np.ndarray  # (K, K) ints, rows gold, columns predicted
    per_class: tuple[ClassMetrics, ...]
    error_histogram: dict[int, int]  # errors bucketed by scale distance, 1..max
    mean_error_distance: float  # over misclassified examples only; 0.0 if none
    max_error_distance: int
    mean_distance: float  # over all examples, correct predictions contribute 0
    chebyshev_histogram: dict[int, int] | None = None  # 2d only
    mean_error_chebyshev: float | None = None
    off_grid_rate: float | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "format": REPORT_FORMAT,
            "mode": self.mode,
            "labels": list(self.labels),
            "n_examples": self.n_examples,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.tolist(),
            "per_class": [cm.to_dict() for cm in self.per_class],
            "error_histogram": {str(d): n for d, n in self.error_histogram.items()},
            "mean_error_distance": self.mean_error_distance,
            "max_error_distance": self.max_error_distance,
            "mean_distance": self.mean_distance,
        }
        if self.chebyshev_histogram is not None:
            out["chebyshev_histogram"] = {
                str(d): n for d, n in self.chebyshev_histogram.items()
            }
            out["mean_error_chebyshev"] = self.mean_error_chebyshev
            out["off_grid_rate"] = self.off_grid_rate
        return out


@dataclass(frozen=True)
class EvalResult:
    report: MetricsReport
    pairs: tuple[tuple[str, str], ...]  # (gold, predicted) per example
    predictions: tuple[Prediction, ...]


def confusion_matrix(pairs, labels: tuple[str, ...]) -> np.ndarray:
    """Count matrix with rows indexed by gold label, columns by prediction."""
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for gold, pred in pairs:
        counts[index[gold], index[pred]] += 1
    return counts


def per_class_metrics(confusion: np.ndarray, labels: tuple[str, ...]) -> tuple[ClassMetrics, ...]:
    gold_counts = confusion.sum(axis=1)
    pred_counts = confusion.sum(axis=0)
    out = []
    for i, label in enumerate(labels):
        tp = int(confusion[i, i])
        support = int(gold_counts[i])
        predicted = int(pred_counts[i])
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out.append(
            ClassMetrics(
                label=label,
                precision=precision,
                recall=recall,
                f1=f1,
                support=support,
                predicted=predicted,
            )
        )
    return tuple(out)


def macro_f1(confusion: np.ndarray) -> float:
    """Mean per-class F1, excluding classes absent from both gold and predictions.

    A class with zero gold examples that the model also never predicts says
    nothing about the model, so it is left out of the mean rather than
    dragging it down with a spurious zero.
    """
    confusion = np.asarray(confusion)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise MetricsError(f"confusion matrix must be square, got {confusion.shape}")
    labels = tuple(str(i) for i in range(confusion.shape[0]))
    per_class = per_class_metrics(confusion, labels)
    included = [cm.f1 for cm in per_class if cm.support > 0 or cm.predicted > 0]
    if not included:
        raise MetricsError("no class has any gold or predicted example")
    return sum(included) / len(included)


def error_histogram(pairs, taxonomy: EmotionTaxonomy) -> dict[int, int]:
    """Misclassification counts bucketed by scale distance, keys 1..max."""
    hist = {d: 0 for d in range(1, max_distance(taxonomy) + 1)}
    for gold, pred in pairs:
        if gold != pred:
            hist[label_distance(taxonomy, gold, pred)] += 1
    return hist


def evaluate(ck: Checkpoint, corpus: LabeledCorpus, batch_size: int = 256) -> EvalResult:
    """Run the model over a corpus and measure everything in one pass."""
    if len(corpus) == 0:
        raise MetricsError("cannot evaluate on an empty corpus")
    token_ids, gold_labels = encode_corpus(corpus, ck.vocab, ck.max_seq_length)
    predictions = tuple(predict_ids(ck, token_ids, batch_size=batch_size))
    pairs = tuple(zip(gold_labels, (p.label for p in predictions)))
    report = build_report(pairs, ck.taxonomy, ck.config.head_mode, predictions)
    return EvalResult(report=report, pairs=pairs, predictions=predictions)


def build_report(
    pairs,
    taxonomy: EmotionTaxonomy,
    mode: str,
    predictions: tuple[Prediction, ...] | None = None,
) -> MetricsReport:
    """Assemble a MetricsReport from (gold, predicted) label pairs."""
    pairs = tuple(pairs)
    if not pairs:
        raise MetricsError("no (gold, predicted) pairs to score")
    for gold, pred in pairs:
        if gold not in taxonomy.labels or pred not in taxonomy.labels:
            raise MetricsError(f"pair ({gold!r}, {pred!r}) not in the taxonomy")
    labels = taxonomy.labels
    confusion = confusion_matrix(pairs, labels)
    per_class = per_class_metrics(confusion, labels)
    n = len(pairs)
    accuracy = float(np.trace(confusion)) / n

    distances = [label_distance(taxonomy, g, p) for g, p in pairs]
    error_distances = [d for d in distances if d > 0]
    hist = error_histogram(pairs, taxonomy)

    chebyshev_hist = None
    mean_cheb = None
    off_grid_rate = None
    if taxonomy.mode == "2d":
        chebyshev_hist = {d: 0 for d in range(1, taxonomy.grid_size)}
        cheb_errors = []
        for gold, pred in pairs:
            if gold != pred:
                cd = grid_chebyshev_distance(taxonomy, gold, pred)
                chebyshev_hist[cd] += 1
                cheb_errors.append(cd)
        mean_cheb = sum(cheb_errors) / len(cheb_errors) if cheb_errors else 0.0
        if predictions is not None:
            off_grid_rate = sum(1 for p in predictions if p.off_grid) / n

    return MetricsReport(
        mode=mode,
        labels=labels,
        n_examples=n,
        accuracy=accuracy,
        macro_f1=macro_f1(confusion),
        confusion=confusion,
        per_class=per_class,
        error_histogram=hist,
        mean_error_distance=(
            sum(error_distances) / len(error_distances) if error_distances else 0.0
        ),
        max_error_distance=max(error_distances) if error_distances else 0,
        mean_distance=sum(distances) / len(distances),
        chebyshev_histogram=chebyshev_hist,
        mean_error_chebyshev=mean_cheb,
        off_grid_rate=off_grid_rate,
    )


@dataclass(frozen=True)
class HoldoutReport:
    """Where a model puts a class it never trained on (2d only).

    Distances are L1 from the *raw decoded cell* to the held-out label's
    cell — resolution to labeled cells would hide how close the model gets.
    """

    label: str
    n_examples: int
    mean_distance: float
    distribution: dict[int, int]  # keys 0..2*(G-1)

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "holdout_label": self.label,
            "n_examples": self.n_examples,
            "mean_distance": self.mean_distance,
            "distribution": {str(d): n for d, n in self.distribution.items()},
        }


def holdout_proximity(ck: Checkpoint, corpus: LabeledCorpus, held_out_label: str) -> HoldoutReport:
    """Mean grid distance from decoded cells to a class absent from training."""
    taxonomy = ck.taxonomy
    if taxonomy.mode != "2d":
        raise MetricsError("holdout proximity is defined on grid taxonomies only")
    if ck.config.head_mode != "ordinal-2d":
        raise MetricsError("holdout proximity needs an ordinal-2d head (decoded cells)")
    target = taxonomy.cell(held_out_label)
    wrong = [lab for lab in corpus.labels() if lab != held_out_label]
    if wrong:
        raise MetricsError(
            f"corpus must contain only {held_out_label!r} records; found {sorted(set(wrong))}"
        )
    if len(corpus) == 0:
        raise MetricsError("cannot evaluate on an empty corpus")
    token_ids, _ = encode_corpus(corpus, ck.vocab, ck.max_seq_length)
    predictions = predict_ids(ck, token_ids)
    distribution = {d: 0 for d in range(0, 2 * (taxonomy.grid_size - 1) + 1)}
    distances = []
    for pred in predictions:
        v, a = pred.cell
        d = abs(v - target[0]) + abs(a - target[1])
        distribution[d] += 1
        distances.append(d)
    return HoldoutReport(
        label=held_out_label,
        n_examples=len(corpus),
        mean_distance=sum(distances) / len(distances),
        distribution=distribution,
    )


def write_report_json(report, path: str | Path) -> None:
    """Serialize a MetricsReport or HoldoutReport deterministically."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_confusion_csv(report: MetricsReport, path: str | Path) -> None:
    """Confusion counts with label names on both the header row and column."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", *report.labels])
        for label, row in zip(report.labels, report.confusion):
            writer.writerow([label, *[int(x) for x in row]])


def write_histogram_csv(report: MetricsReport, path: str | Path) -> None:
    """Error-distance histogram as distance,count rows (zero buckets kept)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["distance", "count"])
        for d in sorted(report.error_histogram):
            writer.writerow([d, report.error_histogram[d]])


def write_pairs_csv(pairs, path: str | Path) -> None:
    """Per-example gold,predicted rows; everything else re-derives from these."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["gold", "predicted"])
        for gold, pred in pairs:
            writer.writerow([gold, pred])
